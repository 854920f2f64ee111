"""Command-line entry point: seeded experiments in, CSV or PASS/FAIL reports out.

Every subcommand is a deterministic function of its flags: the same seed
produces the same bytes (benchmark timing columns excepted, since wall
clocks are not seedable).  Floats are rendered with 9 significant digits,
lines end with LF.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field

import numpy as np

from .attention import block_forward, nala_linear, nala_quadratic, random_block_params
from .bench import BenchRecord, DEFAULT_QUAD_CAP, EVALUATORS, run_scaling_sweep
from .entropy import (
    EntropyScanRecord,
    SOFTMAX_ID,
    concavity_probe,
    entropy_deviation_scan,
    norm_entropy_experiment,
    prop2_invariance_check,
    theorem1_scan,
)
from .gradcheck import (
    SINGULAR_FLOOR,
    finite_diff_jacobian,
    jac_phi_k,
    jac_phi_q,
    max_rel_error,
)
from .kernels import KernelKind, KernelSpec, phi_k, phi_q
from .linalg import make_rng

KERNEL_CHOICES = [k.value for k in KernelKind] + [SOFTMAX_ID]

EQUIV_TOL = 1e-10
GRAD_TOL = 1e-6


@dataclass
class EquivRecord:
    n: int
    d: int
    lam: float = field(metadata={"csv": "lambda"})
    max_rel_dev: float = field(metadata={"csv": "max_rel_dev"})


@dataclass
class BlockDemoRecord:
    row: int
    col: int
    value: float


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_csv(records, path: str | None, record_type=None) -> None:
    """Write dataclass records as CSV: snake_case header, 9-digit floats, LF.

    record_type supplies the schema when records may be empty.  path None
    writes to stdout.
    """
    if record_type is None:
        if not records:
            raise ValueError("empty record list needs an explicit record_type")
        record_type = type(records[0])
    fields = dataclasses.fields(record_type)
    header = ",".join(f.metadata.get("csv", f.name) for f in fields)
    lines = [header]
    for r in records:
        lines.append(",".join(_format(getattr(r, f.name)) for f in fields))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path!r}: {exc}") from exc


def write_report(lines, path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path!r}: {exc}") from exc


def max_rel_dev(a: np.ndarray, b: np.ndarray) -> float:
    """Entrywise |a - b| / max(1, |b|), maximized."""
    return float((np.abs(a - b) / np.maximum(1.0, np.abs(b))).max())


def _c_grid(args) -> np.ndarray:
    return np.geomspace(args.c_min, args.c_max, args.c_steps)


def _spec(args) -> KernelSpec:
    return KernelSpec(kind=KernelKind(args.kernel), lam=args.lam)


def _spec_nala(args) -> KernelSpec:
    return KernelSpec(kind=KernelKind.NALA, lam=args.lam)


# --- subcommands -----------------------------------------------------------


def cmd_entropy_scan(args) -> int:
    rng = make_rng(args.seed)
    if args.kernel == SOFTMAX_ID:
        spec_list, softmax_too = [], True
    else:
        spec_list, softmax_too = [_spec(args)], False
    records, correlations = norm_entropy_experiment(
        rng, spec_list, args.n_dirs, args.n, args.d, _c_grid(args), softmax_too
    )
    write_csv(records, args.out, EntropyScanRecord)
    for kernel_id, corr in correlations.items():
        print(f"pearson(query_norm, entropy) [{kernel_id}] = {corr:.9g}", file=sys.stderr)
    return 0


def cmd_equiv_check(args, instances: int = 10) -> int:
    records = []
    spec = _spec(args)
    for i in range(instances):
        rng = make_rng(args.seed + i)
        Q = rng.standard_normal((args.n, args.d))
        K = rng.standard_normal((args.n, args.d))
        V = rng.standard_normal((args.n, args.d))
        dev = max_rel_dev(
            nala_linear(Q, K, V, spec).output, nala_quadratic(Q, K, V, spec).output
        )
        records.append(EquivRecord(args.n, args.d, args.lam, dev))
    write_csv(records, args.out, EquivRecord)
    worst = max(r.max_rel_dev for r in records)
    print(f"max relative deviation quadratic vs linear: {worst:.9g}", file=sys.stderr)
    return 0 if worst <= EQUIV_TOL else 1


def _admissible_point(rng, d: int, check) -> np.ndarray:
    for _ in range(1000):
        x = rng.standard_normal(d)
        if check(x):
            return x
    raise RuntimeError("could not sample an admissible point")


def cmd_grad_check(args, points: int = 50) -> int:
    rng = make_rng(args.seed)
    if args.kernel != KernelKind.NALA.value:
        print("grad-check applies to the nala kernel only", file=sys.stderr)
        return 2
    spec = _spec_nala(args)
    worst = {"phi_q": 0.0, "phi_k": 0.0}
    for _ in range(points):
        q = _admissible_point(
            rng, args.d, lambda x: np.all(np.abs(x / np.linalg.norm(x)) >= SINGULAR_FLOOR)
        )
        k = _admissible_point(rng, args.d, lambda x: np.all(np.abs(x) >= SINGULAR_FLOOR))
        fd_q = finite_diff_jacobian(lambda v: phi_q(v, spec), q)
        fd_k = finite_diff_jacobian(lambda v: phi_k(v, spec), k)
        worst["phi_q"] = max(worst["phi_q"], max_rel_error(jac_phi_q(q, spec), fd_q))
        worst["phi_k"] = max(worst["phi_k"], max_rel_error(jac_phi_k(k, spec), fd_k))
    lines = []
    ok = True
    for name, err in worst.items():
        passed = err <= GRAD_TOL
        ok &= passed
        lines.append(
            f"{'PASS' if passed else 'FAIL'} {name}: max rel error {err:.9g} "
            f"over {points} points (tol {GRAD_TOL:g})"
        )
    write_report(lines, args.out)
    return 0 if ok else 1


def cmd_bench(args) -> int:
    rng = make_rng(args.seed)
    n_grid = [int(s) for s in args.n_grid.split(",") if s]
    evaluator_ids = args.evaluators.split(",") if args.evaluators else None
    records, slopes = run_scaling_sweep(
        rng, n_grid, args.d, _spec(args), evaluator_ids, reps=args.reps,
        quad_cap=args.quad_cap,
    )
    write_csv(records, args.out, BenchRecord)
    for evaluator_id, slope in slopes.items():
        print(f"loglog slope [{evaluator_id}] = {slope:.3f}", file=sys.stderr)
    return 0


def cmd_block_demo(args) -> int:
    rng = make_rng(args.seed)
    params = random_block_params(rng, args.d, args.heads)
    X = rng.standard_normal((args.n, args.d))
    Z = block_forward(X, params, _spec(args), causal=args.causal)
    records = [
        BlockDemoRecord(i, j, float(Z[i, j]))
        for i in range(Z.shape[0])
        for j in range(Z.shape[1])
    ]
    write_csv(records, args.out, BlockDemoRecord)
    return 0


def cmd_verify_theorems(args) -> int:
    rng = make_rng(args.seed)
    lines: list[str] = []
    ok = True

    def report(name: str, passed: bool, detail: str):
        nonlocal ok
        ok &= passed
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")

    # Entropy of exponential rows becomes monotone decreasing in the scale.
    c_grid = np.geomspace(0.1, 20.0, 32)
    monotone = 0
    trials_per_n, sizes = 100, (4, 16, 64)
    for n in sizes:
        for _ in range(trials_per_n):
            x = rng.standard_normal(n)
            if theorem1_scan(x, c_grid).monotone_after:
                monotone += 1
    total = trials_per_n * len(sizes)
    report(
        "exp-row entropy decreases beyond a scale threshold",
        monotone == total,
        f"{monotone}/{total} random unique-max rows, N in {sizes}",
    )

    # Homogeneous kernels cannot see the query norm; the nala kernel can.
    K = rng.standard_normal((args.n, args.d))
    u = rng.standard_normal(args.d)
    u /= np.linalg.norm(u)
    sweep = np.geomspace(0.5, 8.0, 16)
    for kind in (KernelKind.RELU, KernelKind.FIXED_POWER):
        dev = prop2_invariance_check(u, K, KernelSpec(kind=kind, lam=args.lam), sweep)
        report(
            f"{kind.value} attention entropy is query-scale invariant",
            dev <= 1e-12,
            f"max deviation {dev:.3e} over scales [0.5, 8]",
        )
    _, nala_dev = entropy_deviation_scan(u, K, _spec_nala(args), sweep)
    report(
        "nala attention entropy depends on the query norm",
        nala_dev > 1e-3,
        f"max deviation {nala_dev:.3e} over scales [0.5, 8]",
    )

    # Entropy responds concavely to bumping a non-dominant coordinate.
    worst_sd = -np.inf
    for _ in range(50):
        x = rng.uniform(0.2, 1.2, size=12)
        for m in range(x.size):
            worst_sd = max(worst_sd, concavity_probe(x, m, [1e-4]).max())
    report(
        "entropy second differences nonpositive on random rows",
        worst_sd <= 1e-8,
        f"max second difference {worst_sd:.3e} over 50 rows x 12 coords",
    )

    # Every query/key feature product is a sum of positive cosine factors.
    spec = _spec_nala(args)
    qs = rng.standard_normal((100_000, 16))
    ks = rng.standard_normal((100_000, 16))
    sims = np.sum(phi_q(qs, spec) * phi_k(ks, spec), axis=1)
    report(
        "kernel similarities are nonnegative",
        bool(np.all(sims >= 0.0)),
        f"min similarity {sims.min():.3e} over {sims.size} Gaussian pairs",
    )

    # The [cos; sin] encoding preserves the direction's squared length.
    dirs = rng.standard_normal((1000, args.d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    angles = spec.squash_scale * np.tanh(dirs)
    trig_norm = (np.cos(angles) ** 2 + np.sin(angles) ** 2).sum(axis=1)
    err = float(np.abs(trig_norm - args.d).max())
    report(
        "sign encoding preserves the trig-block norm",
        err <= 1e-12,
        f"max |sum(cos^2+sin^2) - d| = {err:.3e} over 1000 directions",
    )

    write_report(lines, args.out)
    return 0 if ok else 1


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nala", description="norm-aware linear attention toolkit"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--n", type=_positive_int, default=128)
        p.add_argument("--d", type=_positive_int, default=16)
        p.add_argument("--heads", type=_positive_int, default=4)
        p.add_argument("--lambda", dest="lam", type=_positive_float, default=2.0)
        p.add_argument("--kernel", choices=KERNEL_CHOICES, default="nala")
        p.add_argument("--causal", action="store_true")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--c-min", type=_positive_float, default=0.25)
        p.add_argument("--c-max", type=_positive_float, default=16.0)
        p.add_argument("--c-steps", type=_positive_int, default=32)

    p = sub.add_parser("entropy-scan", help="entropy-vs-query-norm sweep as CSV")
    common(p)
    p.add_argument("--n-dirs", type=_positive_int, default=64)
    p.set_defaults(run=cmd_entropy_scan)

    p = sub.add_parser("equiv-check", help="quadratic vs re-associated evaluator deviation")
    common(p)
    p.set_defaults(run=cmd_equiv_check)

    p = sub.add_parser("grad-check", help="analytic vs finite-difference Jacobians")
    common(p)
    p.set_defaults(run=cmd_grad_check)

    p = sub.add_parser("bench", help="wall-clock scaling sweep as CSV")
    common(p)
    p.add_argument("--n-grid", default="1024,2048,4096,8192,16384")
    p.add_argument("--evaluators", default=None,
                   help=f"comma list from {','.join(EVALUATORS)}")
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--quad-cap", type=_positive_int, default=DEFAULT_QUAD_CAP)
    p.set_defaults(run=cmd_bench)

    p = sub.add_parser("block-demo", help="gated block forward pass as CSV")
    common(p)
    p.set_defaults(run=cmd_block_demo)

    p = sub.add_parser("verify-theorems", help="PASS/FAIL battery of the core properties")
    common(p)
    p.set_defaults(run=cmd_verify_theorems)

    return parser


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.run(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
