"""Analytic Jacobians of the norm-aware feature maps, certified by finite differences.

The query map composes four pieces - the norm, the direction, the
norm-dependent exponent, and the angle squash - so its Jacobian is
assembled by the chain rule:

    du/dq = (I - u u^T) / n          with (n, u) the norm-direction split,
    dp/dq = lambda * sech^2(n) u^T,
    dm_i  = m_i [ p * d|u_i| / |u_i| + ln|u_i| * dp ],
    da_i  = scale * sech^2(u_i) du_i,

and the cos/sin blocks follow by the product rule.  The key map is the
same on the angle side with a diagonal lambda |k_i|^(lambda-1) sign(k_i)
magnitude path.

Points with direction entries too close to zero are rejected instead of
clamped: |u|^p has a kink at zero and the analytic formula should stay
honest rather than silently smooth over it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearSingular
from .kernels import KernelSpec, direction_squash, power_exponent
from .linalg import as_vector, nd_decompose

#: Direction/key entries with magnitude below this are too near the |.|^p kink.
SINGULAR_FLOOR = 1e-3


@dataclass
class Jacobian:
    matrix: np.ndarray  # out_dim x in_dim
    point: np.ndarray


def finite_diff_jacobian(f, x, step_scale: float = 1e-5) -> Jacobian:
    """Central-difference Jacobian, step h_j = step_scale * max(1, |x_j|)."""
    x = as_vector(x)
    cols = []
    for j in range(x.size):
        h = step_scale * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return Jacobian(np.stack(cols, axis=1), x)


def _sech2(x):
    return 1.0 / np.cosh(x) ** 2


def _angle_path(u, n, scale):
    """Angles, their u-derivatives, and du/dq for a unit direction u = q/n."""
    du = (np.eye(u.size) - np.outer(u, u)) / n
    a = direction_squash(u, scale)
    da = (scale * _sech2(u))[:, None] * du
    return a, da, du


def _assemble(m, dm, a, da):
    top = dm * np.cos(a)[:, None] - (m * np.sin(a))[:, None] * da
    bottom = dm * np.sin(a)[:, None] + (m * np.cos(a))[:, None] * da
    return np.vstack([top, bottom])


def jac_phi_q(q, spec: KernelSpec) -> Jacobian:
    """Analytic 2d x d Jacobian of the query feature map at q."""
    q = as_vector(q)
    n, u = nd_decompose(q)
    au = np.abs(u)
    if np.any(au < SINGULAR_FLOOR):
        raise NearSingular(
            f"direction entry below {SINGULAR_FLOOR}; resample the point"
        )
    p = float(power_exponent(n, spec))
    dp = spec.lam * _sech2(n) * u  # row: dp/dq_j
    a, da, du = _angle_path(u, n, spec.squash_scale)
    m = au**p
    dm = m[:, None] * (
        np.log(au)[:, None] * dp[None, :] + (p * np.sign(u) / au)[:, None] * du
    )
    return Jacobian(_assemble(m, dm, a, da), q)


def jac_phi_k(k, spec: KernelSpec) -> Jacobian:
    """Analytic 2d x d Jacobian of the key feature map at k."""
    k = as_vector(k)
    if np.any(np.abs(k) < SINGULAR_FLOOR):
        raise NearSingular(f"key entry below {SINGULAR_FLOOR}; resample the point")
    n, u = nd_decompose(k)
    a, da, _ = _angle_path(u, n, spec.squash_scale)
    m = np.abs(k) ** spec.lam
    dm = np.diag(spec.lam * np.sign(k) * np.abs(k) ** (spec.lam - 1.0))
    return Jacobian(_assemble(m, dm, a, da), k)


def max_rel_error(analytic: Jacobian, fd: Jacobian) -> float:
    """Max-norm difference relative to max(1, max-norm of the reference)."""
    ref = np.abs(fd.matrix).max()
    return float(np.abs(analytic.matrix - fd.matrix).max() / max(1.0, ref))
