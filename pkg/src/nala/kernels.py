"""Feature maps for kernelized attention.

The norm-aware map ("nala") factors a vector into norm and direction and
treats the two parts differently:

* query magnitudes are the direction entries raised elementwise to a
  norm-dependent power p(n) = lambda * (0.5 + tanh(n)), so a longer query
  sharpens the weighting of its own coordinates;
* key magnitudes are the raw entries raised to the fixed power lambda, so
  key length survives the map;
* signs are carried separately: each direction entry is squashed into
  (-pi/4, pi/4) and encoded as a [cos; sin] pair, doubling the feature
  dimension.  The product of two such features is, per coordinate, a
  cosine of an angle difference in (-pi/2, pi/2) - strictly positive, and
  smallest when the coordinates have opposite signs.

The baseline maps (relu, one_plus_elu, fixed_power) are the usual
elementwise non-negative maps, kept here as experimental controls.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import WrongKernel, ZeroVector
from .linalg import ZERO_NORM_FLOOR


class KernelKind(str, enum.Enum):
    NALA = "nala"
    RELU = "relu"
    ONE_PLUS_ELU = "one_plus_elu"
    FIXED_POWER = "fixed_power"


#: Kernel kinds whose feature map is positively homogeneous: phi(c*x) is a
#: positive scalar multiple of phi(x) for c > 0, so normalized attention
#: weights cannot depend on the input's scale.
HOMOGENEOUS_KINDS = frozenset({KernelKind.RELU, KernelKind.FIXED_POWER})


@dataclass(frozen=True)
class KernelSpec:
    """Kernel identity plus hyperparameters.

    lambda controls both the key exponent and the range of the query
    exponent p(n) in [0.5*lambda, 1.5*lambda).  squash_scale is the angle
    bound of the sign encoding; it must not exceed pi/4 or the per-
    coordinate cosine factors could turn negative.  mag_floor guards the
    query power against vanishing direction entries: magnitudes below it
    map to exactly zero.
    """

    kind: KernelKind = KernelKind.NALA
    lam: float = 2.0
    squash_scale: float = math.pi / 4
    mag_floor: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not 0.0 < self.squash_scale <= math.pi / 4:
            raise ValueError(
                f"squash_scale must lie in (0, pi/4], got {self.squash_scale}"
            )
        if self.mag_floor < 0:
            raise ValueError(f"mag_floor must be nonnegative, got {self.mag_floor}")


def power_exponent(norm, spec: KernelSpec):
    """Query exponent p(n) = lambda * (0.5 + tanh(n)), in [0.5*lambda, 1.5*lambda)."""
    return spec.lam * (0.5 + np.tanh(norm))


def direction_squash(u, scale: float = math.pi / 4):
    """Odd, bounded squash scale * tanh(u) mapping R into (-scale, scale)."""
    return scale * np.tanh(u)


def _norm_direction(x):
    """Rowwise (norm, direction) over the last axis; rejects zero rows."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norms <= ZERO_NORM_FLOOR):
        raise ZeroVector("feature map requires non-zero vectors")
    return norms, x / norms


#: Rows per chunk in the 2-D fast path, sized so every temporary stays
#: cache-resident; the maps are the hot path of all O(N) evaluators.
_MAP_BLOCK_ELEMS = 32768


def _fill_trig_blocks(out, d, magnitudes, angles):
    """Write [magnitudes * cos(angles); magnitudes * sin(angles)] into out."""
    cos_blk, sin_blk = out[..., :d], out[..., d:]
    np.cos(angles, out=cos_blk)
    np.sin(angles, out=sin_blk)
    cos_blk *= magnitudes
    sin_blk *= magnitudes
    return out


def _phi_q_into(x, spec: KernelSpec, out):
    norms, u = _norm_direction(x)
    p = power_exponent(norms, spec)
    d = u.shape[-1]
    angles = np.tanh(u)
    angles *= spec.squash_scale
    m = np.abs(u, out=u)  # direction no longer needed past this point
    m[m < spec.mag_floor] = 0.0
    np.power(m, p, out=m)
    return _fill_trig_blocks(out, d, m, angles)


def _phi_k_into(x, spec: KernelSpec, out):
    _, u = _norm_direction(x)
    d = u.shape[-1]
    angles = np.tanh(u, out=u)
    angles *= spec.squash_scale
    m = np.abs(x)
    np.power(m, spec.lam, out=m)
    return _fill_trig_blocks(out, d, m, angles)


def _chunked_map(fill, x, spec: KernelSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[-1]
    out = np.empty(x.shape[:-1] + (2 * d,))
    if x.ndim != 2 or x.shape[0] * d <= _MAP_BLOCK_ELEMS:
        return fill(x, spec, out)
    step = max(1, _MAP_BLOCK_ELEMS // d)
    for i in range(0, x.shape[0], step):
        fill(x[i : i + step], spec, out[i : i + step])
    return out


def phi_q(q, spec: KernelSpec) -> np.ndarray:
    """Norm-aware query feature map; input (..., d) -> output (..., 2d).

    With (n, u) the norm-direction split of a query row, the magnitude of
    coordinate i is |u_i| ** p(n) (zero when |u_i| falls below the floor),
    and its angle is the squashed direction entry.
    """
    if spec.kind is not KernelKind.NALA:
        raise WrongKernel(f"phi_q requires the nala kernel, got {spec.kind.value}")
    return _chunked_map(_phi_q_into, q, spec)


def phi_k(k, spec: KernelSpec) -> np.ndarray:
    """Norm-aware key feature map; input (..., d) -> output (..., 2d).

    Magnitudes are |k_i| ** lambda on the raw entries, so the key's length
    scales the whole feature (phi_k(c*k) = c**lambda * phi_k(k) for c > 0);
    angles come from the direction entries exactly as in phi_q.
    """
    if spec.kind is not KernelKind.NALA:
        raise WrongKernel(f"phi_k requires the nala kernel, got {spec.kind.value}")
    return _chunked_map(_phi_k_into, k, spec)


def baseline_map(x, spec: KernelSpec) -> np.ndarray:
    """Elementwise non-negative control maps; input (..., d) -> output (..., d)."""
    x = np.asarray(x, dtype=np.float64)
    if spec.kind is KernelKind.RELU:
        return np.maximum(x, 0.0)
    if spec.kind is KernelKind.ONE_PLUS_ELU:
        return np.where(x >= 0, 1.0 + x, np.exp(x))
    if spec.kind is KernelKind.FIXED_POWER:
        return np.maximum(x, 0.0) ** spec.lam
    raise WrongKernel(f"baseline_map does not handle kernel {spec.kind.value}")


def feature_maps(spec: KernelSpec):
    """(query map, key map) pair selected by the spec's kind."""
    if spec.kind is KernelKind.NALA:
        return (lambda x: phi_q(x, spec)), (lambda x: phi_k(x, spec))
    fn = lambda x: baseline_map(x, spec)  # noqa: E731 - shared by both sides
    return fn, fn


def pairwise_similarity(q, k, spec: KernelSpec) -> float:
    """Kernel similarity map_q(q) . map_k(k); nonnegative for every kind."""
    map_q, map_k = feature_maps(spec)
    return float(map_q(np.asarray(q, dtype=np.float64)) @ map_k(np.asarray(k, dtype=np.float64)))
