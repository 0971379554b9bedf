"""
Simplex domains and projective metrics.

Real and complex Hilbert metrics on the simplex, the Poincaré-based metric
d_P, and their two-dimensional reductions to the right half-plane H.
Every function is pure; point objects are immutable after construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from src.errors import ArgumentError, DomainError, SamplingError
from src.numerics_config import NumericsConfig

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], Sequence[complex], np.ndarray]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _normalized(coords: np.ndarray) -> np.ndarray:
    total = coords.sum()
    gap = abs(total - 1.0)
    if gap > NumericsConfig.get_tolerance("renormalize"):
        raise DomainError(f"coordinates sum to {total!r}, not 1")
    if gap > 0:
        coords = coords / total
    return coords


@dataclass(frozen=True, eq=False)
class RealSimplexPoint:
    """
    Point of the standard simplex W (or its interior W° when interior=True).

    Sums within the renormalize tolerance of 1 are rescaled; larger gaps are rejected.
    """
    coords: np.ndarray
    interior: bool = True

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 1 or coords.size == 0:
            raise DomainError("simplex point must be a non-empty vector")
        if not np.all(np.isfinite(coords)):
            raise DomainError("simplex point has non-finite coordinates")
        if self.interior and np.any(coords <= 0):
            raise DomainError(f"interior simplex point needs positive coordinates, got {coords.tolist()}")
        if np.any(coords < 0):
            raise DomainError(f"simplex point needs nonnegative coordinates, got {coords.tolist()}")
        object.__setattr__(self, "coords", _freeze(_normalized(coords)))

    def __len__(self) -> int:
        return self.coords.size

    def to_complex(self) -> "ComplexSimplexPoint":
        return ComplexSimplexPoint(self.coords.astype(complex))


@dataclass(frozen=True, eq=False)
class ComplexSimplexPoint:
    """Complex vector whose coordinates sum to 1 (the complex simplex W_C)."""
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=complex)
        if coords.ndim != 1 or coords.size == 0:
            raise DomainError("simplex point must be a non-empty vector")
        if not np.all(np.isfinite(coords)):
            raise DomainError("simplex point has non-finite coordinates")
        object.__setattr__(self, "coords", _freeze(_normalized(coords)))

    def __len__(self) -> int:
        return self.coords.size

    @property
    def in_positive_half(self) -> bool:
        """Membership in W_C^+ (every real part positive)."""
        return bool(np.all(self.coords.real > 0))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coords.imag == 0))


@dataclass(frozen=True)
class HalfPlanePoint:
    """Point of the open right half-plane H, the ratio x/y of a 2-dim simplex point."""
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not np.isfinite(z.real) or not np.isfinite(z.imag):
            raise DomainError("half-plane point must be finite")
        if z.real <= 0:
            raise DomainError(f"half-plane point needs Re(z) > 0, got {z}")
        object.__setattr__(self, "z", z)


def _real_coords(x) -> np.ndarray:
    if isinstance(x, RealSimplexPoint):
        return x.coords
    if isinstance(x, ComplexSimplexPoint):
        if not x.is_real:
            raise DomainError("expected a real simplex point")
        return x.coords.real
    return np.asarray(x, dtype=float)


def _complex_coords(x) -> np.ndarray:
    if isinstance(x, (RealSimplexPoint, ComplexSimplexPoint)):
        return x.coords.astype(complex)
    return np.asarray(x, dtype=complex)


def _half_plane_value(z) -> complex:
    if isinstance(z, HalfPlanePoint):
        return z.z
    return HalfPlanePoint(z).z


def hilbert_real(v, w) -> float:
    """
    Real Hilbert projective metric d_H(w, v) on the simplex interior.

    Args:
        v: Interior point (RealSimplexPoint or positive vector; scale is irrelevant)
        w: Interior point of the same dimension

    Returns:
        max over (i, j) of log((w_i/w_j)/(v_i/v_j))
    """
    v = _real_coords(v)
    w = _real_coords(w)
    if v.shape != w.shape or v.ndim != 1:
        raise DomainError(f"dimension mismatch: {v.shape} vs {w.shape}")
    if np.any(v <= 0) or np.any(w <= 0):
        raise DomainError("Hilbert metric needs strictly positive coordinates")
    # The pairwise max equals the spread of the log-ratio vector.
    c = np.log(w) - np.log(v)
    return float(np.max(c) - np.min(c))


def hilbert_restricted(v, w, support) -> float:
    """
    Hilbert metric restricted to a coordinate support.

    Used for images of zero-column matrices, which vanish off the support.
    Vectors may be unnormalized; entries off the support are ignored.
    """
    v = np.asarray(_real_coords(v), dtype=float)
    w = np.asarray(_real_coords(w), dtype=float)
    idx = np.asarray(support)
    if idx.dtype == bool:
        idx = np.flatnonzero(idx)
    if idx.size == 0:
        raise DomainError("empty support")
    return hilbert_real(v[idx], w[idx])


def _check_positive_half(x: np.ndarray, label: str) -> None:
    if np.any(x.real <= 0):
        raise DomainError(f"{label} is outside W_C^+ (nonpositive real part): {x.tolist()}")


def hilbert_complex(v, w) -> float:
    """
    Complex Hilbert metric on W_C^+.

    Args:
        v: ComplexSimplexPoint (or complex vector) with positive real parts
        w: Same dimension

    Returns:
        max over (i, j) of |Log((w_i/w_j)/(v_i/v_j))| with the principal branch

    Raises:
        DomainError: Nonpositive real part, or a ratio on the negative real axis
    """
    v = _complex_coords(v)
    w = _complex_coords(w)
    if v.shape != w.shape or v.ndim != 1:
        raise DomainError(f"dimension mismatch: {v.shape} vs {w.shape}")
    _check_positive_half(v, "v")
    _check_positive_half(w, "w")
    if np.all(v.imag == 0) and np.all(w.imag == 0):
        return hilbert_real(v.real, w.real)

    # q[i, j] = (w_i v_j) / (w_j v_i)
    q = np.outer(w, v) / np.outer(v, w)
    if np.any((q.imag == 0) & (q.real < 0)):
        raise DomainError("coordinate ratio lies on the negative real axis")
    return float(np.max(np.abs(np.log(q))))


def hilbert_complex_batch(V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """
    Row-wise hilbert_complex for (N, B) arrays.

    Rows outside the domain yield NaN instead of raising, so certifiers can
    count them.
    """
    V = np.asarray(V, dtype=complex)
    W = np.asarray(W, dtype=complex)
    if V.shape != W.shape or V.ndim != 2:
        raise DomainError(f"expected matching (N, B) arrays, got {V.shape} and {W.shape}")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (W[:, :, None] * V[:, None, :]) / (W[:, None, :] * V[:, :, None])
        out = np.max(np.abs(np.log(q)), axis=(1, 2))
    bad = (np.any(V.real <= 0, axis=1) | np.any(W.real <= 0, axis=1)
           | np.any((q.imag == 0) & (q.real < 0), axis=(1, 2))
           | ~np.isfinite(out))
    out[bad] = np.nan
    return out


def poincare_dp(v, w) -> float:
    """
    Poincaré-based complex metric d_P(w, v).

    Pairs range over i != j; in dimension 2 the value equals
    halfplane_poincare(w_2/w_1, v_2/v_1).

    Raises:
        DomainError: A pair has 2 Re(conj(w_i) w_j) <= 0 or the min-term is not positive
    """
    v = _complex_coords(v)
    w = _complex_coords(w)
    if v.shape != w.shape or v.ndim != 1 or v.size < 2:
        raise DomainError("d_P needs two vectors of equal dimension >= 2")
    _check_positive_half(v, "v")
    _check_positive_half(w, "w")

    i, j = np.where(~np.eye(v.size, dtype=bool))
    sym = np.abs(np.conj(w[i]) * v[j] + np.conj(w[j]) * v[i])
    alt = np.abs(w[i] * v[j] - w[j] * v[i])
    den = 2.0 * np.real(np.conj(w[i]) * w[j])
    if np.any(den <= 0):
        k = int(np.argmin(den))
        logger.warning(f"⚠️  d_P denominator degenerates at pair ({i[k]}, {j[k]})")
        raise DomainError(f"d_P undefined: 2Re(conj(w_{i[k]}) w_{j[k]}) = {den[k]!r}")

    upper = (sym + alt) / den
    lower = (sym - alt) / den
    k = int(np.argmin(lower))
    if lower[k] <= 0:
        logger.warning(f"⚠️  d_P min-term degenerates at pair ({i[k]}, {j[k]}): {lower[k]!r}")
        raise DomainError(f"d_P undefined: min-term {lower[k]!r} at pair ({i[k]}, {j[k]})")
    return float(np.log(np.max(upper) / lower[k]))


def log_distance(z1: complex, z2: complex) -> float:
    """|log z1 - log z2| with the principal logarithm (z off the closed negative axis)."""
    z1 = complex(z1)
    z2 = complex(z2)
    for z in (z1, z2):
        if z == 0 or (z.imag == 0 and z.real < 0):
            raise DomainError(f"principal log undefined at {z}")
    return float(abs(np.log(z1) - np.log(z2)))


def halfplane_hilbert(z1, z2) -> float:
    """d_H(z1, z2) = |Log(z1/z2)| on the right half-plane."""
    z1 = _half_plane_value(z1)
    z2 = _half_plane_value(z2)
    # Log is additive on H, so Log(z1/z2) = Log z1 - Log z2.
    return log_distance(z1, z2)


def halfplane_poincare(z1, z2) -> float:
    """Poincaré metric on H: log((|z1 + conj z2| + |z1 - z2|) / (|z1 + conj z2| - |z1 - z2|))."""
    z1 = _half_plane_value(z1)
    z2 = _half_plane_value(z2)
    s = abs(z1 + z2.conjugate())
    d = abs(z1 - z2)
    den = s - d
    if den <= 0:
        raise DomainError(f"Poincaré denominator is {den!r} for z1={z1}, z2={z2}")
    return float(np.log1p(2.0 * d / den))


def delta_witness(v, delta: float) -> Optional[RealSimplexPoint]:
    """
    Look for u in W° with |v_i - u_i| <= delta u_i for every i.

    The normalized real part of v is tried first. Otherwise each coordinate's
    admissible u_i form an interval [lo_i, hi_i] (roots of
    |v_i - w|^2 = delta^2 w^2), and a witness exists iff
    sum lo <= 1 <= sum hi; it is built at the same relative position in every
    interval. A returned witness proves v lies in W_C°(delta); None proves
    nothing beyond rounding.

    Args:
        v: Complex (or real) simplex point
        delta: Relative radius in (0, 1)

    Returns:
        The witness, or None if no admissible point exists
    """
    if not 0 < delta < 1:
        raise ArgumentError(f"delta must lie in (0, 1), got {delta}")
    coords = _complex_coords(v)
    re = coords.real
    if np.any(re <= 0):
        return None
    if np.all(coords.imag == 0):
        return RealSimplexPoint(re / re.sum())

    def admissible(u: np.ndarray) -> bool:
        slack = 1.0 + NumericsConfig.get_tolerance("simplex_sum")
        return bool(np.all(u > 0) and np.all(np.abs(coords - u) <= delta * u * slack))

    u = re / re.sum()
    if admissible(u):
        return RealSimplexPoint(u)

    scale = 1.0 - delta * delta
    disc = re * re - scale * np.abs(coords) ** 2
    if np.any(disc < 0):
        logger.debug(f"no witness: a coordinate's argument exceeds asin({delta})")
        return None
    root = np.sqrt(disc)
    lo, hi = (re - root) / scale, (re + root) / scale
    lo_sum, hi_sum = float(lo.sum()), float(hi.sum())
    if not lo_sum <= 1.0 <= hi_sum:
        return None
    t = 0.5 if hi_sum == lo_sum else (1.0 - lo_sum) / (hi_sum - lo_sum)
    u = lo + t * (hi - lo)
    u = u / u.sum()
    return RealSimplexPoint(u) if admissible(u) else None


def uniform_disk(rng: np.random.Generator, shape) -> np.ndarray:
    """Complex samples uniform in the closed unit disk."""
    radius = np.sqrt(rng.random(shape))
    angle = 2.0 * np.pi * rng.random(shape)
    return radius * np.exp(1j * angle)


def sample_delta_neighborhood(dim: int, delta: float, rng: np.random.Generator, n: int,
                              max_rounds: Optional[int] = None):
    """
    Draw n points of W_C°(delta) together with their real witnesses.

    u ~ Dirichlet(1), v = u (1 + delta zeta) with zeta uniform in the unit disk,
    renormalized; rows whose renormalized v breaks the delta-bound are redrawn.

    Returns:
        (U, V): real (n, dim) witnesses and complex (n, dim) samples
    """
    if not 0 < delta < 1:
        raise ArgumentError(f"delta must lie in (0, 1), got {delta}")
    if dim < 1 or n < 0:
        raise ArgumentError("dimension must be positive and n nonnegative")
    max_rounds = NumericsConfig.get_default("sampling_attempts") if max_rounds is None else int(max_rounds)
    if max_rounds < 1:
        raise ArgumentError(f"max_rounds must be at least 1, got {max_rounds}")

    U = np.empty((n, dim))
    V = np.empty((n, dim), dtype=complex)
    pending = np.arange(n)
    for _ in range(max_rounds):
        if pending.size == 0:
            return U, V
        u = rng.dirichlet(np.ones(dim), size=pending.size)
        v = u * (1.0 + delta * uniform_disk(rng, u.shape))
        v = v / v.sum(axis=1, keepdims=True)
        ok = np.all(np.abs(v - u) <= delta * u, axis=1)
        U[pending[ok]] = u[ok]
        V[pending[ok]] = v[ok]
        logger.debug(f"W_C°({delta}) sampler rejected {int((~ok).sum())} of {pending.size}")
        pending = pending[~ok]
    if pending.size:
        raise SamplingError(f"could not draw {pending.size} points of W_C°({delta}) in {max_rounds} rounds")
    return U, V
