"""
Positive-matrix actions on the simplex and their contraction coefficients.

Covers the projective action f_T(w) = wT / (wT 1), the Birkhoff coefficient,
the 2x2 reduction to fractional linear maps of the right half-plane H, and a
numerical supremum search for the infinitesimal contraction coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from src.errors import ArgumentError, DomainError, SingularityError
from src.metrics import ComplexSimplexPoint, HalfPlanePoint, RealSimplexPoint
from src.numerics_config import NumericsConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PositiveMatrix:
    """
    Square real matrix whose columns are each strictly positive or identically zero.

    At least one column must be strictly positive.
    """
    entries: np.ndarray

    def __post_init__(self):
        t = np.array(self.entries, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise DomainError(f"expected a non-empty square matrix, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise DomainError("matrix has non-finite entries")
        positive = np.all(t > 0, axis=0)
        zero = np.all(t == 0, axis=0)
        if not np.all(positive | zero):
            bad = np.flatnonzero(~(positive | zero)).tolist()
            raise DomainError(f"columns {bad} are neither strictly positive nor identically zero")
        if not positive.any():
            raise DomainError("matrix has no strictly positive column")
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def column_mask(self) -> np.ndarray:
        """True for strictly positive columns, False for zero columns."""
        return np.all(self.entries > 0, axis=0)


@dataclass(frozen=True, eq=False)
class ComplexMatrix:
    """Square complex matrix, typically a perturbation of a PositiveMatrix."""
    entries: np.ndarray

    def __post_init__(self):
        t = np.array(self.entries, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise DomainError(f"expected a non-empty square matrix, got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise DomainError("matrix has non-finite entries")
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    def in_ball(self, center: Union[PositiveMatrix, np.ndarray], r: float) -> bool:
        """Membership in B_T(r): |t_ij - t̂_ij| <= r for all i, j."""
        t = center.entries if isinstance(center, PositiveMatrix) else np.asarray(center, dtype=float)
        if t.shape != self.entries.shape:
            return False
        return bool(np.all(np.abs(self.entries - t) <= r))


def _matrix_entries(T) -> np.ndarray:
    if isinstance(T, (PositiveMatrix, ComplexMatrix)):
        return T.entries
    arr = np.asarray(T)
    if np.iscomplexobj(arr):
        return ComplexMatrix(arr).entries
    return PositiveMatrix(arr).entries


@dataclass(frozen=True)
class MobiusMap:
    """
    Fractional linear map f(z) = (a z + b) / (c z + d) on ratios z = x/y.

    Nondegenerate (ad - bc != 0) unless built through MobiusMap.constant.
    """
    a: complex
    b: complex
    c: complex
    d: complex
    degenerate_ok: bool = field(default=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if not self.degenerate_ok and self.det == 0:
            raise DomainError(f"degenerate Möbius map: ad - bc = 0 for {self}")
        if self.c == 0 and self.d == 0:
            raise DomainError("Möbius map with c = d = 0 has no finite values")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def is_positive_real(self) -> bool:
        coeffs = np.array([self.a, self.b, self.c, self.d])
        return bool(np.all(coeffs.imag == 0) and np.all(coeffs.real > 0))

    @classmethod
    def from_matrix(cls, T, action: str = "column", degenerate_ok: bool = False) -> "MobiusMap":
        """
        Build the map induced by a 2x2 matrix.

        Args:
            T: 2x2 real or complex matrix
            action: "column" reads f(z) = (t11 z + t12)/(t21 z + t22), the convention
                under which the perturbed-matrix coefficients are quoted;
                "row" reads f(z) = (t11 z + t21)/(t12 z + t22), which is the ratio
                x'/y' of the row action (x, y) T used by induced_map
            degenerate_ok: Accept ad - bc = 0 (a constant map)

        Returns:
            The induced MobiusMap
        """
        t = np.asarray(T.entries if isinstance(T, (PositiveMatrix, ComplexMatrix)) else T, dtype=complex)
        if t.shape != (2, 2):
            raise DomainError(f"Möbius reduction needs a 2x2 matrix, got {t.shape}")
        if action == "column":
            return cls(t[0, 0], t[0, 1], t[1, 0], t[1, 1], degenerate_ok=degenerate_ok)
        if action == "row":
            return cls(t[0, 0], t[1, 0], t[0, 1], t[1, 1], degenerate_ok=degenerate_ok)
        raise ArgumentError(f"unknown action '{action}' (expected 'column' or 'row')")

    @classmethod
    def constant(cls, value: complex) -> "MobiusMap":
        return cls(0, value, 0, 1, degenerate_ok=True)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)


def induced_map(T, w):
    """
    Projective action f_T(w) = wT / (wT 1).

    Args:
        T: PositiveMatrix, ComplexMatrix or array
        w: Simplex point (real or complex) or vector

    Returns:
        RealSimplexPoint for real inputs, ComplexSimplexPoint otherwise

    Raises:
        SingularityError: wT 1 = 0
    """
    t = _matrix_entries(T)
    if isinstance(w, (RealSimplexPoint, ComplexSimplexPoint)):
        vec = w.coords
    else:
        vec = np.asarray(w)
    if vec.shape != (t.shape[0],):
        raise DomainError(f"vector of length {vec.shape} does not match matrix {t.shape}")
    out = vec @ t
    norm = out.sum()
    if abs(norm) == 0:
        raise SingularityError("zero normalizer wT1 = 0")
    image = out / norm
    if np.iscomplexobj(image) and np.any(image.imag != 0):
        return ComplexSimplexPoint(image)
    return RealSimplexPoint(np.real(image), interior=False)


def _positive_columns(T) -> np.ndarray:
    t = T.entries if isinstance(T, PositiveMatrix) else PositiveMatrix(T).entries
    return t[:, np.all(t > 0, axis=0)]


def _phi_tensor(t: np.ndarray) -> np.ndarray:
    # ratio[i, j, k, l] = t_ik t_jl / (t_jk t_il)
    num = t[:, None, :, None] * t[None, :, None, :]
    den = t[None, :, :, None] * t[:, None, None, :]
    return num / den


def birkhoff_phi(T) -> float:
    """min over (i, j, k, l) of t_ik t_jl / (t_jk t_il), k and l over positive columns."""
    return float(np.min(_phi_tensor(_positive_columns(T))))


def birkhoff_phi_argmin(T) -> Tuple[int, int, int, int]:
    """Index tuple (i, j, k, l) attaining birkhoff_phi, with k, l as original column indices."""
    t = T.entries if isinstance(T, PositiveMatrix) else PositiveMatrix(T).entries
    cols = np.flatnonzero(np.all(t > 0, axis=0))
    ratio = _phi_tensor(t[:, cols])
    i, j, k, l = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    return int(i), int(j), int(cols[k]), int(cols[l])


def birkhoff_tau(T) -> float:
    """Birkhoff contraction coefficient (1 - sqrt(phi)) / (1 + sqrt(phi))."""
    root = np.sqrt(birkhoff_phi(T))
    return float((1.0 - root) / (1.0 + root))


def mobius_apply(m: MobiusMap, z: complex) -> complex:
    den = m.c * z + m.d
    if den == 0:
        raise SingularityError(f"pole of {m} at z = {z}")
    return (m.a * z + m.b) / den


def mobius_derivative(m: MobiusMap, z: complex) -> complex:
    den = m.c * z + m.d
    if den == 0:
        raise SingularityError(f"pole of {m} at z = {z}")
    return m.det / (den * den)


def halfplane_tau_closed_form(m: MobiusMap) -> float:
    """
    Contraction coefficient of a positive map on all of H.

    (1 - bc/ad)/(1 + bc/ad) when ad >= bc, else (1 - ad/bc)/(1 + ad/bc).
    """
    if not m.is_positive_real:
        raise DomainError(f"closed form needs positive real a, b, c, d; got {m}")
    ad = (m.a * m.d).real
    bc = (m.b * m.c).real
    if ad >= bc:
        ratio = bc / ad
    else:
        ratio = ad / bc
    return float((1.0 - ratio) / (1.0 + ratio))


def _z_value(z) -> complex:
    return z.z if isinstance(z, HalfPlanePoint) else complex(z)


def infinitesimal_dH_coeff(m: MobiusMap, z) -> float:
    """
    |z f'(z) / f(z)|, the pointwise Lipschitz factor for the complex Hilbert metric on H.

    z may sit on the imaginary axis, where the supremum of positive maps lives.
    """
    z = _z_value(z)
    den = m.c * z + m.d
    num = m.a * z + m.b
    if den == 0:
        raise SingularityError(f"pole of {m} at z = {z}")
    if num == 0:
        if m.det == 0:
            return 0.0
        raise SingularityError(f"f vanishes at z = {z}")
    return float(abs(z * m.det / (den * num)))


def infinitesimal_dP_coeff(m: MobiusMap, z) -> float:
    """|Re(z) f'(z) / Re(f(z))|, the pointwise Lipschitz factor for the Poincaré metric."""
    z = _z_value(z)
    fz = mobius_apply(m, z)
    if fz.real == 0:
        raise SingularityError(f"Re f(z) = 0 at z = {z}")
    return float(abs(z.real * mobius_derivative(m, z) / fz.real))


def _coeff_grid(m: MobiusMap, Z: np.ndarray, which: str) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized coefficient values and images f(Z); invalid points give -inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        den = m.c * Z + m.d
        num = m.a * Z + m.b
        fz = num / den
        if which == "dH":
            vals = np.abs(Z * m.det / (den * num))
        else:
            vals = np.abs(Z.real * (m.det / (den * den)) / fz.real)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    return vals, fz


@dataclass
class SupremumEstimate:
    value: float
    argmax: complex
    s: float
    theta: float
    h_preserving: bool
    evaluations: int


def sup_coeff_search(m: MobiusMap, which: str = "dH", budget: Optional[int] = None,
                     s_max: Optional[float] = None) -> SupremumEstimate:
    """
    Estimate the sup over H of an infinitesimal coefficient.

    Evaluates a log-polar grid z = exp(s + i theta) with theta clustered toward
    the imaginary axis, then polishes the best grid points with bounded Nelder-Mead.

    Args:
        m: Möbius map
        which: "dH" or "dP"
        budget: Grid points per axis (budget x budget evaluations)
        s_max: Half-width of the log-modulus range

    Returns:
        SupremumEstimate with the value, the maximizing z and the H-preservation flag

    Raises:
        DomainError: The map has a pole in the closed half-plane Re z >= 0
    """
    if which not in ("dH", "dP"):
        raise ArgumentError(f"which must be 'dH' or 'dP', got {which!r}")
    budget = NumericsConfig.get_default("grid_size") if budget is None else int(budget)
    s_max = NumericsConfig.get_default("s_max") if s_max is None else float(s_max)
    if budget < 2:
        raise ArgumentError(f"budget must be at least 2, got {budget}")

    if m.det == 0:
        return SupremumEstimate(0.0, complex(1.0), 0.0, 0.0, True, 0)

    # a pole on the imaginary axis is a boundary singularity of the coefficient
    if m.c != 0:
        pole = -m.d / m.c
        if pole.real >= 0:
            raise DomainError(f"pole at {pole} in the closure of H: map is not H-preserving")

    theta_max = 0.5 * np.pi * (1.0 - 1e-9)
    s_axis = np.linspace(-s_max, s_max, budget)
    theta_axis = theta_max * np.sin(np.linspace(-0.5 * np.pi, 0.5 * np.pi, budget))
    S, TH = np.meshgrid(s_axis, theta_axis, indexing="ij")
    Z = np.exp(S + 1j * TH)

    vals, fz = _coeff_grid(m, Z, which)
    h_preserving = bool(np.all(fz.real > 0))
    if not h_preserving:
        logger.warning(f"⚠️  {m} maps sampled points of H outside H; sup estimate is not a contraction bound")

    def objective(p):
        v, _ = _coeff_grid(m, np.array([np.exp(p[0] + 1j * p[1])]), which)
        return -float(v[0])

    flat = vals.ravel()
    starts = np.argsort(flat)[::-1][:4]
    best_val = float(flat[starts[0]])
    best_p = np.array([S.ravel()[starts[0]], TH.ravel()[starts[0]]])
    evaluations = flat.size
    bounds = [(-s_max, s_max), (-theta_max, theta_max)]
    for idx in starts:
        x0 = np.array([S.ravel()[idx], TH.ravel()[idx]])
        res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
        evaluations += int(res.nfev)
        if np.isfinite(res.fun) and -res.fun > best_val:
            best_val = -float(res.fun)
            best_p = np.asarray(res.x, dtype=float)

    argmax = complex(np.exp(best_p[0] + 1j * best_p[1]))
    logger.debug(f"sup {which} of {m}: {best_val:.12g} at s={best_p[0]:.6g}, theta={best_p[1]:.6g}")
    return SupremumEstimate(value=best_val, argmax=argmax, s=float(best_p[0]), theta=float(best_p[1]),
                            h_preserving=h_preserving, evaluations=evaluations)


def sup_coeff_numerical(m: MobiusMap, which: str = "dH", budget: Optional[int] = None) -> float:
    """Numerical sup over H of the chosen infinitesimal coefficient."""
    return sup_coeff_search(m, which, budget).value
