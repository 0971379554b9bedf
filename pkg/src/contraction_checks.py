"""
Numerical certifiers for contraction of positive and perturbed matrix actions.

Monte Carlo checks split their trials into fixed-size chunks seeded by
(seed, chunk index); chunk results are merged in index order, so reports are
identical for any worker count.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from src.errors import ArgumentError, DomainError, NumericalError
from src.matrix_action import (
    ComplexMatrix,
    PositiveMatrix,
    birkhoff_phi_argmin,
    birkhoff_tau,
    induced_map,
)
from src.metrics import (
    ComplexSimplexPoint,
    hilbert_complex,
    hilbert_complex_batch,
    hilbert_restricted,
    sample_delta_neighborhood,
    uniform_disk,
)
from src.numerics_config import NumericsConfig
from src.parallel import chunk_ranges, chunk_rng, ordered_map

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ContractionReport:
    trials: int
    r: float
    delta: float
    seed: int
    tau_real: float
    max_ratio: float
    violations: int
    domain_violations: int
    argmax: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.domain_violations == 0


@dataclass
class InvarianceReport:
    samples: int
    delta: float
    seed: int
    passed: int
    failed: int
    worst_relative_displacement: Optional[float] = None
    first_failure: Optional[Dict[str, Any]] = None


@dataclass
class LemmaReport:
    name: str
    instances: int
    violations: int
    max_violation: float
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class BirkhoffSupResult:
    ratio: float
    tau: float
    v: np.ndarray
    w: np.ndarray


@dataclass
class BirkhoffBoundReport:
    pairs: int
    seed: int
    tau: float
    max_ratio: float
    violations: int
    oracle_ratio: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


# ---------------------------------------------------------------------------
# Pointwise ratio
# ---------------------------------------------------------------------------

def empirical_contraction_ratio(T_hat, x, y) -> float:
    """
    d_H(f_T̂(x), f_T̂(y)) / d_H(x, y) under the complex Hilbert metric.

    Raises:
        ArgumentError: x equals y
        DomainError: An image leaves W_C^+ (contraction-domain violation)
    """
    xc = x.coords if isinstance(x, ComplexSimplexPoint) else np.asarray(getattr(x, "coords", x), dtype=complex)
    yc = y.coords if isinstance(y, ComplexSimplexPoint) else np.asarray(getattr(y, "coords", y), dtype=complex)
    if np.array_equal(xc, yc):
        raise ArgumentError("contraction ratio needs x != y")
    base = hilbert_complex(xc, yc)
    if base == 0:
        raise ArgumentError("x and y are projectively equal")
    fx = induced_map(T_hat, xc)
    fy = induced_map(T_hat, yc)
    for label, img in (("f(x)", fx), ("f(y)", fy)):
        if np.any(np.asarray(img.coords).real <= 0):
            raise DomainError(f"contraction-domain violation: {label} left W_C^+")
    return hilbert_complex(fx.coords, fy.coords) / base


def _act_rows(T: np.ndarray, X: np.ndarray) -> np.ndarray:
    if T.ndim == 2:
        out = X @ T
    else:
        out = np.einsum("nb,nbc->nc", X, T)
    with np.errstate(divide="ignore", invalid="ignore"):
        return out / out.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Perturbed-matrix contraction
# ---------------------------------------------------------------------------

def certify_contraction(T, r: float, delta: float, trials: int, seed: Optional[int] = None,
                        workers: int = 1) -> ContractionReport:
    """
    Monte Carlo certification that f_T̂ contracts W_C°(delta) for T̂ in B_T(r).

    Each trial draws T̂ = T + r zeta (zeta uniform in the unit disk entrywise)
    and x, y in W_C°(delta), and records d_H(f x, f y) / d_H(x, y).
    """
    t = T.entries if isinstance(T, PositiveMatrix) else PositiveMatrix(T).entries
    if not np.all(t > 0):
        raise DomainError("contraction certification needs a strictly positive matrix")
    if r < 0:
        raise ArgumentError(f"r must be nonnegative, got {r}")
    if not 0 < delta < 1:
        raise ArgumentError(f"delta must lie in (0, 1), got {delta}")
    if trials < 1:
        raise ArgumentError(f"trials must be positive, got {trials}")
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    dim = t.shape[0]

    def run_chunk(chunk: Tuple[int, int, int]):
        index, start, stop = chunk
        rng = chunk_rng(seed, 1, index)
        n = stop - start
        T_hat = t[None, :, :] + r * uniform_disk(rng, (n, dim, dim))
        _, X = sample_delta_neighborhood(dim, delta, rng, n)
        _, Y = sample_delta_neighborhood(dim, delta, rng, n)
        base = hilbert_complex_batch(X, Y)
        image = hilbert_complex_batch(_act_rows(T_hat, X), _act_rows(T_hat, Y))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = image / base
        invalid = ~np.isfinite(ratio)
        ratio_valid = np.where(invalid, -np.inf, ratio)
        k = int(np.argmax(ratio_valid))
        return {
            "max": float(ratio_valid[k]),
            "argmax": start + k,
            "sample": {"T_hat": T_hat[k], "x": X[k], "y": Y[k]},
            "violations": int(np.sum(ratio_valid >= 1.0)),
            "domain": int(invalid.sum()),
        }

    chunks = chunk_ranges(trials, NumericsConfig.get_default("chunk_size"))
    logger.info(f"🚀 Certifying contraction: B={dim}, r={r:g}, delta={delta:g}, trials={trials}, chunks={len(chunks)}")
    parts = ordered_map(run_chunk, chunks, workers)

    best = max(parts, key=lambda p: p["max"])  # first maximal chunk wins ties
    report = ContractionReport(
        trials=trials, r=r, delta=delta, seed=seed, tau_real=birkhoff_tau(t),
        max_ratio=best["max"],
        violations=sum(p["violations"] for p in parts),
        domain_violations=sum(p["domain"] for p in parts),
        argmax={"trial": best["argmax"], **best["sample"]},
    )
    status = "✅" if report.passed else "❌"
    logger.info(f"{status} max ratio {report.max_ratio:.12g}, violations {report.violations}, "
                f"domain violations {report.domain_violations}")
    return report


def certify_invariance(T_hat, delta: float, samples: int, seed: Optional[int] = None,
                       workers: int = 1, T=None) -> InvarianceReport:
    """
    Check f_T̂(W_C°(delta)) ⊂ W_C°(delta) on sampled points.

    Images are tested with delta_witness; a failure means no admissible
    witness exists up to rounding.

    Args:
        T_hat: Complex (or real) matrix
        delta: Relative radius in (0, 1)
        samples: Number of sampled points
        seed: Root seed
        workers: Thread count
        T: Optional underlying real matrix; enables the relative displacement
            max_i |f_T̂(v)_i - f_T(u)_i| / f_T(u)_i

    Returns:
        InvarianceReport with pass/fail counts
    """
    if not 0 < delta < 1:
        raise ArgumentError(f"delta must lie in (0, 1), got {delta}")
    if samples < 1:
        raise ArgumentError(f"samples must be positive, got {samples}")
    t_hat = T_hat.entries if isinstance(T_hat, (ComplexMatrix, PositiveMatrix)) else ComplexMatrix(T_hat).entries
    t_real = None
    if T is not None:
        t_real = T.entries if isinstance(T, PositiveMatrix) else PositiveMatrix(T).entries
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    dim = t_hat.shape[0]

    def run_chunk(chunk):
        index, start, stop = chunk
        rng = chunk_rng(seed, 2, index)
        U, V = sample_delta_neighborhood(dim, delta, rng, stop - start)
        img = _act_rows(t_hat.astype(complex), V.astype(complex))
        re = img.real
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = re / re.sum(axis=1, keepdims=True)
            ok = np.all(re > 0, axis=1) & np.all(np.abs(img - cand) <= delta * cand, axis=1)
        ok &= np.all(np.isfinite(img), axis=1)
        out = {"passed": int(ok.sum()), "failed": int((~ok).sum()), "first_failure": None, "disp": None}
        if (~ok).any():
            k = int(np.flatnonzero(~ok)[0])
            out["first_failure"] = {"sample": start + k, "v": V[k], "image": img[k]}
        if t_real is not None:
            ref = _act_rows(t_real, U)
            out["disp"] = float(np.max(np.abs(img - ref) / ref))
        return out

    parts = ordered_map(run_chunk, chunk_ranges(samples, NumericsConfig.get_default("chunk_size")), workers)
    failures = [p["first_failure"] for p in parts if p["first_failure"] is not None]
    report = InvarianceReport(
        samples=samples, delta=delta, seed=seed,
        passed=sum(p["passed"] for p in parts),
        failed=sum(p["failed"] for p in parts),
        worst_relative_displacement=max(p["disp"] for p in parts) if t_real is not None else None,
        first_failure=failures[0] if failures else None,
    )
    logger.info(f"📄 Invariance check: {report.passed} passed, {report.failed} without witness")
    return report


# ---------------------------------------------------------------------------
# Birkhoff supremum oracle
# ---------------------------------------------------------------------------

def _support_ratio(t: np.ndarray, support: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    base = hilbert_restricted(v, w, np.arange(v.size))
    if base == 0:
        return 0.0
    return hilbert_restricted(v @ t, w @ t, support) / base


def empirical_birkhoff_sup(T, restarts: int = 4, seed: Optional[int] = None) -> BirkhoffSupResult:
    """
    Near-extremal pair for the real Hilbert contraction ratio of T.

    Starts from the index tuple attaining phi(T): mass on rows i, j in the
    ratio sqrt(bd/ac) and a tiny perturbation of that ratio, then polishes with
    Nelder-Mead over log-coordinates.
    """
    pm = T if isinstance(T, PositiveMatrix) else PositiveMatrix(T)
    t = pm.entries
    dim = pm.size
    support = np.flatnonzero(pm.column_mask)
    tau = birkhoff_tau(pm)
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    if dim == 1 or tau == 0:
        one = np.ones(dim) / dim
        return BirkhoffSupResult(ratio=0.0, tau=tau, v=one, w=one)

    i, j, k, l = birkhoff_phi_argmin(pm)
    a, b, c, d = t[i, k], t[j, k], t[i, l], t[j, l]
    z_star = math.sqrt(b * d / (a * c))
    eta, h = 1e-9, 1e-4
    v0 = np.full(dim, eta)
    w0 = np.full(dim, eta)
    v0[i], v0[j] = z_star, 1.0
    w0[i], w0[j] = z_star * math.exp(h), 1.0

    def objective(p):
        v = np.exp(p[:dim] - p[:dim].max())
        w = np.exp(p[dim:] - p[dim:].max())
        try:
            return -_support_ratio(t, support, v, w)
        except (DomainError, FloatingPointError):
            return 0.0

    rng = chunk_rng(seed, 3)
    start = np.concatenate([np.log(v0), np.log(w0)])
    best_p, best_val = start, -objective(start)
    for attempt in range(max(1, restarts)):
        x0 = start if attempt == 0 else start + 1e-3 * rng.standard_normal(start.size)
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000 * dim})
        if -res.fun > best_val:
            best_val, best_p = -float(res.fun), res.x

    v = np.exp(best_p[:dim] - best_p[:dim].max())
    w = np.exp(best_p[dim:] - best_p[dim:].max())
    logger.debug(f"Birkhoff sup oracle: ratio {best_val:.12g} vs tau {tau:.12g}")
    return BirkhoffSupResult(ratio=best_val, tau=tau, v=v / v.sum(), w=w / w.sum())


def certify_birkhoff_bound(T, pairs: int, seed: Optional[int] = None, workers: int = 1,
                           with_oracle: bool = True) -> BirkhoffBoundReport:
    """
    Check d_H(f_T v, f_T w) <= tau(T) d_H(v, w) on Dirichlet-sampled interior pairs.

    Args:
        T: PositiveMatrix or array (zero columns allowed)
        pairs: Number of sampled (v, w) pairs
        seed: Root seed
        workers: Thread count
        with_oracle: Also run empirical_birkhoff_sup to show tau is nearly attained

    Returns:
        BirkhoffBoundReport; violations use the metric_axioms tolerance
    """
    pm = T if isinstance(T, PositiveMatrix) else PositiveMatrix(T)
    if pairs < 1:
        raise ArgumentError(f"pairs must be positive, got {pairs}")
    t = pm.entries
    support = np.flatnonzero(pm.column_mask)
    tau = birkhoff_tau(pm)
    tol = NumericsConfig.get_tolerance("metric_axioms")
    seed = NumericsConfig.get_seed() if seed is None else int(seed)

    def run_chunk(chunk):
        index, start, stop = chunk
        rng = chunk_rng(seed, 9, index)
        n = stop - start
        V = rng.dirichlet(np.ones(pm.size), size=n)
        W = rng.dirichlet(np.ones(pm.size), size=n)
        base = np.ptp(np.log(W) - np.log(V), axis=1)
        image = np.ptp(np.log((W @ t)[:, support]) - np.log((V @ t)[:, support]), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(base > 0, image / base, 0.0)
        return float(ratio.max()), int(np.sum(image > tau * base + tol))

    parts = ordered_map(run_chunk, chunk_ranges(pairs, NumericsConfig.get_default("chunk_size")), workers)
    report = BirkhoffBoundReport(pairs=pairs, seed=seed, tau=tau,
                                 max_ratio=max(p[0] for p in parts),
                                 violations=sum(p[1] for p in parts))
    if with_oracle:
        report.oracle_ratio = empirical_birkhoff_sup(pm, seed=seed).ratio
    status = "✅" if report.passed else "❌"
    logger.info(f"{status} Birkhoff bound: max ratio {report.max_ratio:.12g} <= tau {tau:.12g}, "
                f"{report.violations} violations over {pairs} pairs")
    return report


# ---------------------------------------------------------------------------
# Lemma oracles
# ---------------------------------------------------------------------------

def lemma_maxone_check(zs: Sequence[complex], z: complex, t: float, samples: int = 1000,
                       seed: Optional[int] = None) -> LemmaReport:
    """
    For nonnegative t_1..t_n summing to t, |sum t_i z_i + z| never exceeds max_i |t z_i + z|.

    Samples Dirichlet weights plus every vertex and reports the largest excess.
    """
    zs = np.asarray(zs, dtype=complex)
    if zs.ndim != 1 or zs.size < 2:
        raise ArgumentError("lemma needs at least two points")
    if not t > 0:
        raise ArgumentError(f"t must be positive, got {t}")
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    rng = chunk_rng(seed, 4)

    vertex_max = float(np.max(np.abs(t * zs + z)))
    weights = np.vstack([np.eye(zs.size), rng.dirichlet(np.ones(zs.size), size=max(0, samples))])
    values = np.abs(t * weights @ zs + z)
    excess = values - vertex_max
    tol = NumericsConfig.get_tolerance("lemma_violation") * max(1.0, vertex_max)
    return LemmaReport(
        name="maxone", instances=int(weights.shape[0]),
        violations=int(np.sum(excess > tol)),
        max_violation=float(max(0.0, excess.max())),
        details={"vertex_max": vertex_max, "sample_max": float(values.max())},
    )


def _aA_terms(a: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, float]:
    D = a * x / np.sum(a * x) - x / np.sum(x)
    ratio = a.min() / a.max()
    bound = (1.0 - math.sqrt(ratio)) / (1.0 + math.sqrt(ratio))
    return D, bound


def lemma_aA_check(a: Sequence[float], x: Sequence[float]) -> Tuple[float, float]:
    """
    Positive mass of D_n = a_n x_n / sum(a x) - x_n / sum(x) and its bound.

    Returns:
        (lhs, bound) with bound = (1 - sqrt(a_min/a_max)) / (1 + sqrt(a_min/a_max))

    Raises:
        DomainError: Nonpositive entries
        NumericalError: Positive and negative masses disagree beyond tolerance
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.shape != x.shape or a.ndim != 1 or a.size == 0:
        raise DomainError("a and x must be vectors of equal length")
    if np.any(a <= 0) or np.any(x <= 0):
        raise DomainError("lemma needs strictly positive a and x")
    D, bound = _aA_terms(a, x)
    positive = float(np.sum(D[D >= 0]))
    negative = float(np.sum(np.abs(D[D < 0])))
    if abs(positive - negative) > NumericsConfig.get_tolerance("mass_balance"):
        raise NumericalError(f"mass balance failed: {positive!r} vs {negative!r}")
    return positive, float(bound)


def lemma_maxone_suite(instances: int, seed: Optional[int] = None, workers: int = 1,
                       max_points: int = 8) -> LemmaReport:
    """Random instances of the convex-hull lemma, one convex combination each."""
    seed = NumericsConfig.get_seed() if seed is None else int(seed)

    def run_chunk(chunk):
        index, start, stop = chunk
        rng = chunk_rng(seed, 5, index)
        n = stop - start
        counts = rng.integers(2, max_points + 1, size=n)
        mask = np.arange(max_points)[None, :] < counts[:, None]
        zs = rng.standard_normal((n, max_points)) + 1j * rng.standard_normal((n, max_points))
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        t = rng.uniform(0.1, 5.0, size=n)
        g = np.where(mask, rng.exponential(size=(n, max_points)), 0.0)
        weights = t[:, None] * g / g.sum(axis=1, keepdims=True)
        vertex = np.where(mask, np.abs(t[:, None] * zs + z[:, None]), -np.inf).max(axis=1)
        combo = np.abs(np.sum(weights * zs, axis=1) + z)
        excess = combo - vertex
        tol = NumericsConfig.get_tolerance("lemma_violation") * np.maximum(1.0, vertex)
        return int(np.sum(excess > tol)), float(max(0.0, excess.max()))

    parts = ordered_map(run_chunk, chunk_ranges(instances, NumericsConfig.get_default("chunk_size")), workers)
    return LemmaReport(name="maxone", instances=instances,
                       violations=sum(p[0] for p in parts),
                       max_violation=max(p[1] for p in parts))


def lemma_aA_suite(instances: int, seed: Optional[int] = None, workers: int = 1,
                   max_dim: int = 8) -> LemmaReport:
    """
    Random instances of the D_n mass bound with dimension up to max_dim.

    An instance violates if it exceeds the bound or breaks mass balance.
    """
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    balance_tol = NumericsConfig.get_tolerance("mass_balance")

    def run_chunk(chunk):
        index, start, stop = chunk
        rng = chunk_rng(seed, 6, index)
        n = stop - start
        dims = rng.integers(2, max_dim + 1, size=n)
        mask = np.arange(max_dim)[None, :] < dims[:, None]
        a = np.exp(rng.uniform(-3.0, 3.0, size=(n, max_dim)))
        x = np.where(mask, np.exp(rng.uniform(-3.0, 3.0, size=(n, max_dim))), 0.0)
        D = a * x / np.sum(a * x, axis=1, keepdims=True) - x / np.sum(x, axis=1, keepdims=True)
        lhs = np.sum(np.where(D >= 0, D, 0.0), axis=1)
        neg = np.sum(np.where(D < 0, -D, 0.0), axis=1)
        ratio = np.where(mask, a, np.inf).min(axis=1) / np.where(mask, a, -np.inf).max(axis=1)
        bound = (1.0 - np.sqrt(ratio)) / (1.0 + np.sqrt(ratio))
        excess = lhs - bound
        imbalance = np.abs(lhs - neg)
        unbalanced = imbalance > balance_tol
        failed = (excess > NumericsConfig.get_tolerance("lemma_violation")) | unbalanced
        return int(np.sum(failed)), float(max(0.0, excess.max())), int(np.sum(unbalanced))

    parts = ordered_map(run_chunk, chunk_ranges(instances, NumericsConfig.get_default("chunk_size")), workers)
    return LemmaReport(name="aA", instances=instances,
                       violations=sum(p[0] for p in parts),
                       max_violation=max(p[1] for p in parts),
                       details={"mass_balance_failures": sum(p[2] for p in parts)})
