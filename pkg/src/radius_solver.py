"""
Certified lower bounds on the radius of analyticity of the BSC entropy rate.

A tuple (r, R, rho) that satisfies the three relaxed feasibility conditions
certifies analyticity of eps -> H(Z^eps) on |eps - eps0| < r. Tuples are
found by seeded random search followed by bisection on r.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from src.errors import ArgumentError, HmpError, ModelError
from src.hmm import BscHmm, bsc_conditionals_raw, bsc_map
from src.metrics import uniform_disk
from src.numerics_config import NumericsConfig
from src.parallel import chunk_ranges, chunk_rng, derive_seed, ordered_map

logger = logging.getLogger(__name__)

LOG_R_FLOOR = 1e-6
LOG_SMALL_R_FLOOR = 1e-9
SAMPLING_SHRINK = 0.99
BISECTION_STEPS = 80


@dataclass(frozen=True, eq=False)
class RadiusProblem:
    """Binary chain pi and base crossover epsilon0 under the standing assumptions."""
    pi: np.ndarray
    epsilon0: float

    def __post_init__(self):
        model = BscHmm(self.pi, self.epsilon0)
        model.check_standing_assumptions()
        object.__setattr__(self, "pi", model.pi)
        object.__setattr__(self, "epsilon0", model.epsilon)

    @classmethod
    def symmetric(cls, p: float, epsilon0: float) -> "RadiusProblem":
        return cls(np.array([[p, 1.0 - p], [1.0 - p, p]]), epsilon0)

    @property
    def det(self) -> float:
        pi = self.pi
        return float(pi[0, 0] * pi[1, 1] - pi[1, 0] * pi[0, 1])

    @property
    def r_cap(self) -> float:
        return min(self.epsilon0, 1.0 - self.epsilon0)


@dataclass(frozen=True)
class SInterval:
    s1: float
    s2: float


@dataclass(frozen=True)
class FeasibleTuple:
    r: float
    R: float
    rho: float


@dataclass
class RadiusSearchResult:
    epsilon0: float
    pi: List[List[float]]
    budget: int
    seed: int
    samples_tried: int
    feasible_samples: int
    r_max: float
    best: Optional[FeasibleTuple] = None
    raw_r: Optional[float] = None
    diagnostic: Optional[str] = None


@dataclass
class SweepRow:
    p: float
    r_max: float
    R: Optional[float]
    rho: Optional[float]
    samples_tried: int
    diagnostic: Optional[str] = None


@dataclass
class ConditionCheck:
    worst: float
    bound: float
    violations: int


@dataclass
class ConditionsReport:
    samples: int
    seed: int
    feasible: FeasibleTuple
    contraction: ConditionCheck
    displacement: ConditionCheck
    conditionals: ConditionCheck
    checks: Dict[str, int] = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return self.contraction.violations + self.displacement.violations + self.conditionals.violations


# ---------------------------------------------------------------------------
# Interval and conditions
# ---------------------------------------------------------------------------

def s_interval(p: RadiusProblem) -> SInterval:
    """
    Hull [S1, S2] of the images of [0, inf] under both observation maps at eps0.

    For det(pi) > 0, S1 = eps0 pi_10 / ((1 - eps0) pi_11) and
    S2 = (1 - eps0) pi_00 / (eps0 pi_01); otherwise the two row ratios swap roles.
    """
    pi, e = p.pi, p.epsilon0
    if p.det > 0:
        s1 = (e * pi[1, 0]) / ((1 - e) * pi[1, 1])
        s2 = ((1 - e) * pi[0, 0]) / (e * pi[0, 1])
    else:
        s1 = (e * pi[0, 0]) / ((1 - e) * pi[0, 1])
        s2 = ((1 - e) * pi[1, 0]) / (e * pi[1, 1])
    return SInterval(float(s1), float(s2))


def cond1_lhs(p: RadiusProblem, R):
    """Mean-value bound on the log-contraction of the observation maps over Omega(R)."""
    s = s_interval(p)
    R = np.asarray(R, dtype=float)
    if np.any(R < 0) or np.any(R >= s.s1):
        raise ArgumentError(f"R must lie in [0, S1={s.s1!r})")
    pi = p.pi
    den = (pi[0, 1] * pi[0, 0] * (s.s1 - R) + pi[0, 1] * pi[1, 0] + pi[1, 1] * pi[0, 0]
           + pi[1, 1] * pi[1, 0] / (s.s2 + R))
    out = abs(p.det) / den
    return float(out) if out.ndim == 0 else out


def cond1(p: RadiusProblem, R: float, rho: float) -> bool:
    lhs = cond1_lhs(p, R)
    return bool(0 < lhs <= rho)


def cond2_lhs(epsilon0: float, r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= epsilon0) or np.any(r >= 1 - epsilon0):
        raise ArgumentError(f"r must lie in [0, min(eps0, 1 - eps0)) for eps0={epsilon0!r}")
    out = r / (epsilon0 - r) + r / (1 - epsilon0 - r)
    return float(out) if out.ndim == 0 else out


def cond2_rhs(R, rho, s2: float):
    return (np.asarray(R) / (s2 + np.asarray(R))) * (1 - np.asarray(rho))


def cond2(epsilon0: float, r: float, R: float, rho: float, s2: float) -> bool:
    lhs = cond2_lhs(epsilon0, r)
    return bool(0 < lhs <= cond2_rhs(R, rho, s2))


def max_r_for_cond2(epsilon0: float, R, rho, s2: float):
    """
    Largest r with r/(eps0 - r) + r/(1 - eps0 - r) <= C, C = (R/(S2 + R))(1 - rho).

    Root of (2 + C) r^2 - (1 + C) r + C eps0 (1 - eps0) = 0.
    """
    C = np.asarray(cond2_rhs(R, rho, s2), dtype=float)
    C = np.maximum(C, 0.0)
    ab = epsilon0 * (1 - epsilon0)
    disc = (1 + C) ** 2 - 4 * (2 + C) * C * ab
    root = ((1 + C) - np.sqrt(np.maximum(disc, 0.0))) / (2 * (2 + C))
    return float(root) if root.ndim == 0 else root


def cond3_lhs(p: RadiusProblem, r, R):
    """Bound on |r0| + |r1| over Omega(R) and the r-disk around eps0, exactly as printed."""
    s = s_interval(p)
    e = p.epsilon0
    r = np.asarray(r, dtype=float)
    R = np.asarray(R, dtype=float)
    if np.any(R < 0) or np.any(R >= s.s1 + 1):
        raise ArgumentError(f"R must lie in [0, S1 + 1 = {s.s1 + 1!r})")
    if np.any(r < 0) or np.any(r >= p.r_cap):
        raise ArgumentError(f"r must lie in [0, {p.r_cap!r})")
    pi = p.pi
    hi, lo = 1 - e + r, e + r
    first = ((hi * pi[0, 0] + lo * pi[0, 1]) * (s.s2 + R) + (hi * pi[1, 0] + lo * pi[1, 1])) / (s.s1 - R + 1)
    second = ((lo * pi[0, 0] + hi * pi[0, 1]) * (s.s2 + R) + (lo * pi[1, 0] + hi * pi[1, 1])) / (s.s1 - R + 1)
    out = first + second
    return float(out) if out.ndim == 0 else out


def cond3(p: RadiusProblem, r: float, R: float, rho: float) -> bool:
    lhs = cond3_lhs(p, r, R)
    return bool(0 < lhs <= 1.0 / rho)


def verify_tuple(p: RadiusProblem, t: FeasibleTuple) -> bool:
    """Domain constraints plus all three relaxed conditions."""
    s = s_interval(p)
    if not (0 < t.r < p.r_cap and 0 < t.R < s.s1 and 0 < t.rho < 1):
        return False
    try:
        return (cond1(p, t.R, t.rho)
                and cond2(p.epsilon0, t.r, t.R, t.rho, s.s2)
                and cond3(p, t.r, t.R, t.rho))
    except ArgumentError:
        return False


def necessary_condition_gap(p: RadiusProblem) -> float:
    """
    (S1 + 1)/(S2 + 1) - cond1_lhs(R=0).

    Negative values mean no tuple can exist: cond1 needs rho >= cond1_lhs(R) while
    cond3 needs rho <= 1/cond3_lhs(r, R), and both bounds are tightest at r = R = 0.
    """
    s = s_interval(p)
    return (s.s1 + 1) / (s.s2 + 1) - cond1_lhs(p, 0.0)


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def _feasible_mask(p: RadiusProblem, s: SInterval, r, R, rho, lhs1) -> np.ndarray:
    ok = (lhs1 > 0) & (lhs1 <= rho) & (rho < 1) & (r > 0) & (r < p.r_cap) & (R > 0) & (R < s.s1)
    lhs2 = cond2_lhs(p.epsilon0, np.where(ok, r, 0.0))
    lhs3 = cond3_lhs(p, np.where(ok, r, 0.0), np.where(ok, R, 0.0))
    rhs2 = cond2_rhs(R, rho, s.s2)
    with np.errstate(divide="ignore"):
        return ok & (lhs2 > 0) & (lhs2 <= rhs2) & (lhs3 > 0) & (lhs3 <= 1.0 / rho)


def _refine_r(p: RadiusProblem, s: SInterval, r, R, rho, lhs1) -> np.ndarray:
    """Push each feasible r up to the boundary with (R, rho) fixed; conditions are monotone in r."""
    cap = p.r_cap * (1 - 1e-12)
    hi = np.minimum(max_r_for_cond2(p.epsilon0, R, rho, s.s2), cap)
    hi = np.maximum(hi, r)
    lo = r.copy()
    ok_hi = _feasible_mask(p, s, hi, R, rho, lhs1)
    lo = np.where(ok_hi, hi, lo)
    active = ~ok_hi
    for _ in range(BISECTION_STEPS):
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        ok = _feasible_mask(p, s, mid, R, rho, lhs1)
        lo = np.where(active & ok, mid, lo)
        hi = np.where(active & ~ok, mid, hi)
    return lo


def _sample_chunk(p: RadiusProblem, s: SInterval, seed: int, index: int, n: int) -> Dict[str, Any]:
    u = chunk_rng(seed, 8, index).random((n, 3))
    R_hi = SAMPLING_SHRINK * s.s1
    R_lo = min(LOG_R_FLOOR, 0.5 * R_hi)
    R = np.exp(math.log(R_lo) + u[:, 0] * (math.log(R_hi) - math.log(R_lo)))
    lhs1 = cond1_lhs(p, R)
    rho = lhs1 + u[:, 1] * (1.0 - lhs1)
    r_hi = SAMPLING_SHRINK * p.r_cap
    r = np.exp(math.log(LOG_SMALL_R_FLOOR) + u[:, 2] * (math.log(r_hi) - math.log(LOG_SMALL_R_FLOOR)))

    feasible = _feasible_mask(p, s, r, R, rho, lhs1)
    if not feasible.any():
        return {"count": 0, "best": None}
    idx = np.flatnonzero(feasible)
    refined = _refine_r(p, s, r[idx], R[idx], rho[idx], lhs1[idx])
    k = int(np.argmax(refined))  # lowest index among ties
    return {
        "count": int(idx.size),
        "best": (float(refined[k]), float(R[idx[k]]), float(rho[idx[k]]), float(r[idx[k]])),
    }


def max_radius_search(p: RadiusProblem, budget: int, seed: Optional[int] = None,
                      workers: int = 1) -> RadiusSearchResult:
    """
    Random (r, R, rho) search with bisection refinement.

    R is log-uniform in (1e-6, 0.99 S1), rho uniform in (cond1_lhs(R), 1) and r
    log-uniform in (1e-9, 0.99 min(eps0, 1 - eps0)). Every feasible sample is
    refined, so a larger budget never lowers r_max.

    Returns:
        RadiusSearchResult; r_max = 0 with a diagnostic when nothing is feasible
    """
    if int(budget) != budget or budget < 1:
        raise ArgumentError(f"budget must be a positive integer, got {budget}")
    budget = int(budget)
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    s = s_interval(p)

    chunks = chunk_ranges(budget, NumericsConfig.get_default("chunk_size"))
    parts = ordered_map(lambda c: _sample_chunk(p, s, seed, c[0], c[2] - c[1]), chunks, workers)

    result = RadiusSearchResult(epsilon0=p.epsilon0, pi=p.pi.tolist(), budget=budget, seed=seed,
                                samples_tried=budget, feasible_samples=sum(c["count"] for c in parts),
                                r_max=0.0)
    candidates = [c["best"] for c in parts if c["best"] is not None]
    if not candidates:
        gap = necessary_condition_gap(p)
        if gap < 0:
            result.diagnostic = (f"infeasible: cond1 needs rho >= {cond1_lhs(p, 0.0):.6g} but cond3 "
                                 f"needs rho <= {(s.s1 + 1) / (s.s2 + 1):.6g} even at r = R = 0")
        else:
            result.diagnostic = f"no feasible tuple among {budget} samples"
        logger.warning(f"⚠️  r_max = 0 for eps0={p.epsilon0}: {result.diagnostic}")
        return result

    r_best, R_best, rho_best, raw = max(candidates, key=lambda c: c[0])
    t = FeasibleTuple(r=r_best, R=R_best, rho=rho_best)
    for _ in range(64):
        if verify_tuple(p, t):
            break
        t = FeasibleTuple(r=t.r * (1 - 1e-12), R=t.R, rho=t.rho)
    if not verify_tuple(p, t):
        t = FeasibleTuple(r=raw, R=R_best, rho=rho_best)

    result.best = t
    result.r_max = t.r
    result.raw_r = raw
    logger.info(f"✅ r_max = {t.r:.15g} (R={t.R:.6g}, rho={t.rho:.6g}) from {result.feasible_samples} feasible samples")
    return result


def sweep(p_values: Sequence[float], epsilon0: float, budget: int, seed: Optional[int] = None,
          workers: int = 1) -> List[SweepRow]:
    """
    max_radius_search along the symmetric family pi_00 = pi_11 = p.

    Points that violate the standing assumptions (p = 1/2) become r_max = 0 rows.
    """
    if int(budget) != budget or budget < 1:
        raise ArgumentError(f"budget must be a positive integer, got {budget}")
    seed = NumericsConfig.get_seed() if seed is None else int(seed)

    def run_point(item) -> SweepRow:
        index, pv = item
        try:
            problem = RadiusProblem.symmetric(pv, epsilon0)
            res = max_radius_search(problem, budget, derive_seed(seed, index))
        except HmpError as e:
            logger.warning(f"⚠️  p={pv}: {e}")
            return SweepRow(p=pv, r_max=0.0, R=None, rho=None, samples_tried=0, diagnostic=str(e))
        best = res.best
        return SweepRow(p=pv, r_max=res.r_max, R=best.R if best else None, rho=best.rho if best else None,
                        samples_tried=res.samples_tried, diagnostic=res.diagnostic)

    logger.info(f"🚀 Sweep over {len(p_values)} points at eps0={epsilon0}, budget={budget}")
    return ordered_map(run_point, list(enumerate(float(v) for v in p_values)), workers)


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else "%.15g" % value


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = ["p,r_max,R,rho,samples_tried"]
    for row in rows:
        lines.append(",".join([_fmt(row.p), _fmt(row.r_max), _fmt(row.R), _fmt(row.rho), str(row.samples_tried)]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Sampled un-relaxed conditions
# ---------------------------------------------------------------------------

def _log_g(pi: np.ndarray, x):
    return np.log((pi[0, 0] * x + pi[1, 0]) / (pi[0, 1] * x + pi[1, 1]))


def cond2_displacement(p: RadiusProblem, x, epsilon, z: int):
    """|log f^eps_z(x) - log f^eps0_z(x)|."""
    return np.abs(np.log(bsc_map(p.pi, epsilon, z, x)) - np.log(bsc_map(p.pi, p.epsilon0, z, x)))


def verify_conditions_sampled(p: RadiusProblem, t: FeasibleTuple, samples: int,
                              seed: Optional[int] = None) -> ConditionsReport:
    """
    Monte Carlo check of the un-relaxed conditions behind a tuple.

    Omega(R) is sampled as s + R zeta with s uniform in [S1, S2] and zeta in the
    unit disk; eps is sampled as eps0 + r zeta.
    """
    s = s_interval(p)
    if not (0 <= t.r < p.r_cap and 0 < t.R < s.s1 and 0 < t.rho < 1):
        raise ArgumentError(f"tuple {t} is outside the condition domain")
    if samples < 1:
        raise ArgumentError(f"samples must be positive, got {samples}")
    seed = NumericsConfig.get_seed() if seed is None else int(seed)
    rng = chunk_rng(seed, 10)

    def omega(n):
        return rng.uniform(s.s1, s.s2, n) + t.R * uniform_disk(rng, n)

    x, y = omega(samples), omega(samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(_log_g(p.pi, x) - _log_g(p.pi, y)) / np.abs(np.log(x) - np.log(y))
    ratio = ratio[np.isfinite(ratio)]
    contraction = ConditionCheck(worst=float(ratio.max(initial=0.0)), bound=t.rho,
                                 violations=int(np.sum(ratio > t.rho)))

    xs = rng.uniform(s.s1, s.s2, samples)
    eps = p.epsilon0 + t.r * uniform_disk(rng, samples)
    bound2 = float(cond2_rhs(t.R, t.rho, s.s2))
    disp = np.maximum(cond2_displacement(p, xs, eps, 0), cond2_displacement(p, xs, eps, 1))
    displacement = ConditionCheck(worst=float(disp.max()), bound=bound2,
                                  violations=int(np.sum(disp > bound2 * (1 + 1e-12))))

    xc = omega(samples)
    eps = p.epsilon0 + t.r * uniform_disk(rng, samples)
    r0, r1 = bsc_conditionals_raw(p.pi, eps, xc)
    total = np.abs(r0) + np.abs(r1)
    conditionals = ConditionCheck(worst=float(total.max()), bound=1.0 / t.rho,
                                  violations=int(np.sum(total > 1.0 / t.rho)))

    report = ConditionsReport(samples=samples, seed=seed, feasible=t, contraction=contraction,
                              displacement=displacement, conditionals=conditionals,
                              checks={"contraction_pairs": int(ratio.size)})
    status = "✅" if report.violations == 0 else "❌"
    logger.info(f"{status} sampled conditions: {report.violations} violations over {samples} samples")
    return report


def load_problem(source: Union[str, Path, Mapping[str, Any]]) -> RadiusProblem:
    """Load {"pi", "epsilon0"} (or {"p", "epsilon0"} for the symmetric family) from JSON."""
    if isinstance(source, Mapping):
        data = dict(source)
    else:
        try:
            data = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ModelError(f"cannot read problem file {source}: {e}") from e
    keys = set(data) if isinstance(data, dict) else set()
    if keys == {"pi", "epsilon0"}:
        return RadiusProblem(np.asarray(data["pi"], dtype=float), float(data["epsilon0"]))
    if keys == {"p", "epsilon0"}:
        return RadiusProblem.symmetric(float(data["p"]), float(data["epsilon0"]))
    raise ModelError(f"problem JSON needs keys {{pi, epsilon0}} or {{p, epsilon0}}, got {sorted(keys)}")
