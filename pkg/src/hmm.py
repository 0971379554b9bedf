"""
Hidden Markov processes: general models, the binary-symmetric-channel case,
the Blackwell filter recursion and entropy rates.

Symbols and states are 0-based. Entropies are in nats.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr

from src.errors import ArgumentError, ModelError, NumericalError, ResourceError, SingularityError
from src.matrix_action import PositiveMatrix
from src.metrics import RealSimplexPoint
from src.numerics_config import NumericsConfig
from src.parallel import chunk_rng, ordered_map

logger = logging.getLogger(__name__)


def _stochastic_matrix(values, label: str) -> np.ndarray:
    m = np.array(values, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ModelError(f"{label} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)) or np.any(m <= 0):
        raise ModelError(f"{label} must be strictly positive")
    tol = NumericsConfig.get_tolerance("stochastic_rows")
    if np.any(np.abs(m.sum(axis=1) - 1.0) > tol):
        raise ModelError(f"{label} rows must sum to 1 (row sums {m.sum(axis=1).tolist()})")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class HmmModel:
    """
    Hidden Markov model: strictly positive transition matrix delta and a
    deterministic output map phi from states to symbols.
    """
    delta: np.ndarray
    phi: Tuple[int, ...]

    def __post_init__(self):
        delta = _stochastic_matrix(self.delta, "delta")
        phi = tuple(int(s) for s in self.phi)
        if len(phi) != delta.shape[0]:
            raise ModelError(f"phi has {len(phi)} entries for {delta.shape[0]} states")
        if any(s < 0 for s in phi):
            raise ModelError("output symbols must be nonnegative integers")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "phi", phi)

    @property
    def n_states(self) -> int:
        return self.delta.shape[0]

    @property
    def n_symbols(self) -> int:
        return max(self.phi) + 1

    def support(self, a: int) -> np.ndarray:
        """I(a): states emitting symbol a."""
        return np.flatnonzero(np.asarray(self.phi) == a)


@dataclass(frozen=True, eq=False)
class BscHmm:
    """Binary Markov chain pi observed through a binary symmetric channel with crossover epsilon."""
    pi: np.ndarray
    epsilon: float

    def __post_init__(self):
        pi = _stochastic_matrix(self.pi, "pi")
        if pi.shape != (2, 2):
            raise ModelError(f"pi must be 2x2, got {pi.shape}")
        eps = float(self.epsilon)
        if not 0 < eps < 1:
            raise ModelError(f"epsilon must lie in (0, 1), got {eps}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "epsilon", eps)

    @property
    def det(self) -> float:
        return float(self.pi[0, 0] * self.pi[1, 1] - self.pi[1, 0] * self.pi[0, 1])

    @property
    def x0(self) -> float:
        """Initial ratio pi_10 / pi_01 from the stationary vector."""
        return float(self.pi[1, 0] / self.pi[0, 1])

    def check_standing_assumptions(self) -> None:
        """Analyticity assumptions: epsilon < 1/2 and det(pi) != 0."""
        if not self.epsilon < 0.5:
            raise ModelError(f"epsilon must be below 1/2, got {self.epsilon}")
        if self.det == 0:
            raise ModelError("det(pi) = 0: the observation maps are constant")

    @classmethod
    def symmetric(cls, p: float, epsilon: float) -> "BscHmm":
        return cls(np.array([[p, 1.0 - p], [1.0 - p, p]]), epsilon)


@dataclass
class FilterState:
    """Filter state: a simplex point in general, the ratio a_i / b_i for the BSC."""
    general: Optional[RealSimplexPoint] = None
    scalar: Optional[float] = None


@dataclass
class FilterRun:
    states: List[FilterState]
    conditionals: np.ndarray

    @property
    def log_probability(self) -> float:
        return float(np.sum(np.log(self.conditionals)))


# ---------------------------------------------------------------------------
# General model
# ---------------------------------------------------------------------------

def delta_a(model: HmmModel, a: int) -> PositiveMatrix:
    """Delta with every column outside I(a) zeroed out."""
    cols = model.support(a)
    if cols.size == 0:
        raise ModelError(f"symbol {a} is never emitted")
    out = np.zeros_like(model.delta)
    out[:, cols] = model.delta[:, cols]
    return PositiveMatrix(out)


def _row(w) -> np.ndarray:
    return w.coords if isinstance(w, RealSimplexPoint) else np.asarray(w)


def r_a(model: HmmModel, a: int, w) -> float:
    """r_a(w) = w Delta_a 1, the probability of emitting a next."""
    cols = model.support(a)
    if cols.size == 0:
        raise ModelError(f"symbol {a} is never emitted")
    value = (_row(w) @ model.delta[:, cols]).sum()
    if value == 0:
        raise SingularityError(f"r_{a}(w) = 0")
    return value


def f_a(model: HmmModel, a: int, w):
    """f_a(w) = w Delta_a / r_a(w); supported on I(a)."""
    row = _row(w) @ delta_a(model, a).entries
    norm = row.sum()
    if norm == 0:
        raise SingularityError(f"r_{a}(w) = 0")
    image = row / norm
    if np.iscomplexobj(image):
        return image
    return RealSimplexPoint(image, interior=False)


def stationary_distribution(delta, max_iter: Optional[int] = None) -> RealSimplexPoint:
    """
    Left Perron vector of a strictly positive row-stochastic matrix by power iteration.

    Raises:
        ArgumentError: max_iter below 1
        NumericalError: L1 residual above the stationary_residual tolerance at the cap
    """
    d = delta.delta if isinstance(delta, HmmModel) else _stochastic_matrix(delta, "delta")
    max_iter = NumericsConfig.get_default("stationary_max_iter") if max_iter is None else int(max_iter)
    if max_iter < 1:
        raise ArgumentError(f"max_iter must be at least 1, got {max_iter}")
    tol = NumericsConfig.get_tolerance("stationary_residual")
    x = np.full(d.shape[0], 1.0 / d.shape[0])
    residual = math.inf
    for _ in range(max_iter):
        nxt = x @ d
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - x).sum())
        x = nxt
        if residual <= tol:
            return RealSimplexPoint(x)
    raise NumericalError(f"power iteration stalled at residual {residual:.3e} after {max_iter} steps")


def filter_run(model, observations: Sequence[int]) -> FilterRun:
    """
    Blackwell filter from the stationary prior.

    Emits p(z_{i+1} | z_1..z_i) = r_{z_{i+1}}(x_i) and x_{i+1} = f_{z_{i+1}}(x_i).
    BscHmm models run the scalar recursion.
    """
    if isinstance(model, BscHmm):
        return bsc_filter_run(model, observations)
    obs = [int(z) for z in observations]
    if not obs:
        raise ArgumentError("observations must be nonempty")
    x = stationary_distribution(model.delta)
    states = [FilterState(general=x)]
    conditionals = []
    for z in obs:
        conditionals.append(r_a(model, z, x))
        x = f_a(model, z, x)
        states.append(FilterState(general=x))
    return FilterRun(states=states, conditionals=np.array(conditionals))


def markov_entropy_rate(delta) -> float:
    """-sum_i pi_i sum_j Delta_ij log Delta_ij for the stationary chain."""
    d = delta.delta if isinstance(delta, HmmModel) else _stochastic_matrix(delta, "delta")
    pi = stationary_distribution(d).coords
    return float(np.sum(pi * entr(d).sum(axis=1)))


# ---------------------------------------------------------------------------
# Binary symmetric channel, scalar system
# ---------------------------------------------------------------------------

def _channel(epsilon) -> Tuple[Any, Any]:
    """(q(0), q(1)) with q(z) = p(z | hidden state 0)."""
    return 1.0 - epsilon, epsilon


def bsc_map(pi: np.ndarray, epsilon, z: int, x):
    """
    f^eps_z(x) for raw (possibly complex or array) epsilon and x.

    Prefactor q(z)/q(1-z) with q(0) = 1 - eps: output 0 means "no flip". The
    opposite labeling (eps/(1-eps) for z = 0) is this map with z and 1 - z swapped.
    """
    q0, q1 = _channel(epsilon)
    prefactor = q0 / q1 if z == 0 else q1 / q0
    return prefactor * (pi[0, 0] * x + pi[1, 0]) / (pi[0, 1] * x + pi[1, 1])


def bsc_conditionals_raw(pi: np.ndarray, epsilon, x):
    """(r0, r1) for raw (possibly complex or array) epsilon and x."""
    e = epsilon
    den = x + 1.0
    r0 = (((1 - e) * pi[0, 0] + e * pi[0, 1]) * x + ((1 - e) * pi[1, 0] + e * pi[1, 1])) / den
    r1 = ((e * pi[0, 0] + (1 - e) * pi[0, 1]) * x + (e * pi[1, 0] + (1 - e) * pi[1, 1])) / den
    return r0, r1


def bsc_step(m: BscHmm, z: int, x):
    """
    Scalar filter update x -> f^eps_z(x).

    The prefactor is q(z)/q(1-z) with q(0) = 1 - eps and q(1) = eps, which is
    the labeling under which bsc_conditionals gives p(z | past).
    """
    if z not in (0, 1):
        raise ArgumentError(f"observed bit must be 0 or 1, got {z}")
    den = m.pi[0, 1] * np.asarray(x) + m.pi[1, 1]
    if np.any(den == 0):
        raise SingularityError(f"pole of f_{z} at x = {x}")
    return bsc_map(m.pi, m.epsilon, z, x)


def bsc_pair_step(m: BscHmm, z: int, pair: Tuple[Any, Any]) -> Tuple[Any, Any]:
    """(a_i, b_i) update; a_i = p(z_1..z_i, y_i = 0), b_i = p(z_1..z_i, y_i = 1)."""
    a, b = pair
    q0, q1 = _channel(m.epsilon)
    qz, qbar = (q0, q1) if z == 0 else (q1, q0)
    return (qz * (m.pi[0, 0] * a + m.pi[1, 0] * b),
            qbar * (m.pi[0, 1] * a + m.pi[1, 1] * b))


def bsc_conditionals(m: BscHmm, x) -> Tuple[Any, Any]:
    """(r0, r1): next-bit probabilities at filter ratio x."""
    if np.any(np.asarray(x) == -1):
        raise SingularityError("x = -1 is a pole of the conditionals")
    return bsc_conditionals_raw(m.pi, m.epsilon, x)


def bsc_filter_run(m: BscHmm, observations: Sequence[int]) -> FilterRun:
    obs = [int(z) for z in observations]
    if not obs:
        raise ArgumentError("observations must be nonempty")
    x = m.x0
    states = [FilterState(scalar=x)]
    conditionals = []
    for z in obs:
        conditionals.append(bsc_conditionals(m, x)[z])
        x = float(bsc_step(m, z, x))
        states.append(FilterState(scalar=x))
    return FilterRun(states=states, conditionals=np.array(conditionals, dtype=float))


# ---------------------------------------------------------------------------
# Entropy rate
# ---------------------------------------------------------------------------

class _BscTree:
    """Level-wise prefix tree over scalar filter states."""

    def __init__(self, m: BscHmm):
        self.m = m

    def root(self):
        return np.array([self.m.x0])

    def split(self, states):
        r0, r1 = bsc_conditionals_raw(self.m.pi, self.m.epsilon, states)
        children = [bsc_map(self.m.pi, self.m.epsilon, 0, states),
                    bsc_map(self.m.pi, self.m.epsilon, 1, states)]
        return np.stack([r0, r1], axis=1), children

    @staticmethod
    def concat(children):
        return np.concatenate(children)

    @staticmethod
    def take(states, idx):
        return states[idx:idx + 1]


class _GeneralTree:
    def __init__(self, model: HmmModel):
        self.model = model
        self.masks = [np.asarray(model.phi) == a for a in range(model.n_symbols)]
        for a, mask in enumerate(self.masks):
            if not mask.any():
                raise ModelError(f"symbol {a} is never emitted")

    def root(self):
        return stationary_distribution(self.model.delta).coords[None, :]

    def split(self, states):
        pushed = states @ self.model.delta
        masses = np.stack([pushed[:, mask].sum(axis=1) for mask in self.masks], axis=1)
        children = [np.where(mask, pushed, 0.0) / masses[:, [a]] for a, mask in enumerate(self.masks)]
        return masses, children

    @staticmethod
    def concat(children):
        return np.concatenate(children, axis=0)

    @staticmethod
    def take(states, idx):
        return states[idx:idx + 1]


def _expand(tree, states, probs, levels: int):
    for _ in range(levels):
        cond, children = tree.split(states)
        probs = np.concatenate([probs * cond[:, a] for a in range(cond.shape[1])])
        states = tree.concat(children)
    return states, probs


def _leaf_entropy(tree, states, probs) -> float:
    cond, _ = tree.split(states)
    return math.fsum((probs[:, None] * entr(cond)).ravel())


def entropy_rate_exact(m, n: int, workers: int = 1) -> float:
    """
    H_n = H(Z_0 | Z_{-n}..Z_{-1}) by exhaustive enumeration of observation words.

    Upper approximant of the entropy rate, non-increasing in n.

    Raises:
        ArgumentError: n < 1
        ResourceError: A^n above the entropy_max_words guard
    """
    if int(n) != n or n < 1:
        raise ArgumentError(f"horizon must be a positive integer, got {n}")
    n = int(n)
    tree = _BscTree(m) if isinstance(m, BscHmm) else _GeneralTree(m)
    symbols = 2 if isinstance(m, BscHmm) else m.n_symbols
    limit = NumericsConfig.get_default("entropy_max_words")
    if symbols ** n > limit:
        raise ResourceError(f"{symbols}^{n} words exceed the enumeration guard {limit}")

    depth = min(n, 4)
    states, probs = _expand(tree, tree.root(), np.array([1.0]), depth)

    def subtree(idx: int) -> float:
        s, p = _expand(tree, tree.take(states, idx), probs[idx:idx + 1], n - depth)
        return _leaf_entropy(tree, s, p)

    parts = ordered_map(subtree, range(probs.size), workers)
    value = math.fsum(parts)
    logger.debug(f"H_{n} = {value:.15g} over {symbols ** n} prefixes")
    return value


def _simulate(m, length: int, rng: np.random.Generator) -> np.ndarray:
    """Stationary observation path; channel noise is coupled across eps and 1 - eps."""
    if isinstance(m, BscHmm):
        d, phi = m.pi, None
    else:
        d, phi = m.delta, np.asarray(m.phi)
    pi0 = stationary_distribution(d).coords
    cdf = np.cumsum(d, axis=1)
    u_state = rng.random(length)
    u_noise = rng.random(length)
    states = np.empty(length, dtype=np.int64)
    y = int(np.searchsorted(np.cumsum(pi0), u_state[0], side="right"))
    y = min(y, d.shape[0] - 1)
    states[0] = y
    for i in range(1, length):
        y = min(int(np.searchsorted(cdf[y], u_state[i], side="right")), d.shape[0] - 1)
        states[i] = y
    if phi is not None:
        return phi[states]
    eps = m.epsilon
    if eps <= 0.5:
        noise = (u_noise < eps).astype(np.int64)
    else:
        noise = 1 - (u_noise < 1.0 - eps).astype(np.int64)
    return states ^ noise


def _path_log_terms(m, observations: np.ndarray) -> np.ndarray:
    if isinstance(m, BscHmm):
        out = np.empty(observations.size)
        x = m.x0
        for i, z in enumerate(observations):
            r = bsc_conditionals_raw(m.pi, m.epsilon, x)[z]
            out[i] = -math.log(r)
            x = bsc_map(m.pi, m.epsilon, z, x)
        return out
    run = filter_run(m, observations.tolist())
    return -np.log(run.conditionals)


def entropy_rate_mc(m, length: int, seed: Optional[int] = None, chains: int = 1,
                    workers: int = 1, batches: int = 50) -> Tuple[float, float]:
    """
    Monte Carlo entropy rate from simulated stationary paths.

    Returns:
        (estimate, stderr) with a batch-means standard error
    """
    if length < 1000:
        raise ArgumentError(f"path length must be at least 1000, got {length}")
    if chains < 1:
        raise ArgumentError(f"chains must be positive, got {chains}")
    seed = NumericsConfig.get_seed() if seed is None else int(seed)

    def run_chain(index: int) -> np.ndarray:
        rng = chunk_rng(seed, 7, index)
        return _path_log_terms(m, _simulate(m, length, rng))

    terms = ordered_map(run_chain, range(chains), workers)
    batch_means = np.concatenate([np.array([b.mean() for b in np.array_split(t, batches)]) for t in terms])
    estimate = float(np.mean([t.mean() for t in terms]))
    stderr = float(np.std(batch_means, ddof=1) / math.sqrt(batch_means.size))
    logger.info(f"📄 MC entropy: {estimate:.10g} ± {stderr:.3g} over {chains} chain(s) of length {length}")
    return estimate, stderr


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

def load_model(source: Union[str, Path, Mapping[str, Any]]) -> Union[BscHmm, HmmModel]:
    """
    Load a model from JSON: {"pi", "epsilon"} for the BSC case or
    {"delta", "phi"} for a general model.
    """
    if isinstance(source, Mapping):
        data = dict(source)
    else:
        try:
            data = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ModelError(f"cannot read model file {source}: {e}") from e
    if not isinstance(data, dict):
        raise ModelError("model JSON must be an object")
    keys = set(data)
    if keys == {"pi", "epsilon"}:
        return BscHmm(np.asarray(data["pi"], dtype=float), float(data["epsilon"]))
    if keys == {"delta", "phi"}:
        return HmmModel(np.asarray(data["delta"], dtype=float), tuple(data["phi"]))
    raise ModelError(f"model JSON needs keys {{pi, epsilon}} or {{delta, phi}}, got {sorted(keys)}")
