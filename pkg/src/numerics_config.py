"""
Centralized Numerical Configuration for All Pipeline Stages
Provides standardized tolerances and defaults for metrics, certifiers and solvers
"""

import os
import logging
from typing import Dict, Optional

from src.errors import ArgumentError

logger = logging.getLogger(__name__)


class NumericsConfig:
    """Centralized tolerances and defaults for every numerical module"""

    # Named tolerances; every module reads these through get_tolerance()
    TOLERANCES = {
        "simplex_sum": 1e-12,
        "renormalize": 1e-9,
        "metric_axioms": 1e-12,
        "stochastic_rows": 1e-12,
        "stationary_residual": 1e-14,
        "mass_balance": 1e-12,
        "lemma_violation": 1e-12,
        "dp_reduction": 1e-10,
    }

    # Fixed seed so that bare invocations are reproducible
    DEFAULT_SEED = 20240607

    DEFAULTS = {
        "workers": 1,
        "grid_size": 512,
        "s_max": 12.0,
        "entropy_max_words": 2 ** 24,
        "stationary_max_iter": 1_000_000,
        "chunk_size": 8192,
        "sampling_attempts": 64,
    }

    # Runtime overrides (CLI --tol name=value) win over the environment
    _overrides: Dict[str, float] = {}

    @staticmethod
    def get_tolerance(name: str) -> float:
        """
        Get a named tolerance

        Args:
            name: Tolerance name (simplex_sum, renormalize, ...)

        Returns:
            Runtime override, else HMP_TOL_<NAME> from the environment, else the default
        """
        if name not in NumericsConfig.TOLERANCES:
            raise ArgumentError(f"unknown tolerance '{name}'")
        if name in NumericsConfig._overrides:
            return NumericsConfig._overrides[name]
        env_value = os.getenv(f"HMP_TOL_{name.upper()}")
        if env_value:
            try:
                return float(env_value)
            except ValueError:
                logger.warning(f"⚠️  Ignoring non-numeric HMP_TOL_{name.upper()}={env_value!r}")
        return NumericsConfig.TOLERANCES[name]

    @staticmethod
    def set_tolerance(name: str, value: float) -> None:
        if name not in NumericsConfig.TOLERANCES:
            raise ArgumentError(f"unknown tolerance '{name}'")
        if not value > 0:
            raise ArgumentError(f"tolerance '{name}' must be positive, got {value}")
        NumericsConfig._overrides[name] = float(value)

    @staticmethod
    def apply_overrides(overrides: Optional[Dict[str, float]]) -> None:
        """Apply a batch of runtime tolerance overrides"""
        for name, value in (overrides or {}).items():
            NumericsConfig.set_tolerance(name, value)

    @staticmethod
    def reset_overrides() -> None:
        NumericsConfig._overrides.clear()

    @staticmethod
    def get_seed() -> int:
        """
        Get the default seed (can be overridden by HMP_SEED)

        Returns:
            64-bit seed
        """
        env_seed = os.getenv("HMP_SEED")
        if env_seed:
            try:
                return int(env_seed)
            except ValueError:
                logger.warning(f"⚠️  Ignoring non-integer HMP_SEED={env_seed!r}")
        return NumericsConfig.DEFAULT_SEED

    @staticmethod
    def get_workers() -> int:
        """
        Get the default worker count (can be overridden by HMP_WORKERS)

        Returns:
            Worker count, at least 1
        """
        env_workers = os.getenv("HMP_WORKERS")
        if env_workers:
            try:
                return max(1, int(env_workers))
            except ValueError:
                logger.warning(f"⚠️  Ignoring non-integer HMP_WORKERS={env_workers!r}")
        return NumericsConfig.DEFAULTS["workers"]

    @staticmethod
    def get_default(name: str):
        return NumericsConfig.DEFAULTS[name]

    @staticmethod
    def log_configuration(command: str = "run", seed: Optional[int] = None, workers: Optional[int] = None):
        """
        Log the effective numerical configuration

        Args:
            command: CLI command being executed
            seed: Seed in effect
            workers: Worker count in effect
        """
        seed = NumericsConfig.get_seed() if seed is None else seed
        workers = NumericsConfig.get_workers() if workers is None else workers

        logger.info("=" * 60)
        logger.info(f"🔧 Numerics Configuration for {command.upper()}")
        logger.info("=" * 60)
        logger.info(f"🎲 Seed: {seed}")
        logger.info(f"🧵 Workers: {workers}")
        for name in sorted(NumericsConfig.TOLERANCES):
            value = NumericsConfig.get_tolerance(name)
            marker = " (override)" if value != NumericsConfig.TOLERANCES[name] else ""
            logger.info(f"🎯 {name}: {value:g}{marker}")
        logger.info("=" * 60)
