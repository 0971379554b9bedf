#!/usr/bin/env python3
"""
Tests for the centralized numerics configuration, seeding and JSON output
"""

import json

import numpy as np
import pytest

from src.errors import ArgumentError
from src.numerics_config import NumericsConfig
from src.parallel import chunk_ranges, chunk_rng, derive_seed, ordered_map
from src.serialization import dumps, to_jsonable


@pytest.fixture(autouse=True)
def _clean_overrides():
    NumericsConfig.reset_overrides()
    yield
    NumericsConfig.reset_overrides()


class TestTolerances:
    def test_defaults(self):
        assert NumericsConfig.get_tolerance("renormalize") == 1e-9
        assert NumericsConfig.get_tolerance("dp_reduction") == 1e-10

    def test_unknown_name(self):
        with pytest.raises(ArgumentError):
            NumericsConfig.get_tolerance("nope")
        with pytest.raises(ArgumentError):
            NumericsConfig.apply_overrides({"nope": 1.0})

    def test_nonpositive_override(self):
        with pytest.raises(ArgumentError):
            NumericsConfig.set_tolerance("metric_axioms", 0.0)

    def test_override_beats_environment(self, monkeypatch):
        monkeypatch.setenv("HMP_TOL_METRIC_AXIOMS", "1e-8")
        assert NumericsConfig.get_tolerance("metric_axioms") == 1e-8
        NumericsConfig.apply_overrides({"metric_axioms": 1e-6})
        assert NumericsConfig.get_tolerance("metric_axioms") == 1e-6
        NumericsConfig.reset_overrides()
        assert NumericsConfig.get_tolerance("metric_axioms") == 1e-8

    def test_bad_environment_value_is_ignored(self, monkeypatch):
        monkeypatch.setenv("HMP_TOL_SIMPLEX_SUM", "tiny")
        assert NumericsConfig.get_tolerance("simplex_sum") == 1e-12


class TestEnvironment:
    def test_seed(self, monkeypatch):
        monkeypatch.delenv("HMP_SEED", raising=False)
        assert NumericsConfig.get_seed() == NumericsConfig.DEFAULT_SEED
        monkeypatch.setenv("HMP_SEED", "42")
        assert NumericsConfig.get_seed() == 42

    def test_workers(self, monkeypatch):
        monkeypatch.setenv("HMP_WORKERS", "0")
        assert NumericsConfig.get_workers() == 1
        monkeypatch.setenv("HMP_WORKERS", "6")
        assert NumericsConfig.get_workers() == 6


class TestParallel:
    def test_seed_derivation(self):
        assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
        assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)
        assert 0 <= derive_seed(7) < 2 ** 64
        np.testing.assert_array_equal(chunk_rng(5, 1).random(4), chunk_rng(5, 1).random(4))

    def test_chunk_ranges(self):
        assert chunk_ranges(10, 4) == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
        assert chunk_ranges(0, 4) == []

    def test_ordered_map_keeps_order(self):
        assert ordered_map(lambda x: x * x, range(20), workers=4) == [x * x for x in range(20)]


class TestSerialization:
    def test_complex_and_numpy_values(self):
        data = {"z": 1 + 2j, "a": np.array([1.5, 2.5]), "n": np.int64(3), "b": np.bool_(True), "x": float("inf")}
        assert to_jsonable(data) == {"z": [1.0, 2.0], "a": [1.5, 2.5], "n": 3, "b": True, "x": "inf"}

    def test_dumps_is_sorted_and_exact(self):
        text = dumps({"b": 0.1 + 0.2, "a": 1})
        assert list(json.loads(text)) == ["a", "b"]
        assert json.loads(text)["b"] == 0.1 + 0.2
