#!/usr/bin/env python3
"""
Tests for the contraction certifiers and lemma oracles
"""

import numpy as np
import pytest

from src.contraction_checks import (
    certify_birkhoff_bound,
    certify_contraction,
    certify_invariance,
    empirical_birkhoff_sup,
    empirical_contraction_ratio,
    lemma_aA_check,
    lemma_aA_suite,
    lemma_maxone_check,
    lemma_maxone_suite,
)
from src.errors import ArgumentError, DomainError
from src.matrix_action import PositiveMatrix, birkhoff_tau
from src.metrics import sample_delta_neighborhood
from src.numerics_config import NumericsConfig
from src.parallel import chunk_rng

MIXING = np.array([[2.0, 1.0], [1.0, 2.0]])
ZERO_COLUMN = np.array([[1.0, 0.0, 2.0], [3.0, 0.0, 1.0], [2.0, 0.0, 2.0]])


def _random_matrices(count, dims, seed):
    rng = chunk_rng(seed, 0)
    return [np.exp(rng.uniform(np.log(0.1), np.log(5.0), (dim, dim)))
            for dim in rng.choice(dims, size=count)]


class TestContractionRatio:
    def test_real_ratio_bounded_by_tau(self):
        rng = chunk_rng(1, 0)
        for T in _random_matrices(30, [2, 3, 4], seed=1):
            x, y = rng.dirichlet(np.ones(T.shape[0]), size=2)
            assert empirical_contraction_ratio(T, x, y) <= birkhoff_tau(T) + 1e-12

    def test_equal_points_rejected(self):
        x = np.array([0.3, 0.7])
        with pytest.raises(ArgumentError):
            empirical_contraction_ratio(MIXING, x, x.copy())

    def test_perturbed_ratio_below_one(self):
        rng = chunk_rng(2, 0)
        T_hat = MIXING + 1e-3 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        _, X = sample_delta_neighborhood(2, 1e-3, rng, 50)
        _, Y = sample_delta_neighborhood(2, 1e-3, rng, 50)
        for x, y in zip(X, Y):
            assert empirical_contraction_ratio(T_hat, x, y) < 1.0


class TestCertifyContraction:
    def _certify(self, count):
        rng = chunk_rng(3, 0)
        for k in range(count):
            T = rng.uniform(0.2, 1.0, (3, 3))
            report = certify_contraction(T, r=1e-3, delta=1e-3, trials=10_000, seed=k)
            assert report.passed, report
            assert report.max_ratio < 1.0

    def test_random_matrices(self):
        self._certify(3)

    @pytest.mark.slow
    def test_random_matrices_full(self):
        self._certify(20)

    def test_identical_across_worker_counts(self):
        one = certify_contraction(MIXING, 1e-3, 1e-3, trials=20_000, seed=7, workers=1)
        four = certify_contraction(MIXING, 1e-3, 1e-3, trials=20_000, seed=7, workers=4)
        assert one.max_ratio == four.max_ratio
        assert one.violations == four.violations
        assert one.argmax["trial"] == four.argmax["trial"]

    def test_large_radius_fails(self):
        report = certify_contraction(MIXING, r=1.5, delta=0.5, trials=2000, seed=1)
        assert not report.passed

    def test_argument_validation(self):
        with pytest.raises(ArgumentError):
            certify_contraction(MIXING, 1e-3, 1.0, trials=10)
        with pytest.raises(ArgumentError):
            certify_contraction(MIXING, -1.0, 0.1, trials=10)
        with pytest.raises(DomainError):
            certify_contraction(ZERO_COLUMN, 1e-3, 1e-3, trials=10)


class TestBirkhoffBound:
    def _check(self, count):
        for k, T in enumerate(_random_matrices(count, [2, 3, 4], seed=4)):
            report = certify_birkhoff_bound(T, pairs=100, seed=k)
            assert report.violations == 0
            assert report.max_ratio <= report.tau + 1e-12
            assert report.oracle_ratio >= 0.95 * report.tau
            assert report.oracle_ratio <= report.tau + 1e-9

    def test_random_matrices(self):
        self._check(20)

    @pytest.mark.slow
    def test_random_matrices_full(self):
        self._check(200)

    def test_zero_columns(self):
        report = certify_birkhoff_bound(ZERO_COLUMN, pairs=1000, seed=5)
        assert report.passed
        assert report.tau == pytest.approx(birkhoff_tau(ZERO_COLUMN[:, [0, 2]]))

    def test_rank_one_has_zero_ratio(self):
        result = empirical_birkhoff_sup(np.ones((3, 3)), seed=1)
        assert result.ratio == 0.0
        assert result.tau == 0.0


class TestInvariance:
    def test_real_matrix_images_have_witnesses(self):
        report = certify_invariance(PositiveMatrix(MIXING), delta=1e-3, samples=2000, seed=1, T=MIXING)
        assert report.failed == 0
        assert report.passed == 2000
        assert report.first_failure is None

    def test_tiny_perturbation_round_trip(self):
        rng = chunk_rng(6, 0)
        T_hat = MIXING + 1e-7 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        report = certify_invariance(T_hat, delta=1e-3, samples=2000, seed=2, T=MIXING)
        assert report.failed == 0
        assert report.worst_relative_displacement < 1e-2

    def test_delta_one_rejected(self):
        with pytest.raises(ArgumentError):
            certify_invariance(MIXING, delta=1.0, samples=10)


class TestLemmaOracles:
    def test_maxone_segment_through_origin(self):
        report = lemma_maxone_check([1.0, -1.0], 0.0, 1.0, samples=1000, seed=1)
        assert report.violations == 0
        assert report.details["vertex_max"] == 1.0

    def test_maxone_vertex_attains_max(self):
        report = lemma_maxone_check([1 + 1j, 2 - 1j, -0.5j], 0.3 + 0.2j, 2.0, samples=500, seed=2)
        assert report.violations == 0
        assert report.details["sample_max"] == pytest.approx(report.details["vertex_max"], abs=1e-15)

    def test_maxone_needs_two_points(self):
        with pytest.raises(ArgumentError):
            lemma_maxone_check([1.0], 0.0, 1.0)

    def test_aA_hand_example(self):
        lhs, bound = lemma_aA_check([1.0, 4.0], [1.0, 1.0])
        assert lhs == pytest.approx(0.3, abs=1e-15)
        assert bound == pytest.approx(1 / 3, abs=1e-15)

    def test_aA_equal_weights(self):
        assert lemma_aA_check([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]) == (0.0, 0.0)

    def test_aA_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            lemma_aA_check([1.0, 0.0], [1.0, 1.0])

    def test_suites_report_no_violations(self):
        maxone = lemma_maxone_suite(100_000, seed=3, workers=2)
        aA = lemma_aA_suite(100_000, seed=3, workers=2)
        assert maxone.violations == 0
        assert aA.violations == 0
        assert aA.details["mass_balance_failures"] == 0

    def test_mass_balance_failures_count_as_violations(self):
        # rounding-level imbalance only fails under a vanishing tolerance
        NumericsConfig.set_tolerance("mass_balance", 1e-300)
        try:
            report = lemma_aA_suite(5_000, seed=3)
        finally:
            NumericsConfig.reset_overrides()
        failures = report.details["mass_balance_failures"]
        assert failures > 0
        assert report.violations >= failures
