#!/usr/bin/env python3
"""
Tests for hidden Markov models, the filter recursion and entropy rates
"""

import json
import math

import numpy as np
import pytest

from src.errors import ArgumentError, ModelError, NumericalError, ResourceError
from src.hmm import (
    BscHmm,
    HmmModel,
    bsc_conditionals,
    bsc_map,
    bsc_pair_step,
    bsc_step,
    delta_a,
    entropy_rate_exact,
    entropy_rate_mc,
    f_a,
    filter_run,
    load_model,
    markov_entropy_rate,
    r_a,
    stationary_distribution,
)
from src.parallel import chunk_rng

GENERAL = HmmModel(np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.3, 0.4]]), (0, 0, 1))


def _binary_entropy(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def _embedded(m: BscHmm) -> HmmModel:
    """Four-state model on (hidden bit, observed bit) emitting the observed bit."""
    q = np.array([[1 - m.epsilon, m.epsilon], [m.epsilon, 1 - m.epsilon]])
    delta = np.empty((4, 4))
    for y in range(2):
        for z in range(2):
            for y2 in range(2):
                for z2 in range(2):
                    delta[2 * y + z, 2 * y2 + z2] = m.pi[y, y2] * q[y2, z2]
    return HmmModel(delta, (0, 1, 0, 1))


def _forward_log_probability(model: HmmModel, observations):
    alpha = stationary_distribution(model.delta).coords
    phi = np.asarray(model.phi)
    log_p = 0.0
    for z in observations:
        alpha = (alpha @ model.delta) * (phi == z)
        total = alpha.sum()
        log_p += math.log(total)
        alpha = alpha / total
    return log_p


class TestModels:
    def test_rows_must_be_stochastic(self):
        with pytest.raises(ModelError):
            HmmModel(np.array([[0.5, 0.6], [0.5, 0.5]]), (0, 1))

    def test_entries_must_be_positive(self):
        with pytest.raises(ModelError):
            HmmModel(np.array([[1.0, 0.0], [0.5, 0.5]]), (0, 1))

    def test_phi_length(self):
        with pytest.raises(ModelError):
            HmmModel(np.array([[0.5, 0.5], [0.5, 0.5]]), (0, 1, 1))

    def test_bsc_epsilon_range(self):
        for eps in (0.0, 1.0, -0.1):
            with pytest.raises(ModelError):
                BscHmm.symmetric(0.3, eps)
        # accepted by the constructor, rejected by the analyticity assumptions
        m = BscHmm.symmetric(0.3, 0.7)
        with pytest.raises(ModelError):
            m.check_standing_assumptions()

    def test_singular_chain(self):
        m = BscHmm.symmetric(0.5, 0.2)
        assert m.det == 0
        with pytest.raises(ModelError):
            m.check_standing_assumptions()

    def test_symbol_supports(self):
        assert GENERAL.n_symbols == 2
        assert GENERAL.support(0).tolist() == [0, 1]
        d0 = delta_a(GENERAL, 0).entries
        assert np.all(d0[:, 2] == 0)
        w = np.array([0.2, 0.3, 0.5])
        assert r_a(GENERAL, 0, w) + r_a(GENERAL, 1, w) == pytest.approx(1.0, abs=1e-15)
        assert f_a(GENERAL, 1, w).coords.tolist() == [0.0, 0.0, 1.0]


class TestFilter:
    def test_stationary_distribution(self):
        pi = stationary_distribution(np.array([[0.9, 0.1], [0.4, 0.6]]))
        np.testing.assert_allclose(pi.coords, [0.8, 0.2], atol=1e-13)

    def test_stationary_iteration_cap(self):
        delta = np.array([[0.9, 0.1], [0.4, 0.6]])
        with pytest.raises(ArgumentError):
            stationary_distribution(delta, max_iter=0)
        with pytest.raises(NumericalError):
            stationary_distribution(delta, max_iter=1)

    def test_markov_entropy_rate(self):
        assert markov_entropy_rate(np.array([[0.3, 0.7], [0.7, 0.3]])) == pytest.approx(_binary_entropy(0.3), abs=1e-15)

    def test_general_filter_matches_forward_algorithm(self):
        rng = chunk_rng(1, 0)
        obs = rng.integers(0, 2, 40).tolist()
        run = filter_run(GENERAL, obs)
        assert run.log_probability == pytest.approx(_forward_log_probability(GENERAL, obs), abs=1e-12)
        assert len(run.states) == len(obs) + 1

    def test_scalar_filter_matches_embedded_model(self):
        m = BscHmm(np.array([[0.8, 0.2], [0.35, 0.65]]), 0.15)
        obs = chunk_rng(2, 0).integers(0, 2, 60).tolist()
        scalar = filter_run(m, obs)
        general = filter_run(_embedded(m), obs)
        np.testing.assert_allclose(scalar.conditionals, general.conditionals, atol=1e-12)

    def test_pair_update_tracks_ratio(self):
        m = BscHmm.symmetric(0.3, 0.1)
        a, b = 0.4, 0.6
        for z in (0, 1, 1, 0, 1):
            x = a / b
            a, b = bsc_pair_step(m, z, (a, b))
            assert a / b == pytest.approx(bsc_step(m, z, x), rel=1e-13)

    def test_prefactor_labeling(self):
        m = BscHmm.symmetric(0.3, 0.1)
        xs = np.array([0.2, 1.0, 4.0])
        no_flip = (0.3 * xs + 0.7) / (0.7 * xs + 0.3)
        np.testing.assert_allclose(bsc_step(m, 0, xs), 9.0 * no_flip, rtol=1e-14)
        np.testing.assert_allclose(bsc_step(m, 1, xs), no_flip / 9.0, rtol=1e-14)
        np.testing.assert_allclose(bsc_map(m.pi, 0.9, 0, xs), bsc_step(m, 1, xs), rtol=1e-14)

    def test_conditionals_sum_to_one(self):
        m = BscHmm.symmetric(0.3, 0.1)
        r0, r1 = bsc_conditionals(m, np.array([0.1, 1.0, 7.0]))
        np.testing.assert_allclose(r0 + r1, 1.0, atol=1e-15)

    def test_invalid_bit(self):
        with pytest.raises(ArgumentError):
            bsc_step(BscHmm.symmetric(0.3, 0.1), 2, 1.0)

    def test_empty_observations(self):
        with pytest.raises(ArgumentError):
            filter_run(GENERAL, [])


class TestEntropyRate:
    def test_fair_channel_gives_log_two(self):
        m = BscHmm.symmetric(0.75, 0.5)
        for n in (1, 5, 12):
            assert entropy_rate_exact(m, n) == math.log(2)
        skewed = BscHmm(np.array([[0.8, 0.2], [0.35, 0.65]]), 0.5)
        assert entropy_rate_exact(skewed, 10) == pytest.approx(math.log(2), abs=1e-14)

    def test_noiseless_limit_is_markov_rate(self):
        m = BscHmm.symmetric(0.3, 1e-12)
        assert entropy_rate_exact(m, 20, workers=4) == pytest.approx(markov_entropy_rate(m.pi), abs=1e-6)

    def test_upper_approximants_non_increasing(self):
        m = BscHmm.symmetric(0.3, 0.1)
        values = [entropy_rate_exact(m, n) for n in range(1, 17)]
        assert all(b <= a + 1e-13 for a, b in zip(values, values[1:]))

    def test_scalar_and_embedded_enumerations_agree(self):
        m = BscHmm(np.array([[0.8, 0.2], [0.35, 0.65]]), 0.15)
        assert entropy_rate_exact(m, 8) == pytest.approx(entropy_rate_exact(_embedded(m), 8), abs=1e-12)

    def test_worker_count_does_not_change_value(self):
        assert entropy_rate_exact(GENERAL, 9, workers=1) == entropy_rate_exact(GENERAL, 9, workers=3)

    def test_exact_and_monte_carlo_agree(self):
        m = BscHmm.symmetric(0.3, 0.1)
        exact = entropy_rate_exact(m, 16)
        estimate, stderr = entropy_rate_mc(m, 100_000, seed=11, chains=2)
        assert stderr > 0
        assert abs(estimate - exact) <= 3 * stderr

    def test_monte_carlo_symmetric_in_crossover(self):
        low, low_err = entropy_rate_mc(BscHmm.symmetric(0.3, 0.1), 100_000, seed=11)
        high, high_err = entropy_rate_mc(BscHmm.symmetric(0.3, 0.9), 100_000, seed=12)
        assert abs(low - high) <= 3 * math.hypot(low_err, high_err)

    def test_monte_carlo_general_model(self):
        estimate, stderr = entropy_rate_mc(GENERAL, 20_000, seed=3)
        assert abs(estimate - entropy_rate_exact(GENERAL, 12)) <= 4 * stderr

    def test_monte_carlo_is_reproducible(self):
        m = BscHmm.symmetric(0.3, 0.1)
        assert entropy_rate_mc(m, 5000, seed=5, chains=3, workers=1) == entropy_rate_mc(m, 5000, seed=5, chains=3, workers=3)

    def test_guards(self):
        m = BscHmm.symmetric(0.3, 0.1)
        with pytest.raises(ResourceError):
            entropy_rate_exact(m, 25)
        with pytest.raises(ArgumentError):
            entropy_rate_exact(m, 0)
        with pytest.raises(ArgumentError):
            entropy_rate_mc(m, 100)


class TestLoadModel:
    def test_bsc_mapping(self):
        m = load_model({"pi": [[0.3, 0.7], [0.7, 0.3]], "epsilon": 0.1})
        assert isinstance(m, BscHmm)
        assert m.epsilon == 0.1

    def test_general_file(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"delta": GENERAL.delta.tolist(), "phi": [0, 0, 1]}))
        m = load_model(path)
        assert isinstance(m, HmmModel)
        assert m.phi == (0, 0, 1)

    def test_unknown_keys(self):
        with pytest.raises(ModelError):
            load_model({"pi": [[0.3, 0.7], [0.7, 0.3]]})

    def test_unreadable_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ModelError):
            load_model(bad)
