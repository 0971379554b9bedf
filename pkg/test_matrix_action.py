#!/usr/bin/env python3
"""
Tests for matrix actions, Birkhoff coefficients and the 2x2 Möbius reduction
"""

import itertools
import math
import time

import numpy as np
import pytest

from src.errors import DomainError, SingularityError
from src.matrix_action import (
    ComplexMatrix,
    MobiusMap,
    PositiveMatrix,
    birkhoff_phi,
    birkhoff_phi_argmin,
    birkhoff_tau,
    halfplane_tau_closed_form,
    induced_map,
    infinitesimal_dH_coeff,
    infinitesimal_dP_coeff,
    mobius_apply,
    mobius_derivative,
    sup_coeff_numerical,
    sup_coeff_search,
)
from src.metrics import ComplexSimplexPoint, RealSimplexPoint, halfplane_hilbert, hilbert_real
from src.parallel import chunk_rng

# 12-decimal perturbed matrix and evaluation point with known coefficients
# 0.664396 (complex Hilbert) and 0.664599 (Poincaré).
ANCHOR_T_HAT = np.array([
    [0.012890500224 + 0.000128905002j, 0.310402226067 + 0.003104022260j],
    [0.779079247486 - 0.007790792474j, 0.307296084921 - 0.003072960849j],
])
ANCHOR_Z = 0.926678310631 - 0.009266783106j


def _random_positive_2x2(rng):
    return np.exp(rng.uniform(np.log(0.1), np.log(10.0), (2, 2)))


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class TestMatrixTypes:
    def test_zero_columns_allowed(self):
        T = PositiveMatrix([[1.0, 0.0], [2.0, 0.0]])
        assert T.column_mask.tolist() == [True, False]

    def test_mixed_column_rejected(self):
        with pytest.raises(DomainError):
            PositiveMatrix([[1.0, 0.0], [2.0, 1.0]])

    def test_all_zero_rejected(self):
        with pytest.raises(DomainError):
            PositiveMatrix(np.zeros((2, 2)))

    def test_ball_membership(self):
        T = PositiveMatrix([[2.0, 1.0], [1.0, 2.0]])
        assert ComplexMatrix(T.entries + 0.01j).in_ball(T, 0.01)
        assert not ComplexMatrix(T.entries + 0.02).in_ball(T, 0.01)

    def test_mobius_conventions(self):
        T = np.array([[1.0, 2.0], [3.0, 4.0]])
        col = MobiusMap.from_matrix(T)
        row = MobiusMap.from_matrix(T, action="row")
        assert (col.a, col.b, col.c, col.d) == (1, 2, 3, 4)
        assert (row.a, row.b, row.c, row.d) == (1, 3, 2, 4)

    def test_degenerate_map_needs_constant(self):
        with pytest.raises(DomainError):
            MobiusMap(1, 1, 1, 1)
        assert MobiusMap.constant(2.0).det == 0


# ---------------------------------------------------------------------------
# Projective action and Birkhoff coefficient
# ---------------------------------------------------------------------------

class TestInducedMap:
    def test_rank_one_collapses(self):
        T = np.array([[1.0, 2.0, 3.0]] * 3)
        out = induced_map(T, RealSimplexPoint([0.2, 0.3, 0.5]))
        np.testing.assert_allclose(out.coords, [1 / 6, 2 / 6, 3 / 6], atol=1e-15)

    def test_stationary_vector_is_fixed(self):
        T = np.array([[0.9, 0.1], [0.4, 0.6]])
        w = RealSimplexPoint([0.8, 0.2])
        np.testing.assert_allclose(induced_map(T, w).coords, w.coords, atol=1e-15)

    def test_random_images_are_interior(self):
        rng = chunk_rng(1, 1)
        for _ in range(100):
            T = rng.uniform(0.1, 2.0, (4, 4))
            out = induced_map(T, rng.dirichlet(np.ones(4)))
            assert out.coords.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(out.coords > 0)

    def test_complex_image_and_singularity(self):
        T_hat = np.array([[1.0, 1.0j], [1.0, 1.0]])
        assert isinstance(induced_map(T_hat, np.array([0.5, 0.5])), ComplexSimplexPoint)
        with pytest.raises(SingularityError):
            induced_map(np.array([[1.0, -1.0], [1.0, -1.0]], dtype=complex), np.array([0.5, 0.5]))


class TestBirkhoff:
    def test_examples(self):
        assert birkhoff_phi(np.ones((2, 2))) == 1.0
        assert birkhoff_tau(np.ones((3, 3))) == 0.0
        assert birkhoff_phi([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(0.25, abs=1e-15)
        assert birkhoff_tau([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1 / 3, abs=1e-15)

    def test_phi_matches_enumeration(self):
        rng = chunk_rng(2, 2)
        T = rng.uniform(0.1, 3.0, (3, 3))
        brute = min(T[i, k] * T[j, l] / (T[j, k] * T[i, l]) for i, j, k, l in itertools.product(range(3), repeat=4))
        assert birkhoff_phi(T) == pytest.approx(brute, rel=1e-14)
        i, j, k, l = birkhoff_phi_argmin(T)
        assert T[i, k] * T[j, l] / (T[j, k] * T[i, l]) == pytest.approx(brute, rel=1e-14)

    def test_zero_columns_restrict_phi(self):
        T = np.array([[1.0, 0.0, 2.0], [3.0, 0.0, 1.0], [2.0, 0.0, 2.0]])
        assert birkhoff_phi(T) == pytest.approx(birkhoff_phi(T[:, [0, 2]]), rel=1e-15)
        assert birkhoff_phi_argmin(T)[2] in (0, 2)

    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_real_contraction_bound(self, dim):
        rng = chunk_rng(3, dim)
        for _ in range(50):
            T = rng.uniform(0.05, 5.0, (dim, dim))
            tau = birkhoff_tau(T)
            for _ in range(20):
                v, w = rng.dirichlet(np.ones(dim)), rng.dirichlet(np.ones(dim))
                image = hilbert_real(induced_map(T, v), induced_map(T, w))
                assert image <= tau * hilbert_real(v, w) + 1e-12


# ---------------------------------------------------------------------------
# Möbius reduction
# ---------------------------------------------------------------------------

class TestMobius:
    def test_identity_and_boundary_value(self):
        m = MobiusMap.identity()
        assert mobius_apply(m, 0.3 + 0.7j) == pytest.approx(0.3 + 0.7j, abs=1e-15)
        g = MobiusMap(2, 3, 5, 7)
        assert mobius_apply(g, 0) == pytest.approx(3 / 7)

    def test_pole_is_singularity(self):
        with pytest.raises(SingularityError):
            mobius_apply(MobiusMap(1, 1, 1, -1), 1.0)
        with pytest.raises(SingularityError):
            mobius_derivative(MobiusMap(1, 1, 1, -1), 1.0)

    def test_row_action_conjugates_induced_map(self):
        rng = chunk_rng(4, 4)
        for _ in range(200):
            T = _random_positive_2x2(rng)
            m = MobiusMap.from_matrix(T, action="row")
            x, y = rng.uniform(0.05, 1.0, 2)
            image = induced_map(T, np.array([x, y]) / (x + y)).coords
            assert image[0] / image[1] == pytest.approx(mobius_apply(m, x / y).real, rel=1e-12)

    def test_half_plane_metric_matches_simplex_metric(self):
        rng = chunk_rng(5, 5)
        for _ in range(100):
            T = _random_positive_2x2(rng)
            m = MobiusMap.from_matrix(T, action="row")
            v, w = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
            simplex = hilbert_real(induced_map(T, v), induced_map(T, w))
            plane = halfplane_hilbert(mobius_apply(m, v[0] / v[1]), mobius_apply(m, w[0] / w[1]))
            assert simplex == pytest.approx(plane, abs=1e-12)

    def test_closed_form_examples(self):
        assert halfplane_tau_closed_form(MobiusMap(2, 1, 1, 2)) == pytest.approx(0.6, abs=1e-15)
        assert halfplane_tau_closed_form(MobiusMap.from_matrix(np.ones((2, 2)), degenerate_ok=True)) == 0.0
        assert halfplane_tau_closed_form(MobiusMap(2, 1, 1, 2)) > birkhoff_tau([[2.0, 1.0], [1.0, 2.0]])
        # ad < bc branch
        assert halfplane_tau_closed_form(MobiusMap(1, 2, 2, 1)) == pytest.approx(0.6, abs=1e-15)

    def test_closed_form_needs_positive_entries(self):
        with pytest.raises(DomainError):
            halfplane_tau_closed_form(MobiusMap(1, -1, 1, 1))


class TestInfinitesimalCoefficients:
    def test_anchor_values(self):
        m = MobiusMap.from_matrix(ANCHOR_T_HAT)
        t0 = time.perf_counter()
        dh = infinitesimal_dH_coeff(m, ANCHOR_Z)
        dp = infinitesimal_dP_coeff(m, ANCHOR_Z)
        assert time.perf_counter() - t0 < 0.05
        assert dh == pytest.approx(0.664396, abs=5e-4)
        assert dp == pytest.approx(0.664599, abs=5e-4)
        # the perturbed map reverses the usual ordering
        assert dh < dp

    def test_constant_map_has_zero_coefficients(self):
        m = MobiusMap.constant(2.5)
        for z in (1.0, 0.3 + 2j, 5 - 1j):
            assert infinitesimal_dH_coeff(m, z) == 0.0
            assert infinitesimal_dP_coeff(m, z) == 0.0

    def test_identity_has_unit_coefficients(self):
        m = MobiusMap.identity()
        assert infinitesimal_dH_coeff(m, 0.4 + 0.9j) == pytest.approx(1.0, abs=1e-15)
        assert infinitesimal_dP_coeff(m, 0.4 + 0.9j) == pytest.approx(1.0, abs=1e-15)

    def test_positive_map_closed_form_expression(self):
        rng = chunk_rng(6, 6)
        for _ in range(100):
            a, b, c, d = rng.uniform(0.1, 5.0, 4)
            m = MobiusMap(a, b, c, d)
            z = complex(rng.uniform(0.01, 3.0), rng.uniform(-3.0, 3.0))
            expected = abs((a * d - b * c) / (a * c * z + (a * d + b * c) + b * d / z))
            assert infinitesimal_dH_coeff(m, z) == pytest.approx(expected, rel=1e-12)

    def test_extremizer_on_imaginary_axis(self):
        rng = chunk_rng(7, 7)
        for _ in range(100):
            a, b, c, d = rng.uniform(0.1, 5.0, 4)
            m = MobiusMap(a, b, c, d)
            z_star = 1j * math.sqrt(b * d / (a * c))
            assert infinitesimal_dH_coeff(m, z_star) == pytest.approx(halfplane_tau_closed_form(m), abs=1e-9)

    def test_extremizer_approached_monotonically(self):
        m = MobiusMap(3.0, 1.0, 0.5, 2.0)
        z_star = 1j * math.sqrt(1.0 * 2.0 / (3.0 * 0.5))
        values = [infinitesimal_dH_coeff(m, z_star + eta) for eta in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] < halfplane_tau_closed_form(m)

    def test_poincare_coefficient_at_most_hilbert_for_positive_maps(self):
        rng = chunk_rng(8, 8)
        for _ in range(2000):
            m = MobiusMap(*rng.uniform(0.1, 5.0, 4))
            z = np.exp(rng.uniform(-3, 3)) * np.exp(1j * rng.uniform(-1.5, 1.5))
            assert infinitesimal_dP_coeff(m, z) <= infinitesimal_dH_coeff(m, z) + 1e-12


# ---------------------------------------------------------------------------
# Supremum search
# ---------------------------------------------------------------------------

class TestSupremumSearch:
    def test_constant_map(self):
        assert sup_coeff_numerical(MobiusMap.constant(1.0)) == 0.0

    def test_pole_inside_half_plane(self):
        with pytest.raises(DomainError):
            sup_coeff_search(MobiusMap(1, 0, -1, 1))

    @pytest.mark.parametrize("m", [MobiusMap(1, 0, 1, -2j), MobiusMap(1, 1, 1, 0)])
    def test_pole_on_imaginary_axis(self, m):
        with pytest.raises(DomainError):
            sup_coeff_search(m, budget=16)

    def test_flags_maps_leaving_half_plane(self):
        est = sup_coeff_search(MobiusMap(-1, 0, 0, 1), budget=64)
        assert not est.h_preserving

    def test_perturbed_map_close_to_closed_form(self):
        rng = chunk_rng(9, 9)
        T_hat = np.array([[2.0, 1.0], [1.0, 2.0]]) + 1e-4 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        value = sup_coeff_numerical(MobiusMap.from_matrix(T_hat), "dH", budget=256)
        assert value == pytest.approx(0.6, abs=1e-2)

    def _check_closed_form(self, count, budget):
        rng = chunk_rng(10, 10)
        checked = 0
        while checked < count:
            a, b, c, d = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 4))
            if a * d < b * c:
                continue
            m = MobiusMap(a, b, c, d)
            est = sup_coeff_search(m, "dH", budget)
            assert est.value == pytest.approx(halfplane_tau_closed_form(m), abs=1e-3)
            assert est.s == pytest.approx(0.5 * math.log(b * d / (a * c)), abs=1e-2)
            assert abs(est.theta) == pytest.approx(math.pi / 2, abs=1e-2)
            checked += 1

    def test_matches_closed_form(self):
        self._check_closed_form(count=10, budget=256)

    @pytest.mark.slow
    def test_matches_closed_form_full_grid(self):
        t0 = time.perf_counter()
        self._check_closed_form(count=100, budget=None)
        assert time.perf_counter() - t0 < 30
