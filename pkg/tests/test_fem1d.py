"""Mesh assembly, tridiagonal solves, spectral oracles, and error norms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsinc import (
    Fem1dSystem,
    apply_quadrature,
    assemble,
    build_scheme,
    discrete_eigenpairs,
    error_norms,
    fractional_norm,
    l2_project,
    reference_solution_derivative,
    reference_solution_series,
    scalar_quadrature,
    semidiscrete_solution,
    thomas,
)


def parseval_norms(beta, n_terms):
    """Exact L2/H1 norms of the truncated reference series via orthogonality."""
    ell = np.arange(1, n_terms + 1, 2, dtype=float)
    w = np.pi * ell
    coef = 2.0 * w ** (-2.0 * beta) * (2.0 / w)
    l2_sq = 0.5 * np.sum(coef**2)
    h1_sq = l2_sq + 0.5 * np.sum((coef * w) ** 2)
    return math.sqrt(l2_sq), math.sqrt(h1_sq)


class TestAssembly:
    def test_two_cells_frozen(self):
        system = assemble(2)
        assert system.n_dofs == 1
        assert np.allclose(system.mass_matrix(), [[1.0 / 3.0]], rtol=0, atol=1e-16)
        assert np.allclose(system.stiffness_matrix(), [[4.0]], rtol=0, atol=1e-15)

    def test_four_cells_stiffness_frozen(self):
        s = assemble(4).stiffness_matrix()
        assert np.max(np.abs(np.diag(s) - 8.0)) <= 1e-13
        assert np.max(np.abs(np.diag(s, 1) + 4.0)) <= 1e-13
        assert np.max(np.abs(np.diag(s, -1) + 4.0)) <= 1e-13

    def test_convection_breaks_symmetry(self):
        s = assemble(8, convection=1.0).stiffness_matrix()
        assert abs(s[0, 1] - s[1, 0] - 1.0) <= 1e-14

    def test_no_convection_symmetric(self):
        s = assemble(8).stiffness_matrix()
        assert np.array_equal(s, s.T)

    def test_nodes(self):
        system = assemble(4)
        assert np.allclose(system.nodes, [0.25, 0.5, 0.75], rtol=0, atol=1e-16)

    @pytest.mark.parametrize("n_cells", [1, 0, -3])
    def test_too_few_cells_rejected(self, n_cells):
        with pytest.raises(ValueError):
            Fem1dSystem(n_cells)

    def test_nonfinite_convection_rejected(self):
        with pytest.raises(ValueError):
            assemble(8, convection=math.inf)

    def test_bands_read_only(self):
        system = assemble(8)
        with pytest.raises(ValueError):
            system.mass_diag[0] = 0.0


class TestThomas:
    def test_single_unknown(self):
        got = thomas(np.array([]), np.array([2.0]), np.array([]), np.array([5.0]))
        assert got.shape == (1,)
        assert got[0] == 2.5

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(3)
        n = 12
        lower = rng.uniform(-1.0, 1.0, n - 1)
        upper = rng.uniform(-1.0, 1.0, n - 1)
        diag = 4.0 + rng.uniform(0.0, 1.0, n)
        rhs = rng.standard_normal(n)
        a = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
        want = np.linalg.solve(a, rhs)
        got = thomas(lower, diag, upper, rhs)
        assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))

    def test_rhs_shape_rejected(self):
        with pytest.raises(ValueError):
            thomas(np.zeros(2), np.ones(3), np.zeros(2), np.ones(4))


class TestShiftedSolve:
    @pytest.mark.parametrize("mu", [0.5, 7.0])
    def test_matches_dense_solve(self, mu):
        system = assemble(16, convection=0.7)
        rng = np.random.default_rng(5)
        v = rng.standard_normal(system.n_dofs)
        dense = np.linalg.solve(
            mu * system.mass_matrix() + system.stiffness_matrix(),
            system.mass_matvec(v),
        )
        got = system.shifted_solve(mu, v)
        assert np.max(np.abs(got - dense)) <= 1e-12 * np.max(np.abs(dense))

    def test_eigenvector_resolvent_closed_form(self):
        system = assemble(32)
        spectral = discrete_eigenpairs(system)
        for ell in (0, 7, 30):
            psi = spectral.eigenvectors[:, ell]
            lam = spectral.eigenvalues[ell]
            got = system.shifted_solve(2.5, psi)
            want = psi / (2.5 + lam)
            assert np.max(np.abs(got - want)) <= 1e-11 * np.max(np.abs(want))

    def test_batched_bit_identical_to_single(self):
        system = assemble(16)
        rng = np.random.default_rng(9)
        v = rng.standard_normal(system.n_dofs)
        mus = np.array([0.7, 2.0, 31.0])
        batch = system.shifted_solve_many(mus, v)
        single = np.stack([system.shifted_solve(m, v) for m in mus])
        assert np.array_equal(batch, single)

    @pytest.mark.parametrize("mu", [0.0, -1.0, math.inf, math.nan])
    def test_invalid_shift_rejected(self, mu):
        system = assemble(4)
        with pytest.raises(ValueError):
            system.shifted_solve(mu, np.ones(3))

    def test_shape_mismatch_rejected(self):
        system = assemble(4)
        with pytest.raises(ValueError):
            system.shifted_solve(1.0, np.ones(4))

    def test_batched_validation(self):
        system = assemble(4)
        with pytest.raises(ValueError):
            system.shifted_solve_many(np.array([[1.0]]), np.ones(3))
        with pytest.raises(ValueError):
            system.shifted_solve_many(np.array([1.0, -2.0]), np.ones(3))

    @settings(max_examples=40, deadline=None)
    @given(
        mu=st.floats(min_value=1e-2, max_value=1e4),
        values=st.lists(
            st.floats(min_value=-50.0, max_value=50.0), min_size=7, max_size=7
        ),
    )
    def test_resolvent_contracts_in_mass_norm(self, mu, values):
        system = assemble(8)
        v = np.array(values)
        x = system.shifted_solve(mu, v)
        assert system.mass_norm(x) <= system.mass_norm(v) / mu * (1.0 + 1e-12) + 1e-300


class TestProjection:
    def test_constant_two_cells_frozen(self):
        c = l2_project(assemble(2), 1.0)
        assert np.allclose(c, [1.5], rtol=0, atol=1e-14)

    def test_constant_load_moments(self):
        system = assemble(32)
        c = l2_project(system, 1.0)
        # row sums of M c reproduce the load integrals of f = 1
        assert abs(np.sum(system.mass_matvec(c)) - 31.0 / 32.0) <= 1e-14

    def test_hat_function_reproduced_exactly(self):
        system = assemble(8)
        j = 3

        def hat(x):
            return np.clip(1.0 - np.abs(x - j * system.h) / system.h, 0.0, None)

        c = l2_project(system, hat)
        e = np.zeros(system.n_dofs)
        e[j - 1] = 1.0
        assert np.max(np.abs(c - e)) <= 1e-14

    def test_smooth_function_near_interpolant(self):
        system = assemble(64)
        c = l2_project(system, lambda x: np.sin(np.pi * x))
        assert np.max(np.abs(c - np.sin(np.pi * system.nodes))) <= 1e-3

    def test_projection_does_not_expand_l2_norm(self):
        system = assemble(64)
        c = l2_project(system, lambda x: np.sin(2.0 * np.pi * x))
        assert system.mass_norm(c) <= 1.0 / math.sqrt(2.0)
        c = l2_project(system, lambda x: x * (1.0 - x))
        assert system.mass_norm(c) <= math.sqrt(1.0 / 30.0)


class TestSpectralOracle:
    def test_two_cell_eigenvalue_frozen(self):
        spectral = discrete_eigenpairs(assemble(2))
        assert abs(spectral.eigenvalues[0] - 12.0) <= 1e-12

    def test_fundamental_eigenvalue_near_continuum(self):
        spectral = discrete_eigenpairs(assemble(512))
        assert abs(spectral.eigenvalues[0] - math.pi**2) <= 1e-3

    def test_eigenvalues_ascending(self):
        lam = discrete_eigenpairs(assemble(64)).eigenvalues
        assert np.all(np.diff(lam) > 0)

    def test_mass_orthonormality(self):
        system = assemble(8)
        psi = discrete_eigenpairs(system).eigenvectors
        gram = psi.T @ system.mass_matrix() @ psi
        assert np.max(np.abs(gram - np.eye(system.n_dofs))) <= 1e-12

    def test_generalized_residuals(self):
        system = assemble(64)
        spectral = discrete_eigenpairs(system)
        for ell in range(system.n_dofs):
            psi = spectral.eigenvectors[:, ell]
            lam = spectral.eigenvalues[ell]
            resid = system.stiffness_matvec(psi) - lam * system.mass_matvec(psi)
            assert np.max(np.abs(resid)) <= 1e-10 * lam * np.max(
                np.abs(system.mass_matvec(psi))
            )

    def test_convection_rejected(self):
        with pytest.raises(ValueError):
            discrete_eigenpairs(assemble(8, convection=1.0))

    def test_arrays_read_only(self):
        spectral = discrete_eigenpairs(assemble(8))
        with pytest.raises(ValueError):
            spectral.eigenvalues[0] = 0.0


class TestFractionalNorm:
    def test_eigenvector_norm_closed_form(self):
        spectral = discrete_eigenpairs(assemble(32))
        for ell in (0, 10, 30):
            got = spectral.fractional_norm(spectral.eigenvectors[:, ell], 0.8)
            want = spectral.eigenvalues[ell] ** 0.4
            assert abs(got - want) <= 1e-13 * want

    def test_zero_order_is_mass_norm(self):
        system = assemble(32)
        spectral = discrete_eigenpairs(system)
        rng = np.random.default_rng(21)
        v = rng.standard_normal(system.n_dofs)
        assert abs(spectral.fractional_norm(v, 0.0) - system.mass_norm(v)) <= 1e-12

    def test_order_two_applies_operator(self):
        spectral = discrete_eigenpairs(assemble(16))
        psi = spectral.eigenvectors[:, 0]
        lam = spectral.eigenvalues[0]
        assert abs(spectral.fractional_norm(psi, 2.0) - lam) <= 1e-11 * lam

    def test_matches_half_power_route(self):
        system = assemble(32)
        spectral = discrete_eigenpairs(system)
        rng = np.random.default_rng(22)
        v = rng.standard_normal(system.n_dofs)
        direct = spectral.fractional_norm(v, 0.8)
        via_half = system.mass_norm(spectral.half_power(v, 0.8))
        assert abs(direct - via_half) <= 1e-11 * direct

    def test_module_level_wrapper(self):
        system = assemble(8)
        spectral = discrete_eigenpairs(system)
        v = np.ones(system.n_dofs)
        assert fractional_norm(spectral, v, 0.0) == spectral.fractional_norm(v, 0.0)

    def test_negative_order_rejected(self):
        spectral = discrete_eigenpairs(assemble(8))
        with pytest.raises(ValueError):
            spectral.fractional_norm(np.ones(7), -0.5)
        with pytest.raises(ValueError):
            spectral.half_power(np.ones(7), -1.0)


class TestSemidiscreteSolution:
    def test_eigenvector_input_scales(self):
        spectral = discrete_eigenpairs(assemble(32))
        psi = spectral.eigenvectors[:, 4]
        lam = spectral.eigenvalues[4]
        got = semidiscrete_solution(spectral, 0.5, psi)
        want = lam**-0.5 * psi
        assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))

    def test_power_composition_recovers_input(self):
        system = assemble(32)
        spectral = discrete_eigenpairs(system)
        f = l2_project(system, 1.0)
        u = spectral.neg_power(f, 0.5)
        back = spectral.apply_power(u, 0.5)
        assert np.max(np.abs(back - f)) <= 1e-10 * np.max(np.abs(f))

    def test_invalid_beta_rejected(self):
        spectral = discrete_eigenpairs(assemble(8))
        for beta in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                spectral.neg_power(np.ones(7), beta)

    def test_quadrature_route_matches_spectral_route(self):
        system = assemble(32)
        spectral = discrete_eigenpairs(system)
        f = l2_project(system, 1.0)
        scheme = build_scheme(0.5, 0.4, s_plus=0.25)
        via_solves = apply_quadrature(scheme, system, f)
        via_spectrum = spectral.reconstruct(
            scalar_quadrature(scheme, spectral.eigenvalues) * spectral.project(f)
        )
        diff = np.max(np.abs(via_solves - via_spectrum))
        assert diff <= 1e-11 * np.max(np.abs(via_spectrum))

    def test_power_commutes_with_resolvent(self):
        system = assemble(32)
        spectral = discrete_eigenpairs(system)
        f = l2_project(system, 1.0)
        mu = 3.0
        a_route = system.shifted_solve(mu, spectral.neg_power(f, 0.5))
        b_route = spectral.neg_power(system.shifted_solve(mu, f), 0.5)
        assert np.max(np.abs(a_route - b_route)) <= 1e-11 * np.max(np.abs(b_route))


class TestReferenceSeries:
    def test_boundary_values_vanish(self):
        got = reference_solution_series(0.5, 999, np.array([0.0, 1.0]))
        # x = 1 leaves a rounding residue because pi*l is inexact; x = 0 is exact
        assert abs(got[0]) == 0.0
        assert abs(got[1]) <= 1e-12

    def test_single_term_midpoint_frozen(self):
        got = reference_solution_series(0.5, 1, 0.5)
        assert got.shape == ()
        assert abs(float(got) - 4.0 / math.pi**2) <= 1e-15
        assert abs(float(got) - 0.4052847345693511) <= 1e-15

    def test_even_terms_contribute_nothing(self):
        x = np.linspace(0.0, 1.0, 11)
        one = reference_solution_series(0.7, 1, x)
        two = reference_solution_series(0.7, 2, x)
        assert np.array_equal(one, two)

    def test_single_term_derivative_frozen(self):
        got = reference_solution_derivative(0.5, 1, 0.25)
        assert abs(float(got) - 2.0 * math.sqrt(2.0) / math.pi) <= 1e-15
        assert abs(float(got) - 0.9003163161571062) <= 1e-15

    def test_shape_follows_input(self):
        x = np.linspace(0.1, 0.9, 5).reshape(5, 1)
        assert reference_solution_series(0.5, 9, x).shape == (5, 1)

    def test_symmetry_about_midpoint(self):
        u = reference_solution_series(0.3, 99, np.array([0.2, 0.8]))
        assert abs(u[0] - u[1]) <= 1e-13

    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.2])
    def test_invalid_beta_rejected(self, beta):
        with pytest.raises(ValueError):
            reference_solution_series(beta, 10, 0.5)

    def test_invalid_term_count_rejected(self):
        with pytest.raises(ValueError):
            reference_solution_series(0.5, 0, 0.5)
        with pytest.raises(ValueError):
            reference_solution_derivative(0.5, 0, 0.5)


class TestErrorNorms:
    def test_matches_parseval_when_resolved(self):
        # 25 frequencies on a 64-cell mesh: the per-cell Gauss rule resolves
        # every mode, so the quadrature reproduces the exact truncated norms
        system = assemble(64)
        zero = np.zeros(system.n_dofs)
        l2, h1 = error_norms(system, zero, 0.5, n_terms=25)
        want_l2, want_h1 = parseval_norms(0.5, 25)
        assert abs(l2 - want_l2) <= 1e-12 * want_l2
        assert abs(h1 - want_h1) <= 1e-12 * want_h1

    def test_near_parseval_with_full_series(self):
        # frequencies far above the mesh alias through the fixed Gauss rule;
        # the L2 series decays fast enough to keep that visible only in the
        # trailing digits, the derivative series is hit harder
        system = assemble(8)
        zero = np.zeros(system.n_dofs)
        l2, h1 = error_norms(system, zero, 0.5, n_terms=5001)
        want_l2, want_h1 = parseval_norms(0.5, 5001)
        assert abs(l2 - want_l2) <= 1e-5 * want_l2
        assert abs(h1 - want_h1) <= 2e-2 * want_h1

    def test_interpolant_converges_quadratically(self):
        errs = []
        for n in (8, 16, 32, 64):
            system = assemble(n)
            u = reference_solution_series(0.6, 9, system.nodes)
            l2, _ = error_norms(system, u, 0.6, n_terms=9)
            errs.append(l2)
        eoc = math.log2(errs[-2] / errs[-1])
        assert 1.9 <= eoc <= 2.1

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            error_norms(assemble(8), np.zeros(6), 0.5)

    def test_invalid_beta_rejected(self):
        with pytest.raises(ValueError):
            error_norms(assemble(8), np.zeros(7), 1.5)

    def test_h1_dominates_l2(self):
        system = assemble(16)
        u = reference_solution_series(0.4, 33, system.nodes)
        l2, h1 = error_norms(system, u, 0.4, n_terms=33)
        assert h1 >= l2
