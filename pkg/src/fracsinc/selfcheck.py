"""Fast invariant battery behind the `check` CLI subcommand.

Each check is independent, takes well under a second, and raises on
violation; the runner prints one PASS/FAIL line per check and reports
overall success.  The battery covers scheme construction, quadrature
accuracy, resolvent bounds, the eigensolver, the finite element backend,
and the reference series, so a passing run means the installation computes
what it claims to compute.
"""

from __future__ import annotations

import math
import sys

import numpy as np

from .fem1d import (
    assemble,
    discrete_eigenpairs,
    error_norms,
    l2_project,
    reference_solution_series,
    semidiscrete_solution,
)
from .operators import DenseAccretiveOperator, symmetric_eigendecomposition
from .quadrature import (
    BALANCED,
    UNIFORM,
    apply_quadrature,
    build_scheme,
    scalar_quadrature,
    theoretical_error_bound,
)


def _check_balanced_counts():
    scheme = build_scheme(0.5, 0.5, BALANCED, s_plus=0.0)
    assert scheme.M == 40 and scheme.N == 40, f"expected M=N=40, got {scheme.M}, {scheme.N}"
    w0 = scheme.weights[scheme.M]
    expect = 0.5 * math.sin(math.pi * 0.5) / math.pi
    assert abs(w0 - expect) <= 1e-15, f"center weight {w0} != {expect}"


def _check_uniform_counts():
    scheme = build_scheme(0.5, 0.5, UNIFORM)
    assert scheme.M == 4 and scheme.N == 4, f"expected M=N=4, got {scheme.M}, {scheme.N}"


def _check_scheme_arrays():
    scheme = build_scheme(0.3, 0.4, BALANCED, s_plus=0.0)
    gaps = np.diff(scheme.nodes)
    assert np.all(np.abs(gaps - 0.4) <= 1e-12), "node spacing is not constant"
    assert np.all(scheme.shifts > 0) and np.all(scheme.weights > 0), "nonpositive shift or weight"


def _check_scalar_accuracy():
    scheme = build_scheme(0.5, 0.25, BALANCED, s_plus=0.0)
    got = scalar_quadrature(scheme, 2.0)
    assert abs(got - 2.0**-0.5) <= 1e-6, f"|{got} - 2^-0.5| > 1e-6"


def _check_dense_resolvent():
    op = DenseAccretiveOperator(np.eye(3))
    v = np.array([1.0, -2.0, 0.5])
    assert np.max(np.abs(op.shifted_solve(1.0, v) - v / 2.0)) <= 1e-14
    op = DenseAccretiveOperator(np.diag([1.0, 3.0]))
    got = op.shifted_solve(2.0, np.array([1.0, 1.0]))
    assert np.max(np.abs(got - [1.0 / 3.0, 1.0 / 5.0])) <= 1e-15


def _check_accretivity_bound():
    rng = np.random.default_rng(0)
    b = rng.standard_normal((8, 8))
    op = DenseAccretiveOperator(b @ b.T + np.eye(8))
    for mu in (1e-2, 1.0, 1e4):
        for _ in range(20):
            v = rng.standard_normal(8)
            x = op.shifted_solve(mu, v)
            lhs = np.linalg.norm(x)
            rhs = np.linalg.norm(v) / mu
            assert lhs <= rhs * (1 + 1e-12), f"resolvent bound violated at mu={mu}"


def _check_eigensolver():
    rng = np.random.default_rng(1)
    b = rng.standard_normal((10, 10))
    a = b @ b.T + 10.0 * np.eye(10)
    sd = symmetric_eigendecomposition(a)
    recon = sd.eigenvectors @ np.diag(sd.eigenvalues) @ sd.eigenvectors.T
    scale = np.linalg.norm(a)
    assert np.linalg.norm(recon - a) <= 1e-10 * scale, "reconstruction failed"
    gram = sd.eigenvectors.T @ sd.eigenvectors
    assert np.max(np.abs(gram - np.eye(10))) <= 1e-12, "eigenvectors not orthonormal"


def _check_fem_eigenvalues():
    lam1 = discrete_eigenpairs(assemble(2)).eigenvalues[0]
    assert abs(lam1 - 12.0) <= 1e-12, f"coarsest eigenvalue {lam1} != 12"
    lam1 = discrete_eigenpairs(assemble(512)).eigenvalues[0]
    assert abs(lam1 - math.pi**2) <= 1e-3, f"|{lam1} - pi^2| > 1e-3"


def _check_fem_orthonormality():
    system = assemble(64)
    spectral = discrete_eigenpairs(system)
    gram = spectral.eigenvectors.T @ system.mass_matrix() @ spectral.eigenvectors
    assert np.max(np.abs(gram - np.eye(system.n_dofs))) <= 1e-10, "mass-orthonormality violated"


def _check_spectral_commutation():
    system = assemble(64)
    spectral = discrete_eigenpairs(system)
    f = l2_project(system, 1.0)
    scheme = build_scheme(0.5, 0.4, BALANCED, s_plus=0.0)
    direct = apply_quadrature(scheme, system, f)
    modewise = spectral.reconstruct(
        scalar_quadrature(scheme, spectral.eigenvalues) * spectral.project(f)
    )
    rel = system.mass_norm(direct - modewise) / system.mass_norm(direct)
    assert rel <= 1e-11, f"commutation residual {rel} > 1e-11"


def _check_quadrature_vs_spectral():
    system = assemble(512)
    spectral = discrete_eigenpairs(system)
    f = l2_project(system, 1.0)
    scheme = build_scheme(0.5, 0.2, BALANCED, s_plus=0.0)
    u_k = apply_quadrature(scheme, system, f)
    u_ref = semidiscrete_solution(spectral, 0.5, f)
    err = system.mass_norm(u_k - u_ref)
    bound = theoretical_error_bound(scheme)
    assert err <= 10.0 * bound, f"quadrature error {err} above 10x bound {bound}"


def _check_reference_series():
    ends = reference_solution_series(0.4, 99, [0.0, 1.0])
    # x=1 leaves rounding residue since pi*l is inexact; x=0 is exact.
    assert np.max(np.abs(ends)) <= 1e-12, "series does not vanish at the boundary"
    one = float(reference_solution_series(0.5, 1, 0.5))
    expect = 4.0 / math.pi**2
    assert abs(one - expect) <= 1e-15, f"single-term value {one} != {expect}"
    two = float(reference_solution_series(0.5, 2, 0.5))
    assert two == one, "even-frequency term should contribute nothing"


def _check_interpolation_inequality():
    rng = np.random.default_rng(2)
    b = rng.standard_normal((12, 12))
    a = b @ b.T + np.eye(12)
    sd = symmetric_eigendecomposition(a)
    for s in (0.25, 0.5, 0.75):
        for _ in range(10):
            v = rng.standard_normal(12)
            lhs = np.linalg.norm(sd.apply_power(v, s))
            rhs = np.linalg.norm(a @ v) ** s * np.linalg.norm(v) ** (1 - s)
            assert lhs <= rhs * (1 + 1e-10), f"interpolation inequality violated at s={s}"


def _check_error_norm_parseval():
    # Few enough terms that 7-point Gauss resolves every frequency exactly.
    system = assemble(64)
    zero = np.zeros(system.n_dofs)
    n_terms = 25
    l2, _ = error_norms(system, zero, 0.5, n_terms)
    ells = np.arange(1, n_terms + 1, 2, dtype=float)
    coeff = 4.0 * (math.pi * ells) ** -2.0
    expect = math.sqrt(float(np.sum(coeff**2 * 0.5)))
    assert abs(l2 - expect) <= 1e-12 * expect, f"quadrature norm {l2} != Parseval {expect}"


CHECKS = (
    ("balanced truncation counts", _check_balanced_counts),
    ("uniform truncation counts", _check_uniform_counts),
    ("node spacing and positivity", _check_scheme_arrays),
    ("scalar quadrature accuracy", _check_scalar_accuracy),
    ("dense resolvent solves", _check_dense_resolvent),
    ("resolvent norm bound", _check_accretivity_bound),
    ("rotation eigensolver", _check_eigensolver),
    ("discrete eigenvalue fidelity", _check_fem_eigenvalues),
    ("mass orthonormality", _check_fem_orthonormality),
    ("spectral commutation", _check_spectral_commutation),
    ("quadrature vs spectral reference", _check_quadrature_vs_spectral),
    ("reference series values", _check_reference_series),
    ("interpolation inequality", _check_interpolation_inequality),
    ("error norm Parseval identity", _check_error_norm_parseval),
)


def run_checks(stream=None) -> bool:
    """Run every check, print one PASS/FAIL line each, return overall success."""
    stream = sys.stdout if stream is None else stream
    all_ok = True
    for name, check in CHECKS:
        try:
            check()
        except Exception as exc:
            all_ok = False
            print(f"FAIL {name}: {exc}", file=stream)
        else:
            print(f"PASS {name}", file=stream)
    return all_ok
