"""Piecewise-linear finite elements on a uniform mesh of the unit interval.

The model operator is -u'' (+ optional convection b u') on (0, 1) with
homogeneous Dirichlet conditions, discretized with hat functions on
n_cells equal cells of width h = 1/n_cells.  Interior nodes x_j = j h,
j = 1 .. n_cells-1, carry the unknowns.  The element matrices are
tridiagonal with constant rows

    mass      M:  (h/6) [1, 4, 1]
    stiffness S:  (1/h) [-1, 2, -1]   plus  (b/2) [-1, 0, 1]  if b != 0.

Shifted systems (mu M + S) c = M v are solved by the Thomas algorithm;
no pivoting is needed because mu M + S is strictly diagonally dominant
for every mu > 0.

For b = 0 the generalized eigenpairs S psi = lambda M psi are known in
closed form,

    lambda_l = 6 (1 - cos(l pi h)) / (h^2 (2 + cos(l pi h))),
    psi_l(x_j) = sqrt(6 / (2 + cos(l pi h))) sin(l pi j h),

with the scaling making the eigenvectors orthonormal in the M-weighted
inner product.  They feed the semidiscrete reference solutions and the
fractional norms e(v, r) = (sum_l lambda_l^r (v, psi_l)_M^2)^{1/2}.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import ShiftedSolveOperator

# Per-cell Gauss-Legendre rule for error integration.  Seven points are
# exact through polynomial degree 13, comfortably past the required
# degree-5 exactness, and sample the reference series densely enough for
# stable convergence rates.
GAUSS_POINTS = 7

# Chunk length for series evaluation; fixed so that results are reproducible.
_SERIES_CHUNK = 2048


def thomas(lower, diag, upper, rhs) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    `lower` and `upper` are the sub- and super-diagonals (length n-1), `diag`
    the main diagonal (length n).  No pivoting: callers must supply strictly
    diagonally dominant systems, which mu M + S and M always are.
    """
    diag = np.asarray(diag, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    if rhs.shape != (n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({n},)")
    if n == 1:
        return np.array([rhs[0] / diag[0]])
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    cp = np.empty(n - 1)
    xp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    xp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / den
        xp[i] = (rhs[i] - lower[i - 1] * xp[i - 1]) / den
    x = np.empty(n)
    x[-1] = xp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = xp[i] - cp[i] * x[i + 1]
    return x


def _thomas_many(lower, diag, upper, rhs) -> np.ndarray:
    """Thomas sweeps vectorized across a batch of systems.

    All arguments carry a leading batch axis; the elimination recurrence is
    elementwise per system, so each row is bit-identical to the single-system
    solve with the same bands.
    """
    b, n = diag.shape
    if n == 1:
        return rhs / diag
    cp = np.empty((b, n - 1))
    xp = np.empty((b, n))
    cp[:, 0] = upper[:, 0] / diag[:, 0]
    xp[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, n):
        den = diag[:, i] - lower[:, i - 1] * cp[:, i - 1]
        if i < n - 1:
            cp[:, i] = upper[:, i] / den
        xp[:, i] = (rhs[:, i] - lower[:, i - 1] * xp[:, i - 1]) / den
    x = np.empty((b, n))
    x[:, -1] = xp[:, -1]
    for i in range(n - 2, -1, -1):
        x[:, i] = xp[:, i] - cp[:, i] * x[:, i + 1]
    return x


class Fem1dSystem(ShiftedSolveOperator):
    """Assembled mass and stiffness bands for the uniform Dirichlet mesh."""

    def __init__(self, n_cells: int, convection: float = 0.0):
        n_cells = int(n_cells)
        if n_cells < 2:
            raise ValueError(f"need at least 2 cells (one interior node), got {n_cells}")
        convection = float(convection)
        if not math.isfinite(convection):
            raise ValueError("convection coefficient must be finite")
        self.n_cells = n_cells
        self.convection = convection
        self.h = 1.0 / n_cells
        self.n_dofs = n_cells - 1

        h, b, d = self.h, convection, self.n_dofs
        self.mass_diag = np.full(d, 2.0 * h / 3.0)
        self.mass_off = np.full(d - 1, h / 6.0)
        self.stiff_diag = np.full(d, 2.0 / h)
        self.stiff_lower = np.full(d - 1, -1.0 / h - b / 2.0)
        self.stiff_upper = np.full(d - 1, -1.0 / h + b / 2.0)
        for a in (self.mass_diag, self.mass_off, self.stiff_diag,
                  self.stiff_lower, self.stiff_upper):
            a.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.n_dofs

    @property
    def nodes(self) -> np.ndarray:
        """Interior node coordinates x_j = j h, j = 1 .. n_cells - 1."""
        return self.h * np.arange(1, self.n_cells)

    def mass_matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.mass_diag * v
        if self.n_dofs > 1:
            out[:-1] += self.mass_off * v[1:]
            out[1:] += self.mass_off * v[:-1]
        return out

    def stiffness_matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.stiff_diag * v
        if self.n_dofs > 1:
            out[:-1] += self.stiff_upper * v[1:]
            out[1:] += self.stiff_lower * v[:-1]
        return out

    def mass_matrix(self) -> np.ndarray:
        m = np.diag(self.mass_diag)
        if self.n_dofs > 1:
            m += np.diag(self.mass_off, 1) + np.diag(self.mass_off, -1)
        return m

    def stiffness_matrix(self) -> np.ndarray:
        s = np.diag(self.stiff_diag)
        if self.n_dofs > 1:
            s += np.diag(self.stiff_upper, 1) + np.diag(self.stiff_lower, -1)
        return s

    def mass_norm(self, v) -> float:
        """L2 norm of the piecewise-linear function with coefficients v."""
        v = np.asarray(v, dtype=float)
        return math.sqrt(float(v @ self.mass_matvec(v)))

    def mass_solve(self, rhs) -> np.ndarray:
        return thomas(self.mass_off, self.mass_diag, self.mass_off, rhs)

    def shifted_solve(self, mu, v) -> np.ndarray:
        """Solve (mu M + S) c = M v, the coordinate form of (mu I + A_h)^{-1} v."""
        mu = float(mu)
        if not mu > 0.0 or not math.isfinite(mu):
            raise ValueError(f"shift mu must be positive and finite, got {mu}")
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_dofs,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.n_dofs},)")
        return thomas(
            mu * self.mass_off + self.stiff_lower,
            mu * self.mass_diag + self.stiff_diag,
            mu * self.mass_off + self.stiff_upper,
            self.mass_matvec(v),
        )

    def shifted_solve_many(self, mus, v) -> np.ndarray:
        mus = np.asarray(mus, dtype=float)
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_dofs,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.n_dofs},)")
        if mus.ndim != 1:
            raise ValueError("mus must be one-dimensional")
        if not np.all(np.isfinite(mus)) or np.any(mus <= 0.0):
            raise ValueError("all shifts must be positive and finite")
        mv = self.mass_matvec(v)
        col = mus[:, None]
        return _thomas_many(
            col * self.mass_off + self.stiff_lower,
            col * self.mass_diag + self.stiff_diag,
            col * self.mass_off + self.stiff_upper,
            np.broadcast_to(mv, (mus.size, self.n_dofs)).copy(),
        )


def assemble(n_cells: int, convection: float = 0.0) -> Fem1dSystem:
    """Build the mass/stiffness system for the uniform Dirichlet mesh."""
    return Fem1dSystem(n_cells, convection)


def l2_project(system: Fem1dSystem, f) -> np.ndarray:
    """L2 projection of f onto the hat-function space: solve M c = (f, phi_i).

    f may be a constant (the load integrals are then exact, (f, phi_i) = f h)
    or a callable evaluated on arrays; callable loads use 3-point Gauss per
    cell, exact through degree 5.
    """
    d, h, n = system.n_dofs, system.h, system.n_cells
    if callable(f):
        gx, gw = np.polynomial.legendre.leggauss(3)
        left_edges = h * np.arange(n)
        pts = left_edges[:, None] + (gx[None, :] + 1.0) * (h / 2.0)
        vals = np.asarray(f(pts), dtype=float) * (gw * h / 2.0)
        t = (gx + 1.0) / 2.0  # local coordinate of each Gauss point
        rising = vals * t          # basis of the cell's right node
        falling = vals * (1.0 - t)  # basis of the cell's left node
        right_load = rising.sum(axis=1)   # cell c -> node c+1
        left_load = falling.sum(axis=1)   # cell c -> node c
        load = right_load[:-1] + left_load[1:]
    else:
        load = np.full(d, float(f) * h)
    return system.mass_solve(load)


class FemSpectralData:
    """Closed-form generalized eigenpairs of (S, M), orthonormal in M.

    project(v) returns the M-weighted coefficients (v, psi_l)_M, and
    apply_power acts diagonally: sum_l lambda_l^p (v, psi_l)_M psi_l.
    """

    def __init__(self, system: Fem1dSystem, eigenvalues, eigenvectors):
        self.system = system
        lam = np.asarray(eigenvalues, dtype=float)
        vecs = np.asarray(eigenvectors, dtype=float)
        lam.setflags(write=False)
        vecs.setflags(write=False)
        self.eigenvalues = lam
        self.eigenvectors = vecs

    def project(self, v) -> np.ndarray:
        return self.eigenvectors.T @ self.system.mass_matvec(v)

    def reconstruct(self, coeffs) -> np.ndarray:
        return self.eigenvectors @ np.asarray(coeffs, dtype=float)

    def apply_power(self, v, p: float) -> np.ndarray:
        return self.reconstruct(self.eigenvalues**p * self.project(v))

    def neg_power(self, v, beta: float) -> np.ndarray:
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie strictly in (0, 1), got {beta}")
        return self.apply_power(v, -float(beta))

    def half_power(self, v, r: float) -> np.ndarray:
        if r < 0.0:
            raise ValueError(f"r must be nonnegative, got {r}")
        return self.apply_power(v, 0.5 * float(r))

    def fractional_norm(self, v, r: float) -> float:
        """Discrete smoothness-weighted norm (sum_l lambda_l^r (v, psi_l)_M^2)^{1/2}.

        r = 0 recovers the M-norm, r = 1 the discrete energy norm, r = 2 the
        norm of A_h v in M.
        """
        if r < 0.0:
            raise ValueError(f"r must be nonnegative, got {r}")
        c = self.project(v)
        return math.sqrt(float(np.sum(self.eigenvalues**r * c * c)))


def discrete_eigenpairs(system: Fem1dSystem) -> FemSpectralData:
    """Closed-form eigenpairs of the discrete Dirichlet Laplacian.

    Only available for pure diffusion; the convection term breaks symmetry
    and the sine eigenvectors with it.
    """
    if system.convection != 0.0:
        raise ValueError("closed-form eigenpairs require zero convection")
    h, d = system.h, system.n_dofs
    ell = np.arange(1, d + 1, dtype=float)
    cos_l = np.cos(ell * math.pi * h)
    eigenvalues = 6.0 * (1.0 - cos_l) / (h * h * (2.0 + cos_l))
    scale = np.sqrt(6.0 / (2.0 + cos_l))
    j = np.arange(1, d + 1, dtype=float)
    eigenvectors = np.sin(math.pi * h * np.outer(j, ell)) * scale[None, :]
    return FemSpectralData(system, eigenvalues, eigenvectors)


def fractional_norm(spectral: FemSpectralData, v, r: float) -> float:
    return spectral.fractional_norm(v, r)


def semidiscrete_solution(spectral: FemSpectralData, beta: float, f_coeffs) -> np.ndarray:
    """Exact discrete fractional solve: sum_l lambda_l^{-beta} (f, psi_l)_M psi_l."""
    return spectral.neg_power(f_coeffs, beta)


def _odd_frequencies(n_terms: int) -> np.ndarray:
    """Descending odd frequencies up to n_terms; even ones contribute nothing."""
    top = n_terms if n_terms % 2 == 1 else n_terms - 1
    return np.arange(top, 0, -2, dtype=float)


def _series_eval(beta: float, n_terms: int, x: np.ndarray, derivative: bool) -> np.ndarray:
    ells = _odd_frequencies(n_terms)
    out = np.zeros_like(x)
    # High frequencies first: their contributions are smallest, so adding
    # them before the large low-frequency terms keeps rounding down.
    for start in range(0, ells.size, _SERIES_CHUNK):
        w = math.pi * ells[start:start + _SERIES_CHUNK]
        coef = 2.0 * w ** (-2.0 * beta) * (2.0 / w)
        ang = np.outer(x, w)
        if derivative:
            out += np.cos(ang) @ (coef * w)
        else:
            out += np.sin(ang) @ coef
    return out


def _check_series_args(beta, n_terms):
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie strictly in (0, 1), got {beta}")
    if int(n_terms) < 1:
        raise ValueError(f"need at least one series term, got {n_terms}")


def reference_solution_series(beta: float, n_terms: int, points) -> np.ndarray:
    """Truncated eigenfunction expansion of the exact solution of A^beta u = 1:

        u(x) = 2 sum_{l odd} (pi l)^{-2 beta} ((1 - (-1)^l)/(pi l)) sin(pi l x),

    the expansion of A^{-beta} 1 with lambda_l = (pi l)^2 and normalized sine
    eigenfunctions.  Terms are accumulated from the high-frequency end.
    """
    _check_series_args(beta, n_terms)
    arr = np.asarray(points, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    vals = _series_eval(float(beta), int(n_terms), flat, derivative=False)
    return vals.reshape(arr.shape)


def reference_solution_derivative(beta: float, n_terms: int, points) -> np.ndarray:
    """Term-wise derivative of reference_solution_series (for H1 errors)."""
    _check_series_args(beta, n_terms)
    arr = np.asarray(points, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    vals = _series_eval(float(beta), int(n_terms), flat, derivative=True)
    return vals.reshape(arr.shape)


def error_norms(system: Fem1dSystem, u_hk, beta: float, n_terms: int = 50000):
    """L2 and full H1 errors between the reference series and a discrete solution.

    u_hk holds interior nodal coefficients of a piecewise-linear function
    (boundary values zero).  Both integrals use GAUSS_POINTS-point Gauss per
    cell with the series and its term-wise derivative evaluated at the
    quadrature points.  Returns (l2_error, h1_error); the H1 error includes
    the L2 part.
    """
    u_hk = np.asarray(u_hk, dtype=float)
    if u_hk.shape != (system.n_dofs,):
        raise ValueError(f"u_hk has shape {u_hk.shape}, expected ({system.n_dofs},)")
    _check_series_args(beta, n_terms)

    n, h = system.n_cells, system.h
    gx, gw = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    left_edges = h * np.arange(n)
    pts = (left_edges[:, None] + (gx[None, :] + 1.0) * (h / 2.0)).ravel()
    wts = np.tile(gw * h / 2.0, n)

    u = _series_eval(float(beta), int(n_terms), pts, derivative=False)
    du = _series_eval(float(beta), int(n_terms), pts, derivative=True)

    c = np.concatenate(([0.0], u_hk, [0.0]))
    t = np.tile((gx + 1.0) / 2.0, n)
    v = np.repeat(c[:-1], GAUSS_POINTS) * (1.0 - t) + np.repeat(c[1:], GAUSS_POINTS) * t
    dv = np.repeat(np.diff(c) / h, GAUSS_POINTS)

    l2_sq = float(np.sum(wts * (u - v) ** 2))
    h1_sq = l2_sq + float(np.sum(wts * (du - dv) ** 2))
    return math.sqrt(l2_sq), math.sqrt(h1_sq)
