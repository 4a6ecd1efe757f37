"""Dense operator backends and the spectral oracle.

DenseAccretiveOperator wraps an explicit n x n matrix and applies shifted
inverses through LU factorization with partial pivoting.  For symmetric
matrices, symmetric_eigendecomposition produces a SpectralData object via
cyclic Jacobi rotations; it serves as the independent reference against
which quadrature results are checked mode by mode.

Matrix exchange format: a plain text file whose first line is n, followed
by n rows of n whitespace-separated decimals.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

from .quadrature import ShiftedSolveOperator


class NumericalError(RuntimeError):
    """A linear-algebra kernel failed: singular system or no convergence."""


class DenseAccretiveOperator(ShiftedSolveOperator):
    """Explicit matrix backend.

    The matrix is assumed accretive (numerical range in the closed right
    half-plane), which makes every shifted system mu I + A, mu > 0,
    invertible; a singular factorization is reported as NumericalError.
    Factorizations can optionally be cached per shift; cached and uncached
    solves reuse the same LU data and therefore agree bit-exactly.
    """

    def __init__(self, matrix, cache_factorizations: bool = False):
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a.setflags(write=False)
        self._matrix = a
        self._cache = {} if cache_factorizations else None

    @property
    def dimension(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def _factorization(self, mu: float):
        if self._cache is not None and mu in self._cache:
            return self._cache[mu]
        shifted = mu * np.eye(self.dimension) + self._matrix
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # scipy warns instead of raising on exact zeros
            lu, piv = scipy.linalg.lu_factor(shifted)
        if np.any(np.diagonal(lu) == 0.0) or not np.all(np.isfinite(lu)):
            raise NumericalError(
                f"shifted system is singular at mu={mu}; matrix is not accretive"
            )
        if self._cache is not None:
            self._cache[mu] = (lu, piv)
        return lu, piv

    def shifted_solve(self, mu, v) -> np.ndarray:
        mu = float(mu)
        if not mu > 0.0 or not math.isfinite(mu):
            raise ValueError(f"shift mu must be positive and finite, got {mu}")
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dimension,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.dimension},)")
        x = scipy.linalg.lu_solve(self._factorization(mu), v)
        if not np.all(np.isfinite(x)):
            raise NumericalError(f"shifted solve produced non-finite entries at mu={mu}")
        return x


class SpectralData:
    """Eigendecomposition of a symmetric matrix in the Euclidean inner product.

    eigenvalues are ascending; eigenvector columns are orthonormal.  Powers
    of the operator act diagonally on the coefficient vector:
    apply_power(v, p) = sum_l lam_l^p (v, psi_l) psi_l.
    """

    def __init__(self, eigenvalues, eigenvectors):
        lam = np.asarray(eigenvalues, dtype=float)
        vecs = np.asarray(eigenvectors, dtype=float)
        if lam.ndim != 1 or vecs.shape != (lam.size, lam.size):
            raise ValueError("need n eigenvalues and an n x n eigenvector matrix")
        lam.setflags(write=False)
        vecs.setflags(write=False)
        self.eigenvalues = lam
        self.eigenvectors = vecs

    def project(self, v) -> np.ndarray:
        """Coefficients (v, psi_l) of v in the eigenbasis."""
        return self.eigenvectors.T @ np.asarray(v, dtype=float)

    def reconstruct(self, coeffs) -> np.ndarray:
        return self.eigenvectors @ np.asarray(coeffs, dtype=float)

    def apply_power(self, v, p: float) -> np.ndarray:
        lam = self.eigenvalues
        if p < 0 and lam.min() <= 0.0:
            raise ValueError("negative powers need strictly positive eigenvalues")
        return self.reconstruct(lam**p * self.project(v))

    def neg_power(self, v, beta: float) -> np.ndarray:
        """A^{-beta} v for beta in (0, 1)."""
        if not 0.0 < beta < 1.0:
            raise ValueError(f"beta must lie strictly in (0, 1), got {beta}")
        return self.apply_power(v, -float(beta))

    def half_power(self, v, r: float) -> np.ndarray:
        """A^{r/2} v for r >= 0 (the smoothness scale of the weighted norms)."""
        if r < 0.0:
            raise ValueError(f"r must be nonnegative, got {r}")
        return self.apply_power(v, 0.5 * float(r))


def symmetric_eigendecomposition(a, tol: float = 1e-13, max_sweeps: int = 100) -> SpectralData:
    """Diagonalize a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away every off-diagonal pair until the off-diagonal
    Frobenius norm drops below tol * ||A||_F.  Intended as an oracle for
    moderate sizes (n <= 200).  Non-symmetric input (beyond a 1e-12
    relative skew) is rejected; use the dense solver for those operators.
    """
    if isinstance(a, DenseAccretiveOperator):
        a = a.matrix
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-12 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric; the spectral oracle requires symmetry")

    w = 0.5 * (a + a.T)  # kill the sub-tolerance skew so sweeps stay symmetric
    v = np.eye(n)
    if scale == 0.0:
        return SpectralData(np.zeros(n), v)

    def off_norm(m):
        # measured from the entries themselves: the ||m||^2 - sum(diag^2)
        # form cancels catastrophically near convergence
        return float(np.linalg.norm(m - np.diag(np.diagonal(m))))

    converged = False
    for _ in range(max_sweeps):
        if off_norm(w) <= tol * scale:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if apq == 0.0:
                    continue
                tau = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = c * col_p - s * col_q
                w[:, q] = s * col_p + c * col_q
                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = c * row_p - s * row_q
                w[q, :] = s * row_p + c * row_q
                # the rotation annihilates this pair exactly; rounding must
                # not be allowed to leave residue behind
                w[p, q] = 0.0
                w[q, p] = 0.0
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        converged = off_norm(w) <= tol * scale
    if not converged:
        raise NumericalError(f"Jacobi sweeps did not converge within {max_sweeps} passes")

    lam = np.diagonal(w).copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = v[:, order]
    # Deterministic sign convention: largest-magnitude component positive.
    for col in range(n):
        lead = np.argmax(np.abs(v[:, col]))
        if v[lead, col] < 0.0:
            v[:, col] = -v[:, col]
    return SpectralData(lam, v)


def read_dense_matrix(path) -> np.ndarray:
    """Read the plain-text dense format: first line n, then n rows of n decimals."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in (raw.strip() for raw in fh) if ln]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"{path}: first line must be the dimension n") from exc
    if n <= 0:
        raise ValueError(f"{path}: dimension must be positive, got {n}")
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:], start=1):
        parts = ln.split()
        if len(parts) != n:
            raise ValueError(f"{path}: row {i} has {len(parts)} entries, expected {n}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}: row {i} contains a non-numeric entry") from exc
    return np.array(rows, dtype=float)


def write_dense_matrix(path, matrix) -> None:
    """Write a square matrix in the plain-text dense format (round-trip exact)."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    lines = [str(a.shape[0])]
    lines.extend(" ".join(repr(float(x)) for x in row) for row in a)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
