"""Shared linear-algebra helpers.

Half-vectorization (vech) encodes a symmetric n x n matrix by its lower
triangle, column by column: entries (i, j) with i >= j, j ascending, i
ascending within each column.  That gives n(n+1)/2 free coordinates, so
symmetry is built into the unknown layout of every reconstruction system
instead of being imposed with extra equality rows.

Numerical rank follows the convention used throughout the package: singular
values below max(shape) * sigma_max * machine_epsilon * tol_factor count as
zero, with tol_factor defaulting to 64.
"""
from __future__ import annotations

import numpy as np

EPS = float(np.finfo(np.float64).eps)
DEFAULT_TOL_FACTOR = 64.0


def vech_index_pairs(n: int) -> list[tuple[int, int]]:
    """(row, col) pairs of the lower triangle in vech order."""
    return [(i, j) for j in range(n) for i in range(j, n)]


def vech(matrix: np.ndarray) -> np.ndarray:
    """Stack the lower triangle of a symmetric matrix into a vector."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    return np.array([matrix[i, j] for i, j in vech_index_pairs(n)])


def unvech(vector: np.ndarray, n: int) -> np.ndarray:
    """Inverse of vech: rebuild the full symmetric matrix."""
    vector = np.asarray(vector, dtype=float)
    if vector.size != n * (n + 1) // 2:
        raise ValueError(f"vech vector has {vector.size} entries, expected {n * (n + 1) // 2}")
    out = np.zeros((n, n))
    for value, (i, j) in zip(vector, vech_index_pairs(n)):
        out[i, j] = value
        out[j, i] = value
    return out


def duplication_matrix(n: int) -> np.ndarray:
    """D with vec(S) = D @ vech(S) for symmetric S (vec is column-major)."""
    cols = n * (n + 1) // 2
    D = np.zeros((n * n, cols))
    for col, (i, j) in enumerate(vech_index_pairs(n)):
        D[i + j * n, col] = 1.0
        if i != j:
            D[j + i * n, col] = 1.0
    return D


def symmetric_row_block(x: np.ndarray) -> np.ndarray:
    """n x n(n+1)/2 block B with B @ vech(S) = S @ x for symmetric S.

    This is (x^T kron I) restricted to the symmetric subspace via the
    duplication matrix, written out directly.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    block = np.zeros((n, n * (n + 1) // 2))
    for col, (i, j) in enumerate(vech_index_pairs(n)):
        block[i, col] += x[j]
        if i != j:
            block[j, col] += x[i]
    return block


def singular_values(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    return np.linalg.svd(matrix, compute_uv=False)


def rank_tolerance(matrix: np.ndarray, sigma: np.ndarray, tol_factor: float = DEFAULT_TOL_FACTOR) -> float:
    if sigma.size == 0:
        return 0.0
    return max(matrix.shape) * float(sigma[0]) * EPS * tol_factor


def numerical_rank(matrix: np.ndarray, tol_factor: float = DEFAULT_TOL_FACTOR):
    """(rank, singular_values, tolerance) under the package rank convention."""
    sigma = singular_values(matrix)
    tol = rank_tolerance(matrix, sigma, tol_factor)
    rank = int(np.sum(sigma > tol))
    return rank, sigma, tol


def nullspace(matrix: np.ndarray, tol_factor: float = DEFAULT_TOL_FACTOR):
    """(basis, rank, sigma, tol): orthonormal basis (cols) of the numerical nullspace."""
    rows, cols = matrix.shape
    _, sigma_full, vt = np.linalg.svd(matrix, full_matrices=True)
    sigma = sigma_full
    tol = rank_tolerance(matrix, sigma, tol_factor)
    rank = int(np.sum(sigma > tol))
    basis = vt[rank:].T.copy()
    return basis, rank, sigma, tol


def solve_least_squares(matrix: np.ndarray, rhs: np.ndarray, tol_factor: float = DEFAULT_TOL_FACTOR):
    """SVD least squares with one extended-precision refinement pass.

    Returns (solution, residual_norm, rank, sigma, tol).  The refinement step
    computes the residual in long double before re-solving, which recovers a
    few digits on ill-conditioned consistent systems (tight step sizes make
    the iterate stack nearly Krylov-degenerate) without changing behavior on
    well-conditioned ones.  Fully deterministic.
    """
    u, sigma, vt = np.linalg.svd(matrix, full_matrices=False)
    tol = rank_tolerance(matrix, sigma, tol_factor)
    rank = int(np.sum(sigma > tol))
    inv = np.zeros_like(sigma)
    inv[:rank] = 1.0 / sigma[:rank]

    def apply_pinv(vec: np.ndarray) -> np.ndarray:
        return vt.T @ (inv * (u.T @ vec))

    solution = apply_pinv(rhs)
    matrix_ld = matrix.astype(np.longdouble)
    rhs_ld = rhs.astype(np.longdouble)
    for _ in range(2):
        residual_ld = rhs_ld - matrix_ld @ solution.astype(np.longdouble)
        correction = apply_pinv(residual_ld.astype(np.float64))
        updated = solution + correction
        if not np.all(np.isfinite(updated)):
            break
        solution = updated
    residual = float(np.linalg.norm((rhs_ld - matrix_ld @ solution.astype(np.longdouble)).astype(np.float64)))
    return solution, residual, rank, sigma, tol
