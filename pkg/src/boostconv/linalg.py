"""Small dense and sparse linear-algebra kernels.

Covers the pieces the accelerators are built from: an incremental skinny-QR
(append a column with a dependency test, drop the oldest column with Givens
rotations), triangular solves, CSR matrix-vector products, and a seeded
power iteration for spectral-radius estimates.
"""

import math
from dataclasses import dataclass

import numpy as np

from .kernels import csr_matvec

__all__ = [
    "SparseMatrixCSR",
    "csr_from_triplets",
    "spmv",
    "back_solve",
    "orth_append",
    "qr_downdate_first",
    "power_iteration",
]


@dataclass
class SparseMatrixCSR:
    """Compressed-sparse-row matrix with sorted, deduplicated columns per row."""

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if self.row_ptr.shape != (self.n_rows + 1,):
            raise ValueError("row_ptr must have length n_rows + 1")
        nnz = len(self.values)
        if len(self.col_idx) != nnz:
            raise ValueError("col_idx and values must have equal length")
        if self.row_ptr[0] != 0 or self.row_ptr[-1] != nnz:
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(self.row_ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if nnz and (self.col_idx.min() < 0 or self.col_idx.max() >= self.n_cols):
            raise ValueError("column index out of bounds")
        for i in range(self.n_rows):
            cols = self.col_idx[self.row_ptr[i] : self.row_ptr[i + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(f"row {i}: column indices must be strictly increasing")

    @property
    def nnz(self) -> int:
        return len(self.values)

    def diagonal(self) -> np.ndarray:
        """Main diagonal as a dense vector (structural zeros included as 0)."""
        d = np.zeros(min(self.n_rows, self.n_cols))
        for i in range(len(d)):
            row_cols = self.col_idx[self.row_ptr[i] : self.row_ptr[i + 1]]
            hit = np.searchsorted(row_cols, i)
            if hit < row_cols.size and row_cols[hit] == i:
                d[i] = self.values[self.row_ptr[i] + hit]
        return d

    def todense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            sl = slice(self.row_ptr[i], self.row_ptr[i + 1])
            out[i, self.col_idx[sl]] = self.values[sl]
        return out


def csr_from_triplets(n_rows, n_cols, rows, cols, vals) -> SparseMatrixCSR:
    """Build a CSR matrix from 0-based COO triplets, summing duplicates."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("triplet arrays must have equal length")
    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols:
            raise ValueError("triplet index out of bounds")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        first = np.ones(rows.size, dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    counts = np.bincount(rows, minlength=n_rows)
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return SparseMatrixCSR(n_rows, n_cols, row_ptr, cols, vals)


def spmv(A: SparseMatrixCSR, x: np.ndarray) -> np.ndarray:
    """y = A x with row-sequential accumulation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n_cols,):
        raise ValueError(f"dimension mismatch: matrix is {A.n_rows}x{A.n_cols}, vector has {x.shape}")
    y = np.empty(A.n_rows)
    csr_matvec(A.row_ptr, A.col_idx, A.values, x, y)
    return y


def back_solve(R: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve R c = y for upper-triangular R by back substitution.

    Raises ValueError when a diagonal entry is zero.
    """
    R = np.asarray(R, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = R.shape[0]
    if R.shape != (m, m) or y.shape != (m,):
        raise ValueError("back_solve: shape mismatch")
    c = np.zeros(m)
    for i in range(m - 1, -1, -1):
        if R[i, i] == 0.0:
            raise ValueError(f"singular triangular factor: zero diagonal at {i}")
        c[i] = (y[i] - R[i, i + 1 :] @ c[i + 1 :]) / R[i, i]
    return c


def orth_append(Q: np.ndarray, R: np.ndarray, v: np.ndarray, tau: float):
    """Try to extend a skinny QR factorization by one column.

    Orthogonalizes ``v`` against the columns of ``Q`` by Gram-Schmidt, with
    one reorthogonalization pass when the first projection removes more than
    half of the norm. The candidate is rejected (returns ``None``) when the
    remainder is shorter than ``tau * ||v||``, or when ``v`` is zero.

    Parameters
    ----------
    Q : (n, m) array with orthonormal columns, m may be 0
    R : (m, m) upper-triangular array
    v : (n,) candidate column
    tau : relative dependency threshold, > 0

    Returns
    -------
    (Q_new, R_new) with one extra column/row, or ``None`` if rejected.
    The new factors reconstruct ``[Q R, v]`` and keep a positive diagonal.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    v = np.asarray(v, dtype=np.float64)
    m = Q.shape[1] if Q.ndim == 2 else 0
    if Q.shape[0] != v.shape[0] or R.shape != (m, m):
        raise ValueError("orth_append: shape mismatch")
    if not np.all(np.isfinite(v)):
        raise ValueError("orth_append: candidate column is not finite")
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return None
    h = Q.T @ v
    q = v - Q @ h
    nq = float(np.linalg.norm(q))
    if nq < 0.5 * nv:
        # second Gram-Schmidt pass; plain one-pass loses orthogonality exactly
        # in the near-dependent regime the tau test has to measure
        h2 = Q.T @ q
        q = q - Q @ h2
        h = h + h2
        nq = float(np.linalg.norm(q))
    if nq < tau * nv:
        return None
    Q_new = np.empty((Q.shape[0], m + 1))
    Q_new[:, :m] = Q
    Q_new[:, m] = q / nq
    R_new = np.zeros((m + 1, m + 1))
    R_new[:m, :m] = R
    R_new[:m, m] = h
    R_new[m, m] = nq
    return Q_new, R_new


def _givens(a: float, b: float):
    # hypot-based radius; returns (c, s) with [c s; -s c] @ [a b]' = [r 0]', r >= 0
    r = math.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def qr_downdate_first(Q: np.ndarray, R: np.ndarray):
    """Remove the first column of a skinny QR factorization.

    Given Q R with m >= 2 columns, triangularizes the upper-Hessenberg
    matrix R[:, 1:] with m-1 Givens rotations and carries the rotations
    into Q, so that the returned (m-1)-column factors reproduce columns
    2..m of the original product. The returned triangle has a nonnegative
    diagonal.
    """
    m = R.shape[0]
    if R.shape != (m, m) or Q.shape[1] != m:
        raise ValueError("qr_downdate_first: shape mismatch")
    if m < 2:
        raise ValueError("qr_downdate_first needs at least 2 columns")
    H = np.array(R[:, 1:], dtype=np.float64)
    Qr = np.array(Q, dtype=np.float64)
    for j in range(m - 1):
        c, s = _givens(H[j, j], H[j + 1, j])
        if s != 0.0:
            rj = c * H[j, j:] + s * H[j + 1, j:]
            H[j + 1, j:] = -s * H[j, j:] + c * H[j + 1, j:]
            H[j, j:] = rj
            qj = c * Qr[:, j] + s * Qr[:, j + 1]
            Qr[:, j + 1] = -s * Qr[:, j] + c * Qr[:, j + 1]
            Qr[:, j] = qj
        H[j + 1, j] = 0.0
    R_new = np.triu(H[: m - 1, :])
    Q_new = Qr[:, : m - 1].copy()
    for i in range(m - 1):
        if R_new[i, i] < 0.0:
            R_new[i, i:] = -R_new[i, i:]
            Q_new[:, i] = -Q_new[:, i]
    return Q_new, R_new


def power_iteration(apply_M, n: int, max_it: int = 20000, tol: float = 1e-12, seed: int = 1234):
    """Estimate the dominant eigenvalue magnitude of a linear operator.

    Runs the power method from a seeded random start and watches the
    magnitude of the Rayleigh quotient; converged when two successive
    magnitudes differ by less than ``tol``.

    The usual power-method caveats apply: when the dominant magnitude is
    attained by two eigenvalues (a +-pair, or a complex pair) the Rayleigh
    quotient can settle on a mixture below the true spectral radius.

    Returns
    -------
    (estimate, converged) : the best estimate and whether the tolerance
    was met within ``max_it`` applications of the operator.
    """
    if max_it < 1:
        raise ValueError("max_it must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    prev = math.inf
    for _ in range(max_it):
        y = apply_M(x)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0, True
        rq = abs(float(x @ y))
        if abs(rq - prev) < tol:
            return rq, True
        prev = rq
        x = y / ny
    return prev, False
