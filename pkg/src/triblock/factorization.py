"""Cholesky factor objects: exact dense, exact sparse, and incomplete with
drop tolerance.  These back the approximation blocks of the preconditioners.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .dense import ABS_FLOOR, chol_solve, dense_cholesky
from .errors import DimensionError, NotSPDError, PivotBreakdownError
from .sparse import SparseMatrix, as_vector

DENSE_THRESHOLD = 2048


@dataclass(frozen=True)
class CholFactor:
    """Lower-triangular factor L with A ~= L L^T.

    kind is one of "exact-dense", "exact-sparse", "incomplete".  Sparse
    factors are stored compressed-column (equivalently, CSR of L^T).
    """

    n: int
    kind: str
    dense_l: np.ndarray | None = None
    col_ptr: np.ndarray | None = None
    col_rows: np.ndarray | None = None
    col_vals: np.ndarray | None = None

    def solve(self, b):
        """(L L^T)^{-1} b; accepts a vector or a dense multi-column block."""
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise DimensionError(f"rhs length {b.shape[0]}, expected {self.n}")
        if self.dense_l is not None:
            return chol_solve(self.dense_l, b)
        if b.ndim == 1:
            b = np.ascontiguousarray(b)
            y = kernels.csc_lower_solve(self.col_ptr, self.col_rows, self.col_vals, b)
            return kernels.csc_lower_solve_t(self.col_ptr, self.col_rows, self.col_vals, y)
        out = np.empty_like(b)
        for j in range(b.shape[1]):
            out[:, j] = self.solve(np.ascontiguousarray(b[:, j]))
        return out

    def solve_lower(self, b):
        """L^{-1} b (half solve, used to symmetrize pencils)."""
        b = np.asarray(b, dtype=np.float64)
        if self.dense_l is not None:
            from .dense import triangular_solve
            return triangular_solve(self.dense_l, b)
        if b.ndim == 1:
            return kernels.csc_lower_solve(self.col_ptr, self.col_rows,
                                           self.col_vals, np.ascontiguousarray(b))
        out = np.empty_like(b)
        for j in range(b.shape[1]):
            out[:, j] = kernels.csc_lower_solve(
                self.col_ptr, self.col_rows, self.col_vals,
                np.ascontiguousarray(b[:, j]))
        return out

    def solve_lower_t(self, b):
        """L^{-T} b."""
        b = np.asarray(b, dtype=np.float64)
        if self.dense_l is not None:
            from .dense import triangular_solve
            return triangular_solve(self.dense_l, b, transpose=True)
        if b.ndim == 1:
            return kernels.csc_lower_solve_t(self.col_ptr, self.col_rows,
                                             self.col_vals, np.ascontiguousarray(b))
        out = np.empty_like(b)
        for j in range(b.shape[1]):
            out[:, j] = kernels.csc_lower_solve_t(
                self.col_ptr, self.col_rows, self.col_vals,
                np.ascontiguousarray(b[:, j]))
        return out

    @property
    def lower_sparse(self) -> SparseMatrix:
        """L as a CSR SparseMatrix."""
        if self.dense_l is not None:
            return SparseMatrix.from_dense(self.dense_l)
        upper = SparseMatrix(self.n, self.n, self.col_ptr, self.col_rows,
                             self.col_vals, _checked=True)
        return upper.transpose()

    def matrix_dense(self) -> np.ndarray:
        """Reassembled L L^T as a dense array."""
        if self.dense_l is not None:
            return self.dense_l @ self.dense_l.T
        L = self.lower_sparse
        return (L @ L.transpose()).to_dense()

    def matrix_sparse(self) -> SparseMatrix:
        L = self.lower_sparse
        return L @ L.transpose()

    @property
    def factor_nnz(self) -> int:
        if self.dense_l is not None:
            return int(np.count_nonzero(self.dense_l))
        return int(self.col_vals.shape[0])


def _column_norms(A: SparseMatrix) -> np.ndarray:
    acc = np.zeros(A.ncols)
    np.add.at(acc, A.indices, A.data * A.data)
    return np.sqrt(acc)


def ichol_droptol(A: SparseMatrix, droptol: float) -> CholFactor:
    """Column-oriented incomplete Cholesky of a symmetric SPD-like matrix.

    An off-diagonal candidate L[i,j] is dropped when
    |L[i,j]| < droptol * ||A[:,j]||_2; the diagonal is never dropped.  With
    droptol = 0 all fill is kept and the factorization is exact.
    """
    if droptol < 0:
        raise ValueError("droptol must be nonnegative")
    if A.nrows != A.ncols:
        raise DimensionError("matrix must be square")
    gap = A.symmetry_gap()
    if gap > 1e-12 * A.max_abs() + ABS_FLOOR:
        raise NotSPDError(f"matrix is not symmetric (gap {gap:.3e})")
    lp, li, lx, bad = kernels.ichol_dt(A.nrows, A.indptr, A.indices, A.data,
                                       float(droptol), _column_norms(A))
    if bad >= 0:
        raise PivotBreakdownError(int(bad))
    kind = "exact-sparse" if droptol == 0.0 else "incomplete"
    return CholFactor(A.nrows, kind, col_ptr=lp, col_rows=li, col_vals=lx)


def dense_factor(A) -> CholFactor:
    """Exact dense Cholesky factor (from a dense array or SparseMatrix)."""
    dense = A.to_dense() if isinstance(A, SparseMatrix) else np.asarray(A, dtype=np.float64)
    L = dense_cholesky(dense)
    return CholFactor(L.shape[0], "exact-dense", dense_l=L)


def factor_spd(A: SparseMatrix, dense_threshold: int = DENSE_THRESHOLD,
               droptol: float = 0.0) -> CholFactor:
    """Factor a symmetric matrix: exact dense at or below the threshold,
    otherwise incomplete (droptol = 0 gives the exact sparse factor)."""
    if A.nrows != A.ncols:
        raise DimensionError("matrix must be square")
    if A.nrows <= dense_threshold:
        gap = A.symmetry_gap()
        if gap > 1e-12 * A.max_abs() + ABS_FLOOR:
            raise NotSPDError(f"matrix is not symmetric (gap {gap:.3e})")
        return dense_factor(A)
    return ichol_droptol(A, droptol)


def solve_chol(factor: CholFactor, b):
    """(L L^T)^{-1} b via the two triangular solves."""
    if np.asarray(b).ndim == 1:
        b = as_vector(b, factor.n, "rhs")
    return factor.solve(b)
