"""Compressed-row sparse matrices and the small dense/vector validators.

The CSR container is the one canonical sparse layout in the package; column
access goes through an explicit transpose.  All instances are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .errors import DimensionError, NotSupportedError


def as_vector(x, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate and return a contiguous 1-D float64 array with finite entries."""
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_dense(A, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float64 array."""
    M = np.ascontiguousarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {M.shape}")
    return M


class SparseMatrix:
    """Immutable CSR matrix (float64 values, int64 indices).

    Invariants: `indptr` has nrows+1 nondecreasing entries ending at nnz;
    column indices are strictly increasing within each row (hence no
    duplicate coordinates); explicitly stored zeros are allowed.
    """

    __slots__ = ("nrows", "ncols", "indptr", "indices", "data")

    def __init__(self, nrows, ncols, indptr, indices, data, _checked=False):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        if not _checked:
            self._check()

    def _check(self):
        if self.nrows < 0 or self.ncols < 0:
            raise DimensionError("negative dimension")
        if self.indptr.shape[0] != self.nrows + 1:
            raise DimensionError("indptr must have nrows+1 entries")
        if self.indptr[0] != 0 or self.indptr[-1] != self.data.shape[0]:
            raise ValueError("indptr must start at 0 and end at nnz")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.indices.shape[0] != self.data.shape[0]:
            raise DimensionError("indices and data lengths differ")
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.ncols:
                raise ValueError("column index out of range")
            for i in range(self.nrows):
                lo, hi = self.indptr[i], self.indptr[i + 1]
                if hi - lo > 1 and np.any(np.diff(self.indices[lo:hi]) <= 0):
                    raise ValueError(f"row {i}: column indices not strictly increasing")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("non-finite value in sparse data")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals, sum_duplicates=False):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionError("COO arrays must have equal lengths")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                if not sum_duplicates:
                    raise ValueError("duplicate (row, col) coordinates")
                first = np.concatenate(([True], ~dup))
                group = np.flatnonzero(first)
                vals = np.add.reduceat(vals, group)
                rows, cols = rows[group], cols[group]
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(nrows, ncols, indptr, cols, vals)

    @classmethod
    def from_dense(cls, A, drop_zeros=True):
        A = as_dense(A)
        if drop_zeros:
            rows, cols = np.nonzero(A)
        else:
            rows, cols = np.indices(A.shape).reshape(2, -1)
        return cls.from_coo(A.shape[0], A.shape[1], rows, cols, A[rows, cols])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))

    @classmethod
    def from_diag(cls, d):
        d = as_vector(d, name="diagonal")
        n = d.shape[0]
        return cls(n, n, np.arange(n + 1, dtype=np.int64),
                   np.arange(n, dtype=np.int64), d)

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(nrows, ncols, np.zeros(nrows + 1, dtype=np.int64),
                   np.zeros(0, dtype=np.int64), np.zeros(0))

    @classmethod
    def tridiag(cls, n, lower, diag, upper):
        """n-by-n tridiagonal matrix with constant bands."""
        rows, cols, vals = [], [], []
        i = np.arange(n, dtype=np.int64)
        rows.append(i), cols.append(i), vals.append(np.full(n, float(diag)))
        if n > 1:
            rows.append(i[1:]), cols.append(i[:-1]), vals.append(np.full(n - 1, float(lower)))
            rows.append(i[:-1]), cols.append(i[1:]), vals.append(np.full(n - 1, float(upper)))
        return cls.from_coo(n, n, np.concatenate(rows), np.concatenate(cols),
                            np.concatenate(vals))

    # -- basic queries -------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return int(self.data.shape[0])

    def to_dense(self):
        A = np.zeros((self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        A[rows, self.indices] = self.data
        return A

    def diagonal(self):
        d = np.zeros(min(self.nrows, self.ncols))
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        on = rows == self.indices
        d[rows[on]] = self.data[on]
        return d

    def tridiagonal_part(self):
        """Matrix restricted to entries with |i - j| <= 1."""
        rows = np.repeat(np.arange(self.nrows), np.diff(self.indptr))
        keep = np.abs(rows - self.indices) <= 1
        return SparseMatrix.from_coo(self.nrows, self.ncols, rows[keep],
                                     self.indices[keep], self.data[keep])

    # -- algebra -------------------------------------------------------

    def matvec(self, x):
        x = as_vector(x, self.ncols, "operand")
        return kernels.csr_matvec(self.indptr, self.indices, self.data, x, self.nrows)

    def matmat(self, X):
        """Product with a dense (ncols, k) array."""
        X = as_dense(X)
        if X.shape[0] != self.ncols:
            raise DimensionError("dimension mismatch in sparse-dense product")
        prods = self.data[:, None] * X[self.indices, :]
        cs = np.vstack([np.zeros((1, X.shape[1])), np.cumsum(prods, axis=0)])
        return cs[self.indptr[1:], :] - cs[self.indptr[:-1], :]

    def transpose(self):
        order = np.argsort(self.indices, kind="stable")
        rows = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr))
        indptr = np.zeros(self.ncols + 1, dtype=np.int64)
        np.add.at(indptr, self.indices + 1, 1)
        np.cumsum(indptr, out=indptr)
        return SparseMatrix(self.ncols, self.nrows, indptr, rows[order],
                            self.data[order], _checked=True)

    @property
    def T(self):
        return self.transpose()

    def __matmul__(self, other):
        if isinstance(other, SparseMatrix):
            if self.ncols != other.nrows:
                raise DimensionError("dimension mismatch in sparse product")
            cp, ci, cx = kernels.csr_matmul(
                self.indptr, self.indices, self.data,
                other.indptr, other.indices, other.data,
                self.nrows, other.ncols)
            return SparseMatrix(self.nrows, other.ncols, cp, ci, cx, _checked=True)
        arr = np.asarray(other, dtype=np.float64)
        if arr.ndim == 1:
            return self.matvec(arr)
        return self.matmat(arr)

    def scale_columns(self, d):
        d = as_vector(d, self.ncols, "column scaling")
        return SparseMatrix(self.nrows, self.ncols, self.indptr, self.indices,
                            self.data * d[self.indices], _checked=True)

    def scale(self, alpha):
        return SparseMatrix(self.nrows, self.ncols, self.indptr, self.indices,
                            self.data * float(alpha), _checked=True)

    def add(self, other):
        if self.shape != other.shape:
            raise DimensionError("shape mismatch in sparse add")
        rows_a = np.repeat(np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr))
        rows_b = np.repeat(np.arange(other.nrows, dtype=np.int64), np.diff(other.indptr))
        return SparseMatrix.from_coo(
            self.nrows, self.ncols,
            np.concatenate([rows_a, rows_b]),
            np.concatenate([self.indices, other.indices]),
            np.concatenate([self.data, other.data]), sum_duplicates=True)

    def max_abs(self):
        return float(np.abs(self.data).max()) if self.nnz else 0.0

    def symmetry_gap(self):
        """max |M - M^T| entrywise (0 for exactly symmetric matrices)."""
        if self.nrows != self.ncols:
            raise DimensionError("symmetry defined for square matrices only")
        d = self.add(self.transpose().scale(-1.0))
        return d.max_abs()

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


def kron(A: SparseMatrix, B: SparseMatrix) -> SparseMatrix:
    """Kronecker product: (A (x) B)[i*p+k, j*q+l] = A[i,j] * B[k,l]."""
    out_rows = A.nrows * B.nrows
    out_cols = A.ncols * B.ncols
    if out_rows * out_cols < 0 or A.nnz * B.nnz > 2**40:
        raise NotSupportedError("Kronecker product index range overflow")
    ar = np.repeat(np.arange(A.nrows, dtype=np.int64), np.diff(A.indptr))
    br = np.repeat(np.arange(B.nrows, dtype=np.int64), np.diff(B.indptr))
    rows = np.add.outer(ar * B.nrows, br).ravel()
    cols = np.add.outer(A.indices * B.ncols, B.indices).ravel()
    vals = np.multiply.outer(A.data, B.data).ravel()
    return SparseMatrix.from_coo(out_rows, out_cols, rows, cols, vals)


def block_matrix(blocks, row_dims, col_dims) -> SparseMatrix:
    """Assemble a sparse matrix from a grid of optional sparse blocks."""
    row_off = np.concatenate(([0], np.cumsum(row_dims)))
    col_off = np.concatenate(([0], np.cumsum(col_dims)))
    rows, cols, vals = [], [], []
    for i, brow in enumerate(blocks):
        if len(brow) != len(col_dims):
            raise DimensionError("ragged block row")
        for j, blk in enumerate(brow):
            if blk is None:
                continue
            if blk.shape != (row_dims[i], col_dims[j]):
                raise DimensionError(
                    f"block ({i},{j}) has shape {blk.shape}, expected "
                    f"({row_dims[i]},{col_dims[j]})")
            r = np.repeat(np.arange(blk.nrows, dtype=np.int64), np.diff(blk.indptr))
            rows.append(r + row_off[i])
            cols.append(blk.indices + col_off[j])
            vals.append(blk.data)
    if rows:
        rows, cols, vals = map(np.concatenate, (rows, cols, vals))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    return SparseMatrix.from_coo(int(row_off[-1]), int(col_off[-1]), rows, cols, vals)
