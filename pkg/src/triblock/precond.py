"""The eight block factorization preconditioners.

Each preconditioner is the product of a unit block lower factor, a block
diagonal of (M_A, -S_hat, M_S_hat), and a unit block upper factor; a kind
selects which coupling blocks are active:

    tag   lower (B-row)   upper (B-col)   Schur coupling (C blocks)
    d        -               -               -
    ut       -               x               -
    lt       x               -               -
    f1       x               x               -
    f2       -               -               x
    f3       -               x               x
    f4       x               -               x
    f5       x               x               x

M_A, S_hat, M_S_hat are SPD stand-ins for A, the first Schur complement
B A^{-1} B^T, and the second one D + C S^{-1} C^T; applying the inverse costs
three block substitutions built from their Cholesky factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotSPDError, NotSupportedError
from .factorization import (DENSE_THRESHOLD, CholFactor, dense_factor,
                            factor_spd, ichol_droptol)
from .sparse import SparseMatrix, as_dense, as_vector
from .system import BlockSystem


@dataclass(frozen=True)
class PreconKind:
    tag: str
    lower: bool   # Y_A = M_A^{-1} (unit lower factor carries B M_A^{-1})
    upper: bool   # Z_A = M_A^{-1} (unit upper factor carries M_A^{-1} B^T)
    schur: bool   # W_S = S_hat^{-1} (both C couplings active)

    def __str__(self):
        return self.tag


KINDS = {
    "d": PreconKind("d", False, False, False),
    "ut": PreconKind("ut", False, True, False),
    "lt": PreconKind("lt", True, False, False),
    "f1": PreconKind("f1", True, True, False),
    "f2": PreconKind("f2", False, False, True),
    "f3": PreconKind("f3", False, True, True),
    "f4": PreconKind("f4", True, False, True),
    "f5": PreconKind("f5", True, True, True),
}
ALL_KIND_TAGS = ("d", "ut", "lt", "f1", "f2", "f3", "f4", "f5")


def kind_from_tag(tag) -> PreconKind:
    if isinstance(tag, PreconKind):
        return tag
    try:
        return KINDS[tag]
    except KeyError:
        raise NotSupportedError(f"unknown preconditioner kind {tag!r}") from None


def _densify(mat) -> np.ndarray:
    return mat.to_dense() if isinstance(mat, SparseMatrix) else as_dense(mat)


@dataclass(frozen=True)
class ApproxBlocks:
    """Factored SPD approximation triple plus the assembled Schur stand-ins."""

    m_a: CholFactor
    s_hat: CholFactor
    s_hat_mat: object       # SparseMatrix or dense ndarray
    m_s_hat: CholFactor
    m_s_hat_mat: object
    notes: str = ""

    def dims(self):
        return self.m_a.n, self.s_hat.n, self.m_s_hat.n


def _row_as_dense_vector(M: SparseMatrix, i: int, length: int) -> np.ndarray:
    v = np.zeros(length)
    lo, hi = M.indptr[i], M.indptr[i + 1]
    v[M.indices[lo:hi]] = M.data[lo:hi]
    return v


def _schur_dense(m_a: CholFactor, B: SparseMatrix) -> np.ndarray:
    """B M_A^{-1} B^T as a dense symmetric matrix via half solves."""
    Y = m_a.solve_lower(B.to_dense().T)
    return Y.T @ Y


def _schur_diagonal(m_a: CholFactor, B: SparseMatrix) -> np.ndarray:
    d = np.empty(B.nrows)
    for j in range(B.nrows):
        w = m_a.solve_lower(_row_as_dense_vector(B, j, B.ncols))
        d[j] = w @ w
    return d


def _schur_tridiagonal(m_a: CholFactor, B: SparseMatrix) -> SparseMatrix:
    m = B.nrows
    diag = np.empty(m)
    off = np.empty(max(m - 1, 0))
    prev = None
    for j in range(m):
        w = m_a.solve_lower(_row_as_dense_vector(B, j, B.ncols))
        diag[j] = w @ w
        if prev is not None:
            off[j - 1] = prev @ w
        prev = w
    rows = [np.arange(m, dtype=np.int64)]
    cols = [np.arange(m, dtype=np.int64)]
    vals = [diag]
    if m > 1:
        i = np.arange(m - 1, dtype=np.int64)
        rows += [i, i + 1]
        cols += [i + 1, i]
        vals += [off, off]
    return SparseMatrix.from_coo(m, m, np.concatenate(rows),
                                 np.concatenate(cols), np.concatenate(vals))


def _second_schur_dense(sys: BlockSystem, s_hat: CholFactor) -> np.ndarray:
    """D + C S_hat^{-1} C^T densely (symmetrized against roundoff)."""
    Y = s_hat.solve_lower(sys.C.to_dense().T)
    T = Y.T @ Y + sys.D.to_dense()
    return 0.5 * (T + T.T)


def _factor_matrix(mat, dense_threshold) -> CholFactor:
    if isinstance(mat, SparseMatrix):
        return factor_spd(mat, dense_threshold)
    return dense_factor(mat)


def build_blocks(sys: BlockSystem, recipe: str,
                 dense_threshold: int = DENSE_THRESHOLD,
                 droptol: float = 1e-8,
                 custom=None) -> ApproxBlocks:
    """Assemble and factor (M_A, S_hat, M_S_hat) for a named recipe.

    Recipes (Schur stand-ins requiring dense assembly need the relevant
    dimensions at or below dense_threshold, otherwise NotSupported):

      ex61    M_A = A,            S_hat = B B^T,                M_S_hat = C S_hat^{-1} C^T
      ex62    M_A = ichol(A),     S_hat = diag(B M_A^{-1} B^T), M_S_hat = C S_hat^{-1} C^T
      ex63    M_A = A,            S_hat = B M_A^{-1} B^T + 0.1 I,
                                                                M_S_hat = D + C S_hat^{-1} C^T
      ex64    M_A = A,            S_hat = B M_A^{-1} B^T + 0.01 diag(same),
                                                                M_S_hat = D + C S_hat^{-1} C^T
      ex65    M_A = ichol(A),     S_hat = tridiag(B M_A^{-1} B^T),
                                                                M_S_hat = D + C S_hat^{-1} C^T
      exact   M_A = A,            S_hat = B A^{-1} B^T,         M_S_hat = D + S^{-1}-coupled
      custom  caller-supplied matrices/factors via the `custom` mapping
    """
    n, m, l = sys.n, sys.m, sys.l

    def need_dense(*dims):
        if max(dims) > dense_threshold:
            raise NotSupportedError(
                f"recipe {recipe!r} forms dense Schur blocks; dimensions "
                f"{dims} exceed the dense threshold {dense_threshold}")

    if recipe == "ex61":
        m_a = factor_spd(sys.A, dense_threshold)
        s_mat = sys.B @ sys.B.transpose()
        s_hat = factor_spd(s_mat, dense_threshold)
        need_dense(m, l)
        T = sys.C.matmat(s_hat.solve(sys.C.to_dense().T))
        ms_mat = 0.5 * (T + T.T)
        ms_hat = dense_factor(ms_mat)
        notes = "M_A=A, S_hat=B*B^T, M_S_hat=C*S_hat^{-1}*C^T"
    elif recipe == "ex62":
        m_a = ichol_droptol(sys.A, droptol)
        d = _schur_diagonal(m_a, sys.B)
        if np.any(d <= 0):
            raise NotSPDError("diagonal Schur stand-in has a nonpositive entry")
        s_mat = SparseMatrix.from_diag(d)
        s_hat = CholFactor(m, "exact-sparse",
                           col_ptr=np.arange(m + 1, dtype=np.int64),
                           col_rows=np.arange(m, dtype=np.int64),
                           col_vals=np.sqrt(d))
        ms_mat = sys.C.scale_columns(1.0 / d) @ sys.C.transpose()
        ms_hat = factor_spd(ms_mat, dense_threshold)
        notes = f"M_A=ichol(A,{droptol:g}), S_hat=diag(B*M_A^-1*B^T), M_S_hat=C*S_hat^-1*C^T"
    elif recipe in ("ex63", "ex64"):
        m_a = factor_spd(sys.A, dense_threshold)
        need_dense(m, l)
        S1 = _schur_dense(m_a, sys.B)
        if recipe == "ex63":
            s_mat = S1 + 0.1 * np.eye(m)
            notes = "M_A=A, S_hat=B*M_A^-1*B^T+0.1I, M_S_hat=D+C*S_hat^-1*C^T"
        else:
            s_mat = S1 + 0.01 * np.diag(np.diag(S1))
            notes = "M_A=A, S_hat=B*M_A^-1*B^T+0.01diag, M_S_hat=D+C*S_hat^-1*C^T"
        s_hat = dense_factor(s_mat)
        ms_mat = _second_schur_dense(sys, s_hat)
        ms_hat = dense_factor(ms_mat)
    elif recipe == "ex65":
        m_a = ichol_droptol(sys.A, droptol)
        s_mat = _schur_tridiagonal(m_a, sys.B)
        s_hat = factor_spd(s_mat, dense_threshold)
        need_dense(m, l)
        ms_mat = _second_schur_dense(sys, s_hat)
        ms_hat = dense_factor(ms_mat)
        notes = f"M_A=ichol(A,{droptol:g}), S_hat=tridiag(B*M_A^-1*B^T), M_S_hat=D+C*S_hat^-1*C^T"
    elif recipe == "exact":
        need_dense(n, m, l)
        m_a = factor_spd(sys.A, dense_threshold)
        s_mat = _schur_dense(m_a, sys.B)
        s_hat = dense_factor(s_mat)
        ms_mat = _second_schur_dense(sys, s_hat)
        ms_hat = dense_factor(ms_mat)
        notes = "exact: M_A=A, S_hat=B*A^-1*B^T, M_S_hat=D+C*S^-1*C^T"
    elif recipe == "custom":
        if not custom:
            raise NotSupportedError("custom recipe needs the `custom` mapping")
        m_a = custom["m_a"] if isinstance(custom["m_a"], CholFactor) \
            else _factor_matrix(custom["m_a"], dense_threshold)
        s_src = custom["s_hat"]
        s_mat = s_src if not isinstance(s_src, CholFactor) else None
        s_hat = s_src if isinstance(s_src, CholFactor) \
            else _factor_matrix(s_src, dense_threshold)
        if s_mat is None:
            s_mat = s_hat.matrix_dense()
        ms_src = custom["m_s_hat"]
        ms_mat = ms_src if not isinstance(ms_src, CholFactor) else None
        ms_hat = ms_src if isinstance(ms_src, CholFactor) \
            else _factor_matrix(ms_src, dense_threshold)
        if ms_mat is None:
            ms_mat = ms_hat.matrix_dense()
        notes = custom.get("notes", "custom blocks")
    else:
        raise NotSupportedError(f"unknown recipe {recipe!r}")

    blocks = ApproxBlocks(m_a, s_hat, s_mat, ms_hat, ms_mat, notes=notes)
    if blocks.dims() != (n, m, l):
        raise DimensionError(f"blocks dims {blocks.dims()} do not match system "
                             f"({n}, {m}, {l})")
    return blocks


class BlockPreconditioner:
    """Apply-inverse operator for one preconditioner kind over factored blocks."""

    def __init__(self, kind, blocks: ApproxBlocks, sys: BlockSystem):
        self.kind = kind_from_tag(kind)
        self.blocks = blocks
        self.n, self.m, self.l = sys.n, sys.m, sys.l
        if blocks.dims() != (self.n, self.m, self.l):
            raise DimensionError("approximation blocks do not match the system")
        self.B = sys.B
        self.C = sys.C
        self.Bt = sys.B.transpose()
        self.Ct = sys.C.transpose()

    @property
    def size(self):
        return self.n + self.m + self.l

    def apply_inverse(self, r):
        """M^{-1} r via forward, diagonal, and backward block substitutions."""
        r = as_vector(r, self.size, "residual")
        n, m = self.n, self.m
        k = self.kind
        bl = self.blocks
        r1, r2, r3 = r[:n], r[n:n + m], r[n + m:]
        s1 = bl.m_a.solve(r1)
        t2 = r2 - self.B.matvec(s1) if k.lower else r2
        s2 = bl.s_hat.solve(t2)
        t3 = r3 + self.C.matvec(s2) if k.schur else r3
        s3 = bl.m_s_hat.solve(t3)
        z3 = s3
        z2 = -s2
        if k.schur:
            z2 = z2 + bl.s_hat.solve(self.Ct.matvec(z3))
        z1 = s1
        if k.upper:
            z1 = z1 - bl.m_a.solve(self.Bt.matvec(z2))
        return np.concatenate([z1, z2, z3])

    def __call__(self, r):
        return self.apply_inverse(r)

    def materialize_dense(self) -> np.ndarray:
        """Explicit dense preconditioner matrix (validation at desk scale)."""
        n, m, l = self.n, self.m, self.l
        N = n + m + l
        k = self.kind
        bl = self.blocks
        Lf = np.eye(N)
        U = np.eye(N)
        Dm = np.zeros((N, N))
        Dm[:n, :n] = bl.m_a.matrix_dense()
        Dm[n:n + m, n:n + m] = -_densify(bl.s_hat_mat)
        Dm[n + m:, n + m:] = _densify(bl.m_s_hat_mat)
        if k.lower or k.upper:
            MinvBt = bl.m_a.solve(self.Bt.to_dense())
            if k.lower:
                Lf[n:n + m, :n] = MinvBt.T
            if k.upper:
                U[:n, n:n + m] = MinvBt
        if k.schur:
            SinvCt = bl.s_hat.solve(self.Ct.to_dense())
            Lf[n + m:, n:n + m] = -SinvCt.T
            U[n:n + m, n + m:] = -SinvCt
        return Lf @ Dm @ U


def build_preconditioner(sys: BlockSystem, kind, recipe: str,
                         dense_threshold: int = DENSE_THRESHOLD,
                         droptol: float = 1e-8) -> BlockPreconditioner:
    return BlockPreconditioner(kind, build_blocks(sys, recipe, dense_threshold,
                                                  droptol), sys)
