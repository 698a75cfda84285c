"""Three-by-three block saddle-point systems.

Standard arrangement:

    [ A   B^T  0  ] [x]   [f]
    [ B   0    C^T] [y] = [g]
    [ 0   C    D  ] [z]   [h]

with A (n x n) SPD, B (m x n) of full row rank (m <= n), D (l x l) symmetric
positive semidefinite, and C (l x m) of full row rank whenever D is singular.
The hat arrangement permutes the second and third block rows/columns and
flips one sign:

    [ A    0    B^T] [x]   [ f]
    [ 0    D    C  ] [z] = [ h]
    [-B  -C^T   0  ] [y]   [-g]

Both forms describe the same solution (x, y, z).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dense import dense_cholesky, row_rank, symmetric_eigen
from .errors import DimensionError, NotSPDError
from .factorization import DENSE_THRESHOLD
from .sparse import SparseMatrix, as_vector, block_matrix


def _check_blocks(A, B, C, D, f, g, h):
    n, m, l = A.nrows, B.nrows, C.nrows
    if A.ncols != n:
        raise DimensionError("A must be square")
    if B.ncols != n:
        raise DimensionError(f"B has {B.ncols} columns, expected {n}")
    if C.ncols != m:
        raise DimensionError(f"C has {C.ncols} columns, expected {m}")
    if D.nrows != l or D.ncols != l:
        raise DimensionError(f"D must be {l}x{l}, got {D.shape}")
    as_vector(f, n, "f")
    as_vector(g, m, "g")
    as_vector(h, l, "h")


@dataclass(frozen=True)
class BlockSystem:
    """System data in the standard arrangement, immutable after construction."""

    A: SparseMatrix
    B: SparseMatrix
    C: SparseMatrix
    D: SparseMatrix
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    note: str = ""

    def __post_init__(self):
        _check_blocks(self.A, self.B, self.C, self.D, self.f, self.g, self.h)

    @property
    def n(self):
        return self.A.nrows

    @property
    def m(self):
        return self.B.nrows

    @property
    def l(self):
        return self.C.nrows

    @property
    def size(self):
        return self.n + self.m + self.l

    @property
    def rhs(self):
        return np.concatenate([self.f, self.g, self.h])

    def matvec(self, u):
        """K u for the monolithic operator, block by block."""
        u = as_vector(u, self.size, "u")
        x, y, z = u[:self.n], u[self.n:self.n + self.m], u[self.n + self.m:]
        top = self.A.matvec(x) + self.B.transpose().matvec(y)
        mid = self.B.matvec(x) + self.C.transpose().matvec(z)
        bot = self.C.matvec(y) + self.D.matvec(z)
        return np.concatenate([top, mid, bot])


@dataclass(frozen=True)
class HatBlockSystem:
    """Same block data arranged per the hat form; rhs stored as (f, g, h)
    so the assembled hat right-hand side is (f, h, -g)."""

    A: SparseMatrix
    B: SparseMatrix
    C: SparseMatrix
    D: SparseMatrix
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    note: str = ""

    def __post_init__(self):
        _check_blocks(self.A, self.B, self.C, self.D, self.f, self.g, self.h)

    @property
    def n(self):
        return self.A.nrows

    @property
    def m(self):
        return self.B.nrows

    @property
    def l(self):
        return self.C.nrows

    @property
    def size(self):
        return self.n + self.m + self.l

    @property
    def rhs(self):
        """Right-hand side of the hat arrangement: (f, h, -g)."""
        return np.concatenate([self.f, self.h, -self.g])


def hat_to_standard(sys: HatBlockSystem) -> BlockSystem:
    """Equivalent standard-form system (block permutation plus one sign flip).

    The hat unknown ordering (x, z, y) maps to the standard (x, y, z); the
    solution values are unchanged.
    """
    return BlockSystem(sys.A, sys.B, sys.C, sys.D, sys.f, sys.g, sys.h,
                       note=sys.note)


def standard_to_hat(sys: BlockSystem) -> HatBlockSystem:
    return HatBlockSystem(sys.A, sys.B, sys.C, sys.D, sys.f, sys.g, sys.h,
                          note=sys.note)


def assemble_monolithic(sys: BlockSystem) -> SparseMatrix:
    """[[A, B^T, 0], [B, 0, C^T], [0, C, D]] as one sparse matrix."""
    n, m, l = sys.n, sys.m, sys.l
    return block_matrix(
        [[sys.A, sys.B.transpose(), None],
         [sys.B, None, sys.C.transpose()],
         [None, sys.C, sys.D]],
        [n, m, l], [n, m, l])


def assemble_hat_monolithic(sys: HatBlockSystem) -> SparseMatrix:
    """[[A, 0, B^T], [0, D, C], [-B, -C^T, 0]] for the hat arrangement."""
    n, m, l = sys.n, sys.m, sys.l
    return block_matrix(
        [[sys.A, None, sys.B.transpose()],
         [None, sys.D, sys.C],
         [sys.B.scale(-1.0), sys.C.transpose().scale(-1.0), None]],
        [n, l, m], [n, l, m])


def residual(sys: BlockSystem, x, y, z) -> float:
    """||b - K u||_2 (unnormalized; solvers normalize against the x0 residual)."""
    u = np.concatenate([as_vector(x, sys.n, "x"), as_vector(y, sys.m, "y"),
                        as_vector(z, sys.l, "z")])
    return float(np.linalg.norm(sys.rhs - sys.matvec(u)))


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)  # (name, status, detail)

    def add(self, name, status, detail=""):
        self.checks.append((name, status, detail))

    @property
    def ok(self):
        return all(status != "fail" for _, status, _ in self.checks)

    @property
    def skipped(self):
        return [name for name, status, _ in self.checks if status == "skip"]

    def summary(self):
        lines = []
        for name, status, detail in self.checks:
            line = f"{status.upper():5s} {name}"
            if detail:
                line += f" ({detail})"
            lines.append(line)
        return "\n".join(lines)


def validate(sys: BlockSystem | HatBlockSystem,
             dense_threshold: int = DENSE_THRESHOLD) -> ValidationReport:
    """Structural checks for the block assumptions.

    Rank and definiteness checks are desk-scale only; above the dense
    threshold they are skipped with a warning entry in the report.
    """
    rep = ValidationReport()
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    n, m, l = sys.n, sys.m, sys.l

    rep.add("dims", "pass" if m <= n else "fail", f"n={n} m={m} l={l}")

    gap = A.symmetry_gap()
    tol = 1e-12 * A.max_abs() + 1e-14
    rep.add("A symmetric", "pass" if gap <= tol else "fail", f"gap={gap:.2e}")

    if n <= dense_threshold:
        try:
            dense_cholesky(A.to_dense())
            rep.add("A positive definite", "pass")
        except NotSPDError as exc:
            rep.add("A positive definite", "fail", str(exc))
    else:
        rep.add("A positive definite", "skip", "above dense threshold")

    gap_d = D.symmetry_gap()
    tol_d = 1e-12 * D.max_abs() + 1e-14
    rep.add("D symmetric", "pass" if gap_d <= tol_d else "fail", f"gap={gap_d:.2e}")

    d_spd = None
    if l == 0:
        d_spd = True
        rep.add("D positive semidefinite", "pass", "empty block")
    elif l <= dense_threshold:
        w, _ = symmetric_eigen(0.5 * (D.to_dense() + D.to_dense().T))
        floor = -1e-10 * max(abs(w[0]), abs(w[-1])) - 1e-14
        rep.add("D positive semidefinite", "pass" if w[0] >= floor else "fail",
                f"lambda_min={w[0]:.2e}")
        d_spd = w[0] > 1e-12 * max(abs(w[-1]), 1e-300)
    else:
        rep.add("D positive semidefinite", "skip", "above dense threshold")

    if max(n, m) <= dense_threshold:
        rank_b = row_rank(B.to_dense())
        rep.add("B full row rank", "pass" if rank_b == m else "fail",
                f"rank={rank_b}/{m}")
    else:
        rep.add("B full row rank", "skip", "above dense threshold")

    if d_spd:
        rep.add("C full row rank", "pass", "not required: D is SPD")
    elif d_spd is None:
        rep.add("C full row rank", "skip", "D definiteness unknown at this scale")
    elif max(l, m) <= dense_threshold:
        rank_c = row_rank(C.to_dense())
        rep.add("C full row rank", "pass" if rank_c == l else "fail",
                f"rank={rank_c}/{l}")
    else:
        rep.add("C full row rank", "skip", "above dense threshold")

    return rep


def with_ones_rhs(sys):
    """Replace the right-hand side so the exact solution is the ones vector."""
    ones_n = np.ones(sys.n)
    ones_m = np.ones(sys.m)
    ones_l = np.ones(sys.l)
    f = sys.A.matvec(ones_n) + sys.B.transpose().matvec(ones_m)
    g = sys.B.matvec(ones_n) + sys.C.transpose().matvec(ones_l)
    h = sys.C.matvec(ones_m) + sys.D.matvec(ones_l)
    return replace(sys, f=f, g=g, h=h)
