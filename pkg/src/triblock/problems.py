"""Generators for the benchmark block systems and random valid instances.

Every generator returns a system whose right-hand side makes the exact
solution the ones vector, so solver error checks need no reference solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotSupportedError
from .sparse import SparseMatrix, block_matrix, kron
from .system import BlockSystem, HatBlockSystem, with_ones_rhs


def gen_stokes_modified(p: int) -> BlockSystem:
    """Modified Stokes-type system on a p-by-p grid, mesh size h = 1/(p+1).

        A = blockdiag(I (x) T + T (x) I, I (x) T + T (x) I)
        B = (I (x) F,  F (x) I)
        C = E (x) F,   D = 0

    with T = tridiag(-1, 2, -1)/h^2, F = tridiag(0, 1, -1)/h, and
    E = diag(1, p+1, ..., p^2-p+1); n = 2p^2, m = p^2, l = p^2.
    """
    if p < 2:
        raise NotSupportedError("p must be at least 2")
    h = 1.0 / (p + 1)
    T = SparseMatrix.tridiag(p, -1.0, 2.0, -1.0).scale(1.0 / h**2)
    F = SparseMatrix.tridiag(p, 0.0, 1.0, -1.0).scale(1.0 / h)
    eye = SparseMatrix.identity(p)
    lap = kron(eye, T).add(kron(T, eye))
    pp = p * p
    A = block_matrix([[lap, None], [None, lap]], [pp, pp], [pp, pp])
    B = block_matrix([[kron(eye, F), kron(F, eye)]], [pp], [pp, pp])
    E = SparseMatrix.from_diag(1.0 + p * np.arange(p, dtype=np.float64))
    C = kron(E, F)
    D = SparseMatrix.zeros(pp, pp)
    z = np.zeros
    sys = BlockSystem(A, B, C, D, z(2 * pp), z(pp), z(pp),
                      note=f"stokes-modified p={p}")
    return with_ones_rhs(sys)


def _gaussian_profile(count: int) -> np.ndarray:
    i = np.arange(1, count + 1, dtype=np.float64)
    return np.exp(-2.0 * (i / 3.0) ** 2)


def gen_image_restoration(p: int) -> BlockSystem:
    """Interior-point-style system from piecewise-constant image restoration.

    With pt = p^2 and ph = p(p+1):
        A = blockdiag(2 W^T W + I, D1, D2),  B = (E, -I, -I),  C = E^T,  D = 0
    where W[i,j] = exp(-2((i/3)^2 + (j/3)^2)), D1/D2 are the displayed
    diagonal weights, and E stacks Ehat (x) I over I (x) Ehat for the
    p-by-(p+1) difference block Ehat = bidiag(2, -1).
    """
    if p < 2:
        raise NotSupportedError("p must be at least 2")
    pt = p * p
    ph = p * (p + 1)
    u = _gaussian_profile(ph)
    k = int(np.count_nonzero(u))
    rows = np.repeat(np.arange(k, dtype=np.int64), k)
    cols = np.tile(np.arange(k, dtype=np.int64), k)
    vals = np.multiply.outer(u[:k], u[:k]).ravel()
    keep = vals != 0.0
    W = SparseMatrix.from_coo(ph, ph, rows[keep], cols[keep], vals[keep])
    wtw2 = (W.transpose() @ W).scale(2.0).add(SparseMatrix.identity(ph))

    j = np.arange(1, 2 * pt + 1, dtype=np.float64)
    d1 = np.where(j <= pt, 1.0, 1e-5 * (j - pt) ** 2)
    d2 = 1e-5 * (j + pt) ** 2
    A = block_matrix([[wtw2, None, None],
                      [None, SparseMatrix.from_diag(d1), None],
                      [None, None, SparseMatrix.from_diag(d2)]],
                     [ph, 2 * pt, 2 * pt], [ph, 2 * pt, 2 * pt])

    r = np.arange(p, dtype=np.int64)
    ehat = SparseMatrix.from_coo(p, p + 1,
                                 np.concatenate([r, r]),
                                 np.concatenate([r, r + 1]),
                                 np.concatenate([np.full(p, 2.0), np.full(p, -1.0)]))
    eye_p = SparseMatrix.identity(p)
    E = block_matrix([[kron(ehat, eye_p)], [kron(eye_p, ehat)]], [pt, pt], [ph])
    neg_i = SparseMatrix.identity(2 * pt).scale(-1.0)
    B = block_matrix([[E, neg_i, neg_i]], [2 * pt], [ph, 2 * pt, 2 * pt])
    C = E.transpose()
    D = SparseMatrix.zeros(ph, ph)
    z = np.zeros
    sys = BlockSystem(A, B, C, D, z(ph + 4 * pt), z(2 * pt), z(ph),
                      note=f"image-restoration p={p}")
    return with_ones_rhs(sys)


_Q1_MASS = np.array([[4.0, 2.0, 1.0, 2.0],
                     [2.0, 4.0, 2.0, 1.0],
                     [1.0, 2.0, 4.0, 2.0],
                     [2.0, 1.0, 2.0, 4.0]]) / 36.0
_Q1_STIFF = np.array([[4.0, -1.0, -2.0, -1.0],
                      [-1.0, 4.0, -1.0, -2.0],
                      [-2.0, -1.0, 4.0, -1.0],
                      [-1.0, -2.0, -1.0, 4.0]]) / 6.0


def _q1_interior_matrices(cells: int):
    """Mass and stiffness on the unit square, bilinear elements, Dirichlet
    boundary removed; returns (M, K, h)."""
    h = 1.0 / cells
    nodes = cells + 1
    interior = cells - 1

    def node_id(ix, iy):
        return iy * nodes + ix

    def interior_id(ix, iy):
        if 1 <= ix <= interior and 1 <= iy <= interior:
            return (iy - 1) * interior + (ix - 1)
        return -1

    rows_m, cols_m, vals_m = [], [], []
    rows_k, cols_k, vals_k = [], [], []
    for ey in range(cells):
        for ex in range(cells):
            loc = [(ex, ey), (ex + 1, ey), (ex + 1, ey + 1), (ex, ey + 1)]
            ids = [interior_id(ix, iy) for ix, iy in loc]
            for a in range(4):
                if ids[a] < 0:
                    continue
                for b in range(4):
                    if ids[b] < 0:
                        continue
                    rows_m.append(ids[a])
                    cols_m.append(ids[b])
                    vals_m.append(h * h * _Q1_MASS[a, b])
                    rows_k.append(ids[a])
                    cols_k.append(ids[b])
                    vals_k.append(_Q1_STIFF[a, b])
    nn = interior * interior
    M = SparseMatrix.from_coo(nn, nn, rows_m, cols_m, vals_m, sum_duplicates=True)
    K = SparseMatrix.from_coo(nn, nn, rows_k, cols_k, vals_k, sum_duplicates=True)
    return M, K, h


def gen_poisson_control(grid_pow: int, beta: float = 1e-2) -> HatBlockSystem:
    """Distributed Poisson-control KKT system on a uniform grid.

    Bilinear elements on a (2^grid_pow + 1)^2 grid; mass matrix M and
    Dirichlet stiffness K_s mapped to the hat arrangement as A := M,
    D := beta M, B := K_s, C := -M.  This is a standard textbook assembly,
    not a replica of any external discretization code.
    """
    if not (3 <= grid_pow <= 8):
        raise NotSupportedError("grid_pow must be in 3..8")
    if beta <= 0:
        raise NotSupportedError("beta must be positive")
    M, Ks, _ = _q1_interior_matrices(2 ** grid_pow)
    nn = M.nrows
    A = M
    D = M.scale(beta)
    B = Ks
    C = M.scale(-1.0)
    z = np.zeros
    sys = HatBlockSystem(A, B, C, D, z(nn), z(nn), z(nn),
                         note=f"poisson-control pow={grid_pow} beta={beta}")
    return with_ones_rhs(sys)


def gen_fd_stokes_substitute(N: int) -> HatBlockSystem:
    """Marker-and-cell finite-difference Stokes with a coarse-cell
    stabilization field, so the trailing block D is SPD.

    Unknowns: interior edge velocities (both components) in the first block,
    cell pressures (one cell pinned) as the multiplier block, and a coarse
    2x2-aggregate stabilization field as the third block.
    """
    if N < 2:
        raise NotSupportedError("N must be at least 2")
    h = 1.0 / N
    nu = (N - 1) * N

    def u_id(i, jr):  # vertical edge i=1..N-1, row jr=0..N-1
        return jr * (N - 1) + (i - 1)

    def v_id(ic, j):  # horizontal edge j=1..N-1, column ic=0..N-1
        return (j - 1) * N + ic

    def lap(idx, first, second):
        rows, cols, vals = [], [], []
        for a in range(1, first):
            for b in range(second):
                me = idx(a, b)
                rows.append(me), cols.append(me), vals.append(4.0 / h**2)
                for da, db in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    na, nb = a + da, b + db
                    if 1 <= na <= first - 1 and 0 <= nb <= second - 1:
                        rows.append(me), cols.append(idx(na, nb)), vals.append(-1.0 / h**2)
        sz = (first - 1) * second
        return SparseMatrix.from_coo(sz, sz, rows, cols, vals)

    Lu = lap(u_id, N, N)
    Lv = lap(lambda i, j: v_id(j, i), N, N)
    A = block_matrix([[Lu, None], [None, Lv]], [nu, nu], [nu, nu])

    m = N * N - 1  # last cell pinned so the divergence rows are independent
    rows, cols, vals = [], [], []
    for cy in range(N):
        for cx in range(N):
            cell = cy * N + cx
            if cell == N * N - 1:
                continue
            if cx + 1 <= N - 1:
                rows.append(cell), cols.append(u_id(cx + 1, cy)), vals.append(1.0 / h)
            if cx >= 1:
                rows.append(cell), cols.append(u_id(cx, cy)), vals.append(-1.0 / h)
            if cy + 1 <= N - 1:
                rows.append(cell), cols.append(nu + v_id(cx, cy + 1)), vals.append(1.0 / h)
            if cy >= 1:
                rows.append(cell), cols.append(nu + v_id(cx, cy)), vals.append(-1.0 / h)
    B = SparseMatrix.from_coo(m, 2 * nu, rows, cols, vals)

    nc = (N + 1) // 2
    l = nc * nc
    rows, cols, vals = [], [], []
    for cy in range(N):
        for cx in range(N):
            cell = cy * N + cx
            if cell == N * N - 1:
                continue
            coarse = (cy // 2) * nc + (cx // 2)
            rows.append(coarse), cols.append(cell), vals.append(1.0)
    C = SparseMatrix.from_coo(l, m, rows, cols, vals)
    D = SparseMatrix.identity(l).scale(h * h)
    z = np.zeros
    sys = HatBlockSystem(A, B, C, D, z(2 * nu), z(m), z(l),
                         note=f"fd-stokes-substitute N={N}")
    return with_ones_rhs(sys)


def gen_random_valid(n: int, m: int, l: int, seed: int) -> BlockSystem:
    """Random system satisfying the block assumptions, deterministic in seed.

    A = R R^T + I; B random full row rank; D = Q Q^T with a seed-chosen rank
    (D is kept SPD when l > m since a full-row-rank C would be impossible
    otherwise); C full row rank whenever D is singular.
    """
    if l == 0:
        raise NotSupportedError("empty third block is not supported")
    if n < 1 or m < 1:
        raise NotSupportedError("n and m must be positive")
    if m > n:
        raise DimensionError("m must not exceed n")
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n)) * 0.5
    A = SparseMatrix.from_dense(R @ R.T + np.eye(n), drop_zeros=False)

    from .dense import row_rank
    for _ in range(100):
        Bd = rng.standard_normal((m, n))
        if row_rank(Bd) == m:
            break
    else:
        raise RuntimeError("could not draw a full-row-rank B")
    B = SparseMatrix.from_dense(Bd, drop_zeros=False)

    rank_d = int(rng.integers(0, l + 1)) if l <= m else l
    if rank_d > 0:
        Q = rng.standard_normal((l, rank_d))
        Dd = Q @ Q.T
    else:
        Dd = np.zeros((l, l))
    D = SparseMatrix.from_dense(Dd, drop_zeros=False)

    for _ in range(100):
        Cd = rng.standard_normal((l, m))
        if rank_d == l or row_rank(Cd) == l:
            break
    else:
        raise RuntimeError("could not draw a full-row-rank C")
    C = SparseMatrix.from_dense(Cd, drop_zeros=False)

    z = np.zeros
    sys = BlockSystem(A, B, C, D, z(n), z(m), z(l),
                      note=f"random n={n} m={m} l={l} seed={seed}")
    return with_ones_rhs(sys)


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative problem request, as used by the command line."""

    family: str
    p: int | None = None
    grid_pow: int | None = None
    cells: int | None = None
    beta: float = 1e-2
    n: int | None = None
    m: int | None = None
    l: int | None = None
    seed: int = 0

    def generate(self):
        if self.family == "stokes-modified":
            return gen_stokes_modified(self._need("p"))
        if self.family == "image-restoration":
            return gen_image_restoration(self._need("p"))
        if self.family == "poisson-control":
            return gen_poisson_control(self._need("grid_pow"), self.beta)
        if self.family == "fd-stokes-substitute":
            return gen_fd_stokes_substitute(self._need("cells"))
        if self.family == "random":
            return gen_random_valid(self._need("n"), self._need("m"),
                                    self._need("l"), self.seed)
        raise NotSupportedError(f"unknown problem family {self.family!r}")

    def _need(self, attr):
        val = getattr(self, attr)
        if val is None:
            raise NotSupportedError(f"problem family {self.family!r} needs --{attr}")
        return val


FAMILIES = ("stokes-modified", "image-restoration", "poisson-control",
            "fd-stokes-substitute", "random")
