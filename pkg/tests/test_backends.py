"""Cross-backend agreement between the compiled kernels and the numpy twins."""

import numpy as np
import pytest

from triblock import _kernels_py
from triblock.sparse import SparseMatrix

try:
    from triblock import _kernels
    BACKENDS = [_kernels, _kernels_py]
except ImportError:
    _kernels = None
    BACKENDS = [_kernels_py]

needs_both = pytest.mark.skipif(_kernels is None,
                                reason="compiled kernels unavailable")


def _random_csr(rng, n, m, density=0.4):
    A = rng.standard_normal((n, m)) * (rng.random((n, m)) < density)
    return SparseMatrix.from_dense(A)


@needs_both
def test_matvec_agrees(rng):
    A = _random_csr(rng, 9, 7)
    x = rng.standard_normal(7)
    ys = [k.csr_matvec(A.indptr, A.indices, A.data, x, A.nrows)
          for k in BACKENDS]
    # summation orders differ between the twins; agreement is to roundoff
    assert np.allclose(ys[0], ys[1], rtol=1e-13, atol=1e-14)


@needs_both
def test_matmul_agrees(rng):
    A = _random_csr(rng, 6, 8)
    B = _random_csr(rng, 8, 5)
    outs = [k.csr_matmul(A.indptr, A.indices, A.data,
                         B.indptr, B.indices, B.data, A.nrows, B.ncols)
            for k in BACKENDS]
    for a, b in zip(outs[0], outs[1]):
        assert np.allclose(a, b, atol=1e-14)
    assert np.array_equal(outs[0][0], outs[1][0])
    assert np.array_equal(outs[0][1], outs[1][1])


@needs_both
def test_ichol_agrees(rng):
    R = rng.standard_normal((12, 12)) * (rng.random((12, 12)) < 0.5)
    A = SparseMatrix.from_dense(R @ R.T + 12 * np.eye(12), drop_zeros=False)
    acc = np.zeros(A.ncols)
    np.add.at(acc, A.indices, A.data**2)
    colnorm = np.sqrt(acc)
    for tol in (0.0, 1e-3):
        outs = [k.ichol_dt(A.nrows, A.indptr, A.indices, A.data, tol, colnorm)
                for k in BACKENDS]
        assert outs[0][3] == outs[1][3] == -1
        assert np.array_equal(outs[0][0], outs[1][0])
        assert np.array_equal(outs[0][1], outs[1][1])
        assert np.allclose(outs[0][2], outs[1][2], atol=1e-14)


@needs_both
def test_triangular_solves_agree(rng):
    n = 10
    L = np.tril(rng.standard_normal((n, n)))
    np.fill_diagonal(L, np.abs(np.diag(L)) + 1.0)
    B = rng.standard_normal((n, 3))
    for trans in (0, 1):
        outs = [k.dense_tri_solve(np.ascontiguousarray(L),
                                  np.ascontiguousarray(B), trans)
                for k in BACKENDS]
        assert np.allclose(outs[0], outs[1], atol=1e-13)


@needs_both
def test_dense_chol_agrees(rng):
    R = rng.standard_normal((9, 9))
    A = np.ascontiguousarray(R @ R.T + 9 * np.eye(9))
    outs = [k.dense_chol(A) for k in BACKENDS]
    assert outs[0][1] == outs[1][1] == -1
    assert np.allclose(outs[0][0], outs[1][0], atol=1e-13)


@needs_both
def test_jacobi_agrees(rng):
    S = rng.standard_normal((8, 8))
    A = np.ascontiguousarray(0.5 * (S + S.T))
    outs = [k.jacobi_eigh(A, 60) for k in BACKENDS]
    w0 = np.sort(outs[0][0])
    w1 = np.sort(outs[1][0])
    assert np.allclose(w0, w1, atol=1e-12)


@needs_both
def test_hqr_agrees(rng):
    from tests_util import multiset_match
    A = rng.standard_normal((20, 20))
    lams = []
    for k in BACKENDS:
        H = k.hessenberg(np.ascontiguousarray(A))
        wr, wi, status = k.hqr_eigvals(H, 600)
        assert status == 0
        lams.append(wr + 1j * wi)
    assert multiset_match(lams[0], lams[1]) <= 1e-10
