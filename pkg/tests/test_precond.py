import numpy as np
import pytest

import triblock as tb
from tests_util import random_system, scaled_blocks
from triblock.errors import NotSupportedError
from triblock.precond import ALL_KIND_TAGS, BlockPreconditioner, build_blocks
from triblock.sparse import SparseMatrix
from triblock.system import assemble_monolithic


def tiny_system():
    A = SparseMatrix.identity(2)
    B = SparseMatrix.from_coo(1, 2, [0], [0], [1.0])
    C = SparseMatrix.from_coo(1, 1, [0], [0], [1.0])
    D = SparseMatrix.from_coo(1, 1, [0], [0], [1.0])
    return tb.BlockSystem(A, B, C, D, np.zeros(2), np.zeros(1), np.zeros(1))


def test_exact_blocks_tiny_hand_values():
    blocks = build_blocks(tiny_system(), "exact")
    assert np.allclose(np.asarray(blocks.s_hat_mat), [[1.0]])
    assert np.allclose(np.asarray(blocks.m_s_hat_mat), [[2.0]])


def test_recipe_ex61_first_schur_is_bbt():
    sys_ = tb.gen_stokes_modified(2)
    blocks = build_blocks(sys_, "ex61")
    expect = sys_.B.to_dense() @ sys_.B.to_dense().T
    got = blocks.s_hat_mat
    got = got.to_dense() if isinstance(got, SparseMatrix) else got
    assert np.abs(got - expect).max() <= 1e-12 * np.abs(expect).max()


def test_recipe_ex62_structures():
    sys_ = tb.gen_image_restoration(3)
    blocks = build_blocks(sys_, "ex62", droptol=1e-8)
    A = sys_.A.to_dense()
    B = sys_.B.to_dense()
    d_ref = np.diag(B @ np.linalg.solve(A, B.T))
    d_got = blocks.s_hat_mat.diagonal()
    # droptol 1e-8 keeps the factor near exact
    assert np.abs(d_got - d_ref).max() <= 1e-6 * np.abs(d_ref).max()


def test_recipe_ex63_ex64_shift_forms(rng):
    sys_ = random_system(rng, max_n=9)
    A = sys_.A.to_dense()
    B = sys_.B.to_dense()
    S1 = B @ np.linalg.solve(A, B.T)
    got63 = build_blocks(sys_, "ex63").s_hat_mat
    assert np.abs(got63 - (S1 + 0.1 * np.eye(sys_.m))).max() <= 1e-9 * np.abs(S1).max()
    got64 = build_blocks(sys_, "ex64").s_hat_mat
    expect64 = S1 + 0.01 * np.diag(np.diag(S1))
    assert np.abs(got64 - expect64).max() <= 1e-9 * np.abs(S1).max()


def test_recipe_ex65_tridiagonal_schur(rng):
    sys_ = random_system(rng, max_n=9)
    blocks = build_blocks(sys_, "ex65", droptol=0.0)
    A = sys_.A.to_dense()
    B = sys_.B.to_dense()
    S1 = B @ np.linalg.solve(A, B.T)
    expect = np.triu(np.tril(S1, 1), -1)
    got = blocks.s_hat_mat.to_dense()
    assert np.abs(got - expect).max() <= 1e-9 * np.abs(S1).max()
    ms = blocks.m_s_hat_mat
    expect_ms = sys_.D.to_dense() + sys_.C.to_dense() @ np.linalg.solve(
        expect, sys_.C.to_dense().T)
    assert np.abs(ms - expect_ms).max() <= 1e-8 * max(np.abs(expect_ms).max(), 1.0)


def test_exact_recipe_needs_desk_scale():
    sys_ = tb.gen_stokes_modified(3)
    with pytest.raises(NotSupportedError):
        build_blocks(sys_, "exact", dense_threshold=4)


def test_apply_inverse_kind_d_hand_example():
    blocks = build_blocks(tiny_system(), "exact")
    P = BlockPreconditioner("d", blocks, tiny_system())
    z = P.apply_inverse(np.ones(4))
    assert np.allclose(z, [1.0, 1.0, -1.0, 0.5], atol=1e-14)


def test_apply_inverse_f5_exact_is_system_inverse(rng):
    sys_ = tb.gen_stokes_modified(3)
    blocks = build_blocks(sys_, "exact")
    P = BlockPreconditioner("f5", blocks, sys_)
    K = assemble_monolithic(sys_)
    for _ in range(3):
        u = rng.standard_normal(sys_.size)
        back = P.apply_inverse(K.matvec(u))
        assert np.linalg.norm(back - u) <= 1e-9 * np.linalg.norm(u)


def test_materialize_matches_apply_inverse_all_kinds(rng):
    # dense(M) @ apply_inverse(r) == r across kinds and random systems
    for trial in range(12):
        sys_ = random_system(rng, max_n=10)
        blocks = scaled_blocks(sys_, rng, trial % 3)
        for tag in ALL_KIND_TAGS:
            P = BlockPreconditioner(tag, blocks, sys_)
            M = P.materialize_dense()
            r = rng.standard_normal(sys_.size)
            z = P.apply_inverse(r)
            assert np.linalg.norm(M @ z - r) <= 1e-10 * np.linalg.norm(r), tag


def test_materialize_f5_exact_equals_system(rng):
    sys_ = random_system(rng, max_n=9)
    blocks = build_blocks(sys_, "exact")
    P = BlockPreconditioner("f5", blocks, sys_)
    K = assemble_monolithic(sys_).to_dense()
    M = P.materialize_dense()
    assert np.abs(M - K).max() <= 1e-12 * np.abs(K).max()


def test_kind_d_materialization_symmetric(rng):
    sys_ = random_system(rng, max_n=8)
    blocks = build_blocks(sys_, "exact")
    M = BlockPreconditioner("d", blocks, sys_).materialize_dense()
    assert np.abs(M - M.T).max() <= 1e-12 * np.abs(M).max()


def test_ut_lt_transpose_relation():
    # on a system without the third block, moving the B-coupling of the ut
    # factor across the diagonal reproduces the lt preconditioner
    rng = np.random.default_rng(7)
    n, m = 5, 3
    R = rng.standard_normal((n, n))
    A = SparseMatrix.from_dense(R @ R.T + n * np.eye(n), drop_zeros=False)
    B = SparseMatrix.from_dense(rng.standard_normal((m, n)), drop_zeros=False)
    C = SparseMatrix.zeros(0, m)
    D = SparseMatrix.zeros(0, 0)
    sys_ = tb.BlockSystem(A, B, C, D, np.zeros(n), np.zeros(m), np.zeros(0))
    blocks = build_blocks(sys_, "exact")
    M_ut = BlockPreconditioner("ut", blocks, sys_).materialize_dense()
    M_lt = BlockPreconditioner("lt", blocks, sys_).materialize_dense()
    moved = M_ut.copy()
    moved[n:, :n] = M_ut[:n, n:].T
    moved[:n, n:] = 0.0
    assert np.abs(moved - M_lt).max() <= 1e-11 * np.abs(M_lt).max()


def test_kind_parsing():
    assert tb.kind_from_tag("f3").upper and tb.kind_from_tag("f3").schur
    assert not tb.kind_from_tag("d").lower
    with pytest.raises(NotSupportedError):
        tb.kind_from_tag("x9")
