import numpy as np
import pytest

import triblock as tb
from tests_util import random_system
from triblock.krylov import SolveConfig, gmres
from triblock.precond import BlockPreconditioner, build_blocks
from triblock.sparse import SparseMatrix
from triblock.system import assemble_monolithic


def test_identity_converges_in_one():
    K = SparseMatrix.identity(6)
    b = np.arange(1.0, 7.0)
    x, rep = gmres(K, None, b)
    assert rep.iterations == 1
    assert rep.converged
    assert np.allclose(x, b, atol=1e-12)


def test_exact_f5_single_iteration():
    sys_ = tb.gen_stokes_modified(3)
    blocks = build_blocks(sys_, "exact")
    P = BlockPreconditioner("f5", blocks, sys_)
    K = assemble_monolithic(sys_)
    for side in ("left", "right"):
        x, rep = gmres(K, P, sys_.rhs, SolveConfig(precond_side=side))
        assert rep.iterations == 1, side
        assert rep.converged


def test_zero_rhs():
    K = SparseMatrix.identity(4)
    x, rep = gmres(K, None, np.zeros(4))
    assert rep.converged and rep.iterations == 0
    assert np.array_equal(x, np.zeros(4))


def test_residual_history_monotone_both_sides(rng):
    sys_ = random_system(rng, max_n=10)
    K = assemble_monolithic(sys_)
    blocks = build_blocks(sys_, "exact")
    P = BlockPreconditioner("d", blocks, sys_)
    for side in ("left", "right"):
        _, rep = gmres(K, P, sys_.rhs, SolveConfig(tol=1e-12, precond_side=side))
        hist = rep.relative_residuals
        assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:])), side


def test_full_space_reaches_exact_solution(rng):
    for _ in range(4):
        sys_ = random_system(rng, max_n=9)
        K = assemble_monolithic(sys_)
        x, rep = gmres(K, None, sys_.rhs,
                       SolveConfig(tol=0.0, maxit=sys_.size, precond_side="right"))
        assert rep.true_relative_residual <= 1e-8


def test_unpreconditioned_matches_direct_solve(rng):
    # SPD-symme tric-part operator: shifted Laplacian block
    n = 24
    T = SparseMatrix.tridiag(n, -1.0, 4.0, -1.0)
    b = rng.standard_normal(n)
    x, rep = gmres(T, None, b, SolveConfig(tol=1e-12, precond_side="right"))
    ref = np.linalg.solve(T.to_dense(), b)
    assert np.linalg.norm(x - ref) <= 1e-8 * np.linalg.norm(ref)


def test_arnoldi_orthogonality_tracked(rng):
    sys_ = random_system(rng, max_n=10)
    K = assemble_monolithic(sys_)
    _, rep = gmres(K, None, sys_.rhs, SolveConfig(tol=1e-10))
    assert rep.arnoldi_orthogonality is not None
    assert rep.arnoldi_orthogonality <= 1e-8


def test_true_residual_always_reported(rng):
    sys_ = random_system(rng, max_n=8)
    K = assemble_monolithic(sys_)
    blocks = build_blocks(sys_, "exact")
    P = BlockPreconditioner("f2", blocks, sys_)
    _, rep = gmres(K, P, sys_.rhs, SolveConfig(tol=1e-8))
    r_true = rep.true_relative_residual
    assert np.isfinite(r_true)
    assert rep.converged


def test_maxit_flagged(rng):
    sys_ = random_system(rng, max_n=10)
    K = assemble_monolithic(sys_)
    _, rep = gmres(K, None, sys_.rhs, SolveConfig(tol=1e-14, maxit=2))
    assert not rep.converged
    assert rep.termination == "maxit"
    assert rep.iterations == 2


def test_restart_still_converges(rng):
    sys_ = random_system(rng, max_n=10)
    K = assemble_monolithic(sys_)
    blocks = build_blocks(sys_, "exact")
    P = BlockPreconditioner("f3", blocks, sys_)
    x, rep = gmres(K, P, sys_.rhs, SolveConfig(tol=1e-10, restart=3))
    assert rep.converged
    assert rep.true_relative_residual <= 1e-8


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(tol=-1.0)
    with pytest.raises(ValueError):
        SolveConfig(maxit=0)
    with pytest.raises(tb.NotSupportedError):
        SolveConfig(precond_side="middle")


def test_callable_operator_and_preconditioner(rng):
    n = 12
    T = SparseMatrix.tridiag(n, -1.0, 3.0, -1.0)
    d = T.diagonal()
    b = rng.standard_normal(n)
    x, rep = gmres(lambda v: T.matvec(v), lambda r: r / d, b,
                   SolveConfig(tol=1e-10))
    assert rep.converged
    assert np.linalg.norm(T.matvec(x) - b) <= 1e-8 * np.linalg.norm(b)
