"""Shared helpers for the test suite."""

import numpy as np

import triblock as tb


def multiset_match(a, b):
    """Worst minimal-cost pairing distance between two complex multisets."""
    a = np.asarray(a, dtype=np.complex128)
    pool = list(np.asarray(b, dtype=np.complex128))
    assert len(a) == len(pool)
    worst = 0.0
    for z in a:
        j = int(np.argmin([abs(z - q) for q in pool]))
        worst = max(worst, abs(z - pool.pop(j)))
    return worst


def random_system(rng, max_n=12):
    n = int(rng.integers(5, max_n + 1))
    m = int(rng.integers(2, n))
    l = int(rng.integers(1, m + 1))
    return tb.gen_random_valid(n, m, l, int(rng.integers(0, 2**31)))


def scaled_blocks(sys, rng, case):
    """Randomized SPD approximation blocks with a controlled mu spectrum.

    Writing M_A = L diag(u) L^T with A = L L^T makes the pencil eigenvalues
    exactly 1/u, letting tests target each case split of the bound tables:
    case 0 -> mu_hi <= 1, case 1 -> mu_lo >= 1, case 2 -> straddling 1.
    The nu spectrum is drawn jointly so the bound hypothesis holds.
    """
    A = sys.A.to_dense()
    S = sys.B.to_dense() @ np.linalg.solve(A, sys.B.to_dense().T)
    MS = sys.D.to_dense() + sys.C.to_dense() @ np.linalg.solve(S, sys.C.to_dense().T)
    LA = np.linalg.cholesky(A)
    LS = np.linalg.cholesky(S)
    LM = np.linalg.cholesky(MS)
    if case == 0:
        u = rng.uniform(1.05, 1.9, sys.n)
    elif case == 1:
        u = rng.uniform(0.55, 0.95, sys.n)
    else:
        u = rng.uniform(0.6, 1.8, sys.n)
    MA = LA @ np.diag(u) @ LA.T
    mu_hi = float((1.0 / u).max())
    nu_cap = 1.9 / mu_hi
    v_lo = max(1.0 / nu_cap, 0.55)
    v = rng.uniform(v_lo, v_lo + 1.5, sys.m)
    Sh = LS @ np.diag(v) @ LS.T
    w = rng.uniform(0.5, 2.0, sys.l)
    MSh = LM @ np.diag(w) @ LM.T
    MA = 0.5 * (MA + MA.T)
    Sh = 0.5 * (Sh + Sh.T)
    MSh = 0.5 * (MSh + MSh.T)
    return tb.build_blocks(sys, "custom",
                           custom={"m_a": MA, "s_hat": Sh, "m_s_hat": MSh})
