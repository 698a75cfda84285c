import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import triblock as tb
from tests_util import multiset_match, random_system, scaled_blocks
from triblock.dense import nonsymmetric_eigen, symmetric_eigen
from triblock.errors import HypothesisViolatedError
from triblock.precond import ALL_KIND_TAGS, build_blocks
from triblock.sparse import SparseMatrix
from triblock.spectral import (EigenBox, SpectralEstimates, assemble_bendixson,
                               block_bendixson_box, classic_bendixson_box,
                               delta_interval, estimate_constants, kind_box,
                               preconditioned_dense, selection_box,
                               shear_eig_lower, shear_eig_upper,
                               spectral_equivalent, spectrum_and_check,
                               unit_dev_sq, _equivalence_parts)


# -- scalar helpers ---------------------------------------------------------

def test_shear_eig_at_zero():
    assert shear_eig_lower(0.0) == 1.0
    assert shear_eig_upper(0.0) == 1.0


def test_shear_eig_values():
    # closed form at s = 3: 1 + 1.5 -+ sqrt(9/4 + 3)
    root = np.sqrt(21.0) / 2.0
    assert abs(shear_eig_lower(3.0) - (2.5 - root)) < 1e-15
    assert abs(shear_eig_upper(3.0) - (2.5 + root)) < 1e-15
    assert abs(shear_eig_lower(3.0) - 0.20871215252208009) < 1e-12
    assert abs(shear_eig_upper(3.0) - 4.79128784747792) < 1e-12


def test_shear_eig_reciprocal_pairs():
    for s in (0.5, 1.0, 3.0, 10.0):
        assert abs(shear_eig_lower(s) * shear_eig_upper(s) - 1.0) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 100.0))
def test_shear_eig_product_and_ordering(s):
    lo, hi = shear_eig_lower(s), shear_eig_upper(s)
    assert 0.0 < lo <= 1.0 <= hi
    assert abs(lo * hi - 1.0) <= 1e-12


def test_shear_eig_monotone_grid():
    s = np.linspace(0.0, 100.0, 1000)
    lo = np.array([shear_eig_lower(v) for v in s])
    hi = np.array([shear_eig_upper(v) for v in s])
    assert np.all(np.diff(lo) < 0)
    assert np.all(np.diff(hi) > 0)


def test_shear_eig_rejects_negative():
    with pytest.raises(ValueError):
        shear_eig_lower(-0.1)
    with pytest.raises(ValueError):
        shear_eig_upper(-1e-9)


def test_unit_dev_sq_values():
    assert unit_dev_sq(1.0, 1.0) == 0.0
    assert unit_dev_sq(0.0, 0.0) == 1.0
    assert abs(unit_dev_sq(1.5, 0.2) - 0.64) < 1e-15


def make_estimates(**over):
    base = dict(mu_lo=0.8, mu_hi=1.0, nu_lo=0.5, nu_hi=0.9,
                omega_lo=0.2, omega_hi=0.7, tau_lo=0.1, tau_hi=0.4,
                theta_lo=0.3, theta_hi=1.1)
    base.update(over)
    d_lo, d_hi = delta_interval(base["mu_lo"], base["mu_hi"])
    mu = np.linspace(base["mu_lo"], base["mu_hi"], 7)
    return SpectralEstimates(
        **base, delta_lo=d_lo, delta_hi=d_hi,
        lam_shift_once=float(np.max(mu * (1 - mu))),
        lam_shift_twice=float(np.max((1 - mu) ** 2 * mu)))


def test_bottom_bounds_piecewise():
    est = make_estimates()
    assert est.bottom_lo(0.5) == est.theta_lo
    assert est.bottom_lo(1.0) == est.theta_lo          # boundary: first branch
    assert est.bottom_lo(1.0 + 1e-9) == est.tau_lo + est.omega_lo
    assert est.bottom_hi(1.0) == est.theta_hi
    assert est.bottom_hi(1.5) == est.tau_hi + est.omega_hi
    with pytest.raises(ValueError):
        est.bottom_lo(-0.1)


# -- constants --------------------------------------------------------------

def tiny_system():
    A = SparseMatrix.identity(2)
    B = SparseMatrix.from_coo(1, 2, [0], [0], [1.0])
    C = SparseMatrix.from_coo(1, 1, [0], [0], [1.0])
    D = SparseMatrix.from_coo(1, 1, [0], [0], [1.0])
    return tb.BlockSystem(A, B, C, D, np.zeros(2), np.zeros(1), np.zeros(1))


def test_estimate_constants_exact_blocks_are_unit():
    sys_ = tb.gen_stokes_modified(3)
    est = estimate_constants(sys_, build_blocks(sys_, "exact"))
    for val in (est.mu_lo, est.mu_hi, est.nu_lo, est.nu_hi,
                est.theta_lo, est.theta_hi):
        assert abs(val - 1.0) <= 1e-9
    assert est.method == "dense-exact"
    assert est.lam_shift_once <= 1e-9
    assert est.lam_shift_twice <= 1e-9


def test_estimate_constants_tiny_omega():
    est = estimate_constants(tiny_system(), build_blocks(tiny_system(), "exact"))
    assert abs(est.omega_hi - 0.5) <= 1e-12


def test_estimate_constants_zero_d_gives_zero_tau():
    sys_ = tb.gen_stokes_modified(3)  # D = 0
    est = estimate_constants(sys_, build_blocks(sys_, "ex61"))
    assert est.tau_lo == est.tau_hi == 0.0


def test_estimate_constants_envelope_agrees_with_dense(rng):
    sys_ = tb.gen_stokes_modified(4)
    blocks = build_blocks(sys_, "ex61")
    exact = estimate_constants(sys_, blocks)
    env = estimate_constants(sys_, blocks, dense_threshold=4, lanczos_iters=80)
    assert env.method == "interval-envelope"
    assert abs(env.mu_lo - exact.mu_lo) <= 1e-6
    assert abs(env.nu_hi - exact.nu_hi) <= 1e-5 * max(exact.nu_hi, 1.0)
    # envelope upper bounds dominate the exact maxima
    assert env.lam_shift_once >= exact.lam_shift_once - 1e-9
    assert env.lam_shift_twice >= exact.lam_shift_twice - 1e-9


def test_delta_interval_formula():
    lo, hi = delta_interval(0.5, 1.5)
    assert lo == min(0.5 * 1.5, 1.5 * 0.5)
    assert hi == 1.0  # capped from below by the unit value


# -- bound boxes ------------------------------------------------------------

def exact_estimates(omega_hi, tau_lo=0.0, tau_hi=None):
    tau_hi = omega_hi if tau_hi is None else tau_hi
    return SpectralEstimates(1.0, 1.0, 1.0, 1.0, 0.0, omega_hi,
                             tau_lo, max(tau_lo, tau_hi), 1.0, 1.0, 1.0, 1.0,
                             0.0, 0.0)


def test_kind_box_exact_rows():
    est = exact_estimates(omega_hi=0.5)
    d = kind_box("d", est)
    assert d.re_lo == 0.0 and abs(d.re_hi - 1.0) < 1e-15
    assert abs(d.im_abs - np.sqrt(1.5)) < 1e-14
    for tag in ("ut", "lt", "f1"):
        box = kind_box(tag, est)
        assert abs(box.re_lo - est.tau_lo) < 1e-15
        assert abs(box.re_hi - 1.0) < 1e-15
        assert abs(box.im_abs - np.sqrt(0.5)) < 1e-14
    f2 = kind_box("f2", est)
    assert f2.re_lo == 0.0
    assert abs(f2.re_hi - shear_eig_upper(0.5)) < 1e-14
    assert abs(f2.im_abs - np.sqrt(1.5)) < 1e-14
    for tag in ("f3", "f4", "f5"):
        box = kind_box(tag, est)
        assert abs(box.re_lo - 1.0) < 1e-12
        assert abs(box.re_hi - 1.0) < 1e-12
        assert box.im_abs < 1e-12


def test_kind_box_hypothesis_enforced():
    est = make_estimates(mu_hi=1.9, nu_hi=1.5)  # mu*nu = 2.85 >= 2
    with pytest.raises(HypothesisViolatedError):
        kind_box("d", est)
    with pytest.raises(HypothesisViolatedError):
        selection_box(False, False, False, est)


def random_estimates(rng):
    mu_lo = rng.uniform(0.05, 1.6)
    mu_hi = rng.uniform(mu_lo, min(mu_lo + 1.0, 1.99))
    nu_cap = 1.98 / mu_hi
    nu_lo = rng.uniform(0.05, min(nu_cap, 1.9) * 0.7)
    nu_hi = rng.uniform(nu_lo, min(nu_cap, 1.99))
    om_lo = rng.uniform(0.0, 0.8)
    om_hi = rng.uniform(om_lo, om_lo + 1.0)
    ta_lo = rng.uniform(0.0, 0.5)
    ta_hi = rng.uniform(ta_lo, ta_lo + 1.0)
    th_lo = rng.uniform(0.05, 0.8)
    th_hi = rng.uniform(th_lo, th_lo + 1.0)
    d_lo, d_hi = delta_interval(mu_lo, mu_hi)
    mu = rng.uniform(mu_lo, mu_hi, 9)
    mu[0], mu[-1] = mu_lo, mu_hi
    return SpectralEstimates(mu_lo, mu_hi, nu_lo, nu_hi, om_lo, om_hi,
                             ta_lo, ta_hi, th_lo, th_hi, d_lo, d_hi,
                             float(np.max(mu * (1 - mu))),
                             float(np.max((1 - mu) ** 2 * mu)))


def test_selection_box_matches_kind_box_100_random(rng):
    flags = {tag: tb.KINDS[tag] for tag in ALL_KIND_TAGS}
    for _ in range(100):
        est = random_estimates(rng)
        for tag in ALL_KIND_TAGS:
            k = flags[tag]
            a = kind_box(tag, est)
            b = selection_box(k.lower, k.upper, k.schur, est)
            assert abs(a.re_lo - b.re_lo) <= 1e-12 * max(1.0, abs(a.re_lo))
            assert abs(a.re_hi - b.re_hi) <= 1e-12 * max(1.0, abs(a.re_hi))
            assert abs(a.im_abs - b.im_abs) <= 1e-12 * max(1.0, a.im_abs)


def test_selection_box_no_coupling_matches_kind_d(rng):
    est = random_estimates(rng)
    a = kind_box("d", est)
    b = selection_box(False, False, False, est)
    assert (a.re_lo, a.re_hi, a.im_abs) == (b.re_lo, b.re_hi, b.im_abs)


# -- unit-shear eigenvalue bounds (200 random couplings) ---------------------

def test_unit_shear_eigenvalue_bounds_battery(rng):
    for _ in range(200):
        p = int(rng.integers(1, 9))
        q = int(rng.integers(1, 11))
        Bh = rng.standard_normal((p, q)) * rng.uniform(0.2, 3.0)
        L = np.eye(p + q)
        L[:q, q:] = Bh.T
        w, _ = symmetric_eigen(L @ L.T)
        s = float(symmetric_eigen(Bh.T @ Bh)[0][-1])
        lo, hi = shear_eig_lower(s), shear_eig_upper(s)
        assert w[0] >= lo - 1e-10
        assert w[-1] <= hi + 1e-10


# -- Bendixson rectangles ----------------------------------------------------

def test_classic_bendixson_symmetric_and_skew(rng):
    S = rng.standard_normal((6, 6))
    sym = 0.5 * (S + S.T)
    box = classic_bendixson_box(sym)
    assert box.im_abs <= 1e-10
    skew = 0.5 * (S - S.T)
    box2 = classic_bendixson_box(skew)
    assert abs(box2.re_lo) <= 1e-10 and abs(box2.re_hi) <= 1e-10


def test_classic_bendixson_containment_battery(rng):
    for _ in range(200):
        n = int(rng.integers(2, 10))
        H = rng.standard_normal((n, n)) * rng.uniform(0.3, 3.0)
        box = classic_bendixson_box(H)
        lam = nonsymmetric_eigen(H, check_samples=0)
        assert box.contains(lam, slack=1e-10).all()


def random_bendixson_blocks(rng):
    na = int(rng.integers(2, 5))
    nd = int(rng.integers(1, 5))
    nf = int(rng.integers(1, 5))
    R = rng.standard_normal((na, na))
    At = R @ R.T + na * np.eye(na)
    S = rng.standard_normal((nd, nd))
    Dt = 0.5 * (S + S.T)
    Bt = rng.standard_normal((nd, na))
    Ct = rng.standard_normal((nf, nd))
    Et = rng.standard_normal((nf, na))
    Q = rng.standard_normal((nf, nf))
    # make the trailing Schur block PSD by construction
    Y = np.linalg.solve(np.linalg.cholesky(At), Et.T)
    Ft = Y.T @ Y + Q @ Q.T * rng.uniform(0.0, 1.0)
    Ft = 0.5 * (Ft + Ft.T)
    return At, Bt, Ct, Dt, Et, Ft


def test_block_bendixson_zero_couplings():
    rng = np.random.default_rng(5)
    At, Bt, Ct, Dt, Et, Ft = random_bendixson_blocks(rng)
    box = block_bendixson_box(At, np.zeros_like(Bt), np.zeros_like(Ct),
                              Dt, Et, Ft)
    assert box.im_abs == 0.0


def test_block_bendixson_no_cross_block():
    # with Et = 0 the real range is the min/max over the three block spectra
    rng = np.random.default_rng(8)
    At, Bt, Ct, Dt, Et, Ft = random_bendixson_blocks(rng)
    Et = np.zeros_like(Et)
    box = block_bendixson_box(At, Bt, Ct, Dt, Et, Ft)
    wa, _ = symmetric_eigen(At)
    wd, _ = symmetric_eigen(Dt)
    wf, _ = symmetric_eigen(Ft)
    assert abs(box.re_lo - min(wa[0], wd[0], wf[0])) <= 1e-10
    assert abs(box.re_hi - max(wa[-1], wd[-1], wf[-1])) <= 1e-10


def test_block_bendixson_containment_battery(rng):
    for _ in range(200):
        At, Bt, Ct, Dt, Et, Ft = random_bendixson_blocks(rng)
        box = block_bendixson_box(At, Bt, Ct, Dt, Et, Ft)
        K = assemble_bendixson(At, Bt, Ct, Dt, Et, Ft)
        lam = nonsymmetric_eigen(K, check_samples=0)
        assert box.contains(lam, slack=1e-10).all()


def test_block_bendixson_hypothesis_errors(rng):
    At, Bt, Ct, Dt, Et, Ft = random_bendixson_blocks(rng)
    with pytest.raises(HypothesisViolatedError):
        block_bendixson_box(-At, Bt, Ct, Dt, Et, Ft)
    with pytest.raises(HypothesisViolatedError):
        block_bendixson_box(At, Bt, Ct, Dt + 10 * np.triu(np.ones_like(Dt), 1),
                            Et, Ft)
    with pytest.raises(HypothesisViolatedError):
        block_bendixson_box(At, Bt, Ct, Dt, Et,
                            Ft - 100 * np.eye(Ft.shape[0]))


# -- spectrum equivalence ----------------------------------------------------

def test_equivalence_parts_kind_d_structure():
    sys_ = tb.gen_stokes_modified(3)
    blocks = build_blocks(sys_, "ex61")
    parts = _equivalence_parts(sys_, blocks, "d")
    assert np.all(parts["gamma"] == 0.0)
    assert np.allclose(parts["dplus"], 1.0)
    assert np.all(parts["dminus"] == 0.0)


def test_spectral_equivalent_exact_f5_unit_spectrum():
    sys_ = tb.gen_stokes_modified(4)
    blocks = build_blocks(sys_, "exact")
    lam = nonsymmetric_eigen(spectral_equivalent(sys_, blocks, "f5"))
    assert np.abs(lam - 1.0).max() <= 1e-6


def test_spectral_equivalent_matches_product_spectrum(rng):
    for trial in range(10):
        sys_ = random_system(rng, max_n=10)
        blocks = scaled_blocks(sys_, rng, trial % 3)
        for tag in ALL_KIND_TAGS:
            KP = spectral_equivalent(sys_, blocks, tag)
            W = preconditioned_dense(sys_, blocks, tag)
            lam_p = nonsymmetric_eigen(KP, check_samples=0)
            lam_w = nonsymmetric_eigen(W, check_samples=0)
            assert multiset_match(lam_w, lam_p) <= 1e-6, tag


def test_spectrum_and_check_exact_f3_clusters_at_one():
    sys_ = tb.gen_stokes_modified(3)
    blocks = build_blocks(sys_, "exact")
    check = spectrum_and_check(sys_, blocks, "f3", slack=1e-6)
    assert np.abs(check.eigenvalues - 1.0).max() <= 1e-6
    assert check.all_contained


def test_spectrum_and_check_containment_small_battery(rng):
    sys_ = tb.gen_stokes_modified(4)
    blocks = build_blocks(sys_, "ex61")
    for tag in ALL_KIND_TAGS:
        check = spectrum_and_check(sys_, blocks, tag)
        assert check.all_contained, tag


def test_spectrum_and_check_propagates_hypothesis(rng):
    sys_ = random_system(rng, max_n=8)
    A = sys_.A.to_dense()
    # scaled-down M_A drives the mu pencil far above 2
    blocks = build_blocks(sys_, "custom", custom={
        "m_a": 0.1 * A,
        "s_hat": np.eye(sys_.m),
        "m_s_hat": np.eye(sys_.l)})
    with pytest.raises(HypothesisViolatedError):
        spectrum_and_check(sys_, blocks, "d")


def test_eigenbox_contains():
    box = EigenBox(0.0, 1.0, 0.5)
    lam = np.array([0.5 + 0.2j, 1.2 + 0.0j, 0.5 + 0.7j])
    got = box.contains(lam)
    assert list(got) == [True, False, False]
    assert box.contains(np.array([1.0 + 1e-9 + 0.0j]), slack=1e-8).all()
