"""Eigenvalue bounds for the preconditioned block systems.

Covers the spectral constants of the approximation pencils, the per-kind
bound tables, the generalized Bendixson rectangle for skew-coupled 3x3
block matrices, and the congruence construction that produces a dense
matrix sharing the spectrum of the preconditioned operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import (ABS_FLOOR, dense_cholesky, lanczos_extremes,
                    matrix_sqrt_spd, nonsymmetric_eigen, require_symmetric,
                    symmetric_eigen, triangular_solve)
from .errors import HypothesisViolatedError, NotSPDError
from .factorization import DENSE_THRESHOLD, dense_factor
from .precond import ApproxBlocks, BlockPreconditioner, kind_from_tag
from .sparse import SparseMatrix, as_dense
from .system import BlockSystem, assemble_monolithic


# -- scalar helpers --------------------------------------------------------

def shear_eig_lower(s: float) -> float:
    """Smallest eigenvalue of L L^T for a unit shear L = [[I, X^T], [0, I]]
    with coupling energy s = lambda_max(X^T X): 1 + s/2 - sqrt(s^2/4 + s)."""
    if s < 0:
        raise ValueError("coupling energy must be nonnegative")
    return 1.0 + 0.5 * s - np.sqrt(0.25 * s * s + s)


def shear_eig_upper(s: float) -> float:
    """Largest eigenvalue of the unit-shear product: 1 + s/2 + sqrt(s^2/4 + s)."""
    if s < 0:
        raise ValueError("coupling energy must be nonnegative")
    return 1.0 + 0.5 * s + np.sqrt(0.25 * s * s + s)


def unit_dev_sq(s: float, t: float) -> float:
    """max{(s-1)^2, (1-t)^2}: the larger squared deviation from one."""
    if s < 0 or t < 0:
        raise ValueError("arguments must be nonnegative")
    return max((s - 1.0) ** 2, (1.0 - t) ** 2)


# -- spectral constants ----------------------------------------------------

@dataclass(frozen=True)
class SpectralEstimates:
    """Extreme eigenvalues of the approximation pencils.

    mu:    M_A^{-1} A             nu:     S_hat^{-1} (B A^{-1} B^T)
    omega: M_S_hat^{-1} C S_hat^{-1} C^T
    tau:   M_S_hat^{-1} D         theta:  M_S_hat^{-1} (D + C S_hat^{-1} C^T)
    delta: range of t(2-t) over the mu interval (capped at 1 from above)
    lam_shift_once:  max of t(1-t)   over the mu spectrum
    lam_shift_twice: max of (1-t)^2 t over the mu spectrum
    """

    mu_lo: float
    mu_hi: float
    nu_lo: float
    nu_hi: float
    omega_lo: float
    omega_hi: float
    tau_lo: float
    tau_hi: float
    theta_lo: float
    theta_hi: float
    delta_lo: float
    delta_hi: float
    lam_shift_once: float
    lam_shift_twice: float
    method: str = "dense-exact"

    def __post_init__(self):
        pairs = [(self.mu_lo, self.mu_hi), (self.nu_lo, self.nu_hi),
                 (self.omega_lo, self.omega_hi), (self.tau_lo, self.tau_hi),
                 (self.theta_lo, self.theta_hi), (self.delta_lo, self.delta_hi)]
        if any(lo > hi + 1e-12 for lo, hi in pairs):
            raise ValueError("estimate interval has lo > hi")
        if self.mu_lo <= 0 or self.nu_lo <= 0 or self.theta_lo <= 0:
            raise NotSPDError("mu, nu, theta must be positive")

    def bottom_lo(self, t: float) -> float:
        """Lower bound for the trailing Schur-like block, piecewise in the
        coupling magnitude t: theta range on [0, 1], tau+omega past 1."""
        if t < 0:
            raise ValueError("coupling magnitude must be nonnegative")
        return self.theta_lo if t <= 1.0 else self.tau_lo + self.omega_lo

    def bottom_hi(self, t: float) -> float:
        if t < 0:
            raise ValueError("coupling magnitude must be nonnegative")
        return self.theta_hi if t <= 1.0 else self.tau_hi + self.omega_hi

    def hypothesis_ok(self) -> bool:
        return (0.0 < self.mu_hi <= 2.0 and 0.0 < self.nu_hi <= 2.0
                and 0.0 < self.mu_hi * self.nu_hi < 2.0)

    def require_hypothesis(self):
        if not self.hypothesis_ok():
            raise HypothesisViolatedError(
                f"need 0 < mu_hi <= 2, 0 < nu_hi <= 2, mu_hi*nu_hi < 2; got "
                f"mu_hi={self.mu_hi:.4g}, nu_hi={self.nu_hi:.4g}")


def delta_interval(mu_lo: float, mu_hi: float):
    """Range of t(2 - t) over the mu interval endpoints; the upper end
    includes 1 to dominate interior values."""
    a = mu_lo * (2.0 - mu_lo)
    b = mu_hi * (2.0 - mu_hi)
    return min(a, b), max(a, b, 1.0)


def _pencil_dense(factor, mat_dense):
    """L^{-1} T L^{-T} symmetrized, for the extreme eigenvalues of
    factor^{-1} T."""
    half = factor.solve_lower(mat_dense)
    full = factor.solve_lower(half.T)
    return 0.5 * (full + full.T)


def _envelope_max(lo, hi, f, crit, fcrit):
    vals = [f(lo), f(hi)]
    if lo <= crit <= hi:
        vals.append(fcrit)
    return max(vals)


def estimate_constants(sys: BlockSystem, blocks: ApproxBlocks,
                       dense_threshold: int = DENSE_THRESHOLD,
                       lanczos_iters: int = 80) -> SpectralEstimates:
    """Extreme pencil eigenvalues, dense-exact at desk scale.

    Below the dense threshold every constant comes from the full symmetric
    spectrum of the symmetrized pencil (so the spectral functions of the mu
    spectrum are exact maxima); above it, Lanczos extremes plus an analytic
    interior-critical-point envelope are used and tagged as such.
    """
    n, m, l = sys.n, sys.m, sys.l
    dense_ok = max(n, m, l) <= dense_threshold

    if dense_ok:
        A_d = sys.A.to_dense()
        mu_vals, _ = symmetric_eigen(_pencil_dense(blocks.m_a, A_d))
        mu_lo, mu_hi = float(mu_vals[0]), float(mu_vals[-1])
        lam_once = float(np.max(mu_vals * (1.0 - mu_vals)))
        lam_twice = float(np.max((1.0 - mu_vals) ** 2 * mu_vals))

        a_exact = dense_factor(sys.A)
        Y = a_exact.solve_lower(sys.B.to_dense().T)
        S = Y.T @ Y
        nu_vals, _ = symmetric_eigen(_pencil_dense(blocks.s_hat, S))
        nu_lo, nu_hi = float(nu_vals[0]), float(nu_vals[-1])

        if sys.C.nnz == 0:
            omega_lo = omega_hi = 0.0
            T_c = np.zeros((l, l))
        else:
            Z = blocks.s_hat.solve_lower(sys.C.to_dense().T)
            T_c = Z.T @ Z
            om_vals, _ = symmetric_eigen(_pencil_dense(blocks.m_s_hat, T_c))
            omega_lo, omega_hi = float(om_vals[0]), float(om_vals[-1])

        D_d = sys.D.to_dense()
        if sys.D.nnz == 0:
            tau_lo = tau_hi = 0.0
        else:
            ta_vals, _ = symmetric_eigen(_pencil_dense(blocks.m_s_hat, D_d))
            tau_lo, tau_hi = float(ta_vals[0]), float(ta_vals[-1])

        th_vals, _ = symmetric_eigen(_pencil_dense(blocks.m_s_hat, D_d + T_c))
        theta_lo, theta_hi = float(th_vals[0]), float(th_vals[-1])
        method = "dense-exact"
    else:
        from .factorization import ichol_droptol

        def pencil_op(factor, apply_mid, size):
            def op(v):
                return factor.solve_lower(apply_mid(factor.solve_lower_t(v)))
            return lanczos_extremes(op, size, iters=lanczos_iters)

        mu_lo, mu_hi = pencil_op(blocks.m_a, sys.A.matvec, n)
        lam_once = _envelope_max(mu_lo, mu_hi, lambda t: t * (1 - t), 0.5, 0.25)
        lam_twice = _envelope_max(mu_lo, mu_hi, lambda t: (1 - t) ** 2 * t,
                                  1.0 / 3.0, 4.0 / 27.0)

        a_exact = ichol_droptol(sys.A, 0.0)
        Bt = sys.B.transpose()

        def apply_s(v):
            return sys.B.matvec(a_exact.solve(Bt.matvec(v)))

        nu_lo, nu_hi = pencil_op(blocks.s_hat, apply_s, m)

        Ct = sys.C.transpose()

        def apply_cschc(v):
            return sys.C.matvec(blocks.s_hat.solve(Ct.matvec(v)))

        if sys.C.nnz == 0:
            omega_lo = omega_hi = 0.0
        else:
            omega_lo, omega_hi = pencil_op(blocks.m_s_hat, apply_cschc, l)
        if sys.D.nnz == 0:
            tau_lo = tau_hi = 0.0
        else:
            tau_lo, tau_hi = pencil_op(blocks.m_s_hat, sys.D.matvec, l)
        theta_lo, theta_hi = pencil_op(
            blocks.m_s_hat, lambda v: sys.D.matvec(v) + apply_cschc(v), l)
        method = "interval-envelope"

    # clip tiny negative roundoff on quantities that are nonnegative by theory
    omega_lo = max(omega_lo, 0.0)
    tau_lo = max(tau_lo, 0.0)
    d_lo, d_hi = delta_interval(mu_lo, mu_hi)
    return SpectralEstimates(mu_lo, mu_hi, nu_lo, nu_hi, omega_lo, omega_hi,
                             tau_lo, tau_hi, theta_lo, theta_hi, d_lo, d_hi,
                             lam_once, lam_twice, method=method)


# -- bound boxes -----------------------------------------------------------

@dataclass(frozen=True)
class EigenBox:
    """Certified region Re in [re_lo, re_hi], |Im| <= im_abs."""

    re_lo: float
    re_hi: float
    im_abs: float

    def __post_init__(self):
        if self.re_lo > self.re_hi + 1e-12:
            raise ValueError("re_lo exceeds re_hi")
        if self.im_abs < 0:
            raise ValueError("im_abs must be nonnegative")

    def contains(self, lam, slack: float = 0.0):
        lam = np.asarray(lam, dtype=np.complex128)
        return ((lam.real >= self.re_lo - slack)
                & (lam.real <= self.re_hi + slack)
                & (np.abs(lam.imag) <= self.im_abs + slack))


def kind_box(kind, est: SpectralEstimates) -> EigenBox:
    """Eigenvalue bound box for one preconditioner kind (per-kind table)."""
    k = kind_from_tag(kind)
    est.require_hypothesis()
    mu_, muU = est.mu_lo, est.mu_hi
    nu_, nuU = est.nu_lo, est.nu_hi
    om_, omU = est.omega_lo, est.omega_hi
    ta_, taU = est.tau_lo, est.tau_hi
    de_, deU = est.delta_lo, est.delta_hi
    g1, g2 = shear_eig_lower, shear_eig_upper
    h_lo, h_hi = est.bottom_lo, est.bottom_hi
    x1 = nuU - nuU / muU
    x2 = omU * nuU / mu_
    x3 = (1.0 - mu_) * x2
    x4 = (1.0 - de_) * x2

    tag = k.tag
    if tag == "d":
        return EigenBox(0.0, max(muU, taU), np.sqrt(omU + nuU * muU))
    if tag in ("ut", "lt"):
        if muU <= 1.0:
            return EigenBox(min(mu_, ta_, mu_ * nu_),
                            max(muU, taU, muU * nuU),
                            np.sqrt(omU + nuU * est.lam_shift_once))
        if mu_ >= 1.0:
            return EigenBox(min(mu_ * g1(x1), nu_ * g1(x1), ta_),
                            max(muU * g2(x1), nuU * g2(x1), taU),
                            np.sqrt(omU))
        return EigenBox(min(mu_, ta_, g1(x1), mu_ * nu_ * g1(x1)),
                        max(taU, muU * g2(x1), nuU * g2(x1)),
                        np.sqrt(omU + nuU * est.lam_shift_once))
    if tag == "f1":
        return EigenBox(min(mu_, ta_, de_ * nu_),
                        max(muU, taU, deU * nuU),
                        np.sqrt(omU + nuU * est.lam_shift_twice))
    if tag == "f2":
        return EigenBox(0.0,
                        max(muU, h_hi(nuU) + omU * (1.0 - nu_)) * g2(x2),
                        np.sqrt(omU + nuU * muU))
    if tag in ("f3", "f4"):
        if muU <= 1.0:
            return EigenBox(
                min(mu_, h_lo(nuU) + om_ * (1.0 - nuU), mu_ * nu_ / g1(x3)) * g1(x3),
                max(muU, h_hi(nuU) + omU * (1.0 - nu_), muU * nuU / g2(x3)) * g2(x3),
                np.sqrt(omU * unit_dev_sq(muU * nuU, mu_ * nu_)
                        + nuU * est.lam_shift_once))
        if mu_ >= 1.0:
            return EigenBox(
                min(mu_ * g1(x1), nu_ * g1(x1),
                    h_lo(muU * nuU) + om_ * (1.0 - muU * nuU)),
                max(muU * g2(x1), nuU * g2(x1),
                    h_hi(muU * nuU) + omU * (1.0 - mu_ * nu_)),
                np.sqrt(omU * (nuU * muU * (muU - 1.0)
                               + unit_dev_sq(muU * nuU, mu_ * nu_))))
        return EigenBox(
            min(mu_, h_lo(muU * nuU) + om_ * (1.0 - muU * nuU),
                g1(x1) / g1(x3), mu_ * nu_ * g1(x1) / g1(x3)) * g1(x3),
            max(1.0, h_hi(muU * nuU) + omU * (1.0 - nu_),
                muU * g2(x1) / g2(x3), nuU * g2(x1) / g2(x3)) * g2(x3),
            np.sqrt(omU * (nuU * muU * (muU - 1.0)
                           + unit_dev_sq(muU * nuU, mu_ * nu_))
                    + nuU * est.lam_shift_once))
    if tag == "f5":
        return EigenBox(
            min(mu_, h_lo(nuU) + om_ * (1.0 - nuU), de_ * nu_ / g1(x4)) * g1(x4),
            max(muU, h_hi(nuU) + omU * (1.0 - nu_), deU * nuU / g2(x4)) * g2(x4),
            np.sqrt(omU * unit_dev_sq(deU * nuU, de_ * nu_)
                    + nuU * est.lam_shift_twice))
    raise AssertionError(f"unhandled kind {tag}")


def selection_box(lower: bool, upper: bool, schur: bool,
                  est: SpectralEstimates) -> EigenBox:
    """General three-case bound calculator from the coupling selection.

    kind_box must agree with this on all eight kinds; keeping both routes
    makes the per-kind table verifiable against the general machinery.
    """
    est.require_hypothesis()
    mu_, muU = est.mu_lo, est.mu_hi
    nu_, nuU = est.nu_lo, est.nu_hi
    om_, omU = est.omega_lo, est.omega_hi
    ta_, taU = est.tau_lo, est.tau_hi
    g1, g2 = shear_eig_lower, shear_eig_upper

    nsel = int(lower) + int(upper)
    if nsel == 0:
        ga_, gaU = 0.0, 0.0
        lam_yz = muU
    elif nsel == 1:
        ga_, gaU = mu_, muU
        lam_yz = est.lam_shift_once
    else:
        ga_, gaU = est.delta_lo, est.delta_hi
        lam_yz = est.lam_shift_twice

    if schur:
        ph_, phU = nu_, nuU
        pp_, ppU = om_, omU
        hb_lo, hb_hi = est.bottom_lo, est.bottom_hi
    else:
        ph_, phU = 0.0, 0.0
        pp_, ppU = 0.0, 0.0
        hb_lo, hb_hi = (lambda t: ta_), (lambda t: taU)

    xh = ppU * phU * (1.0 - ga_) / mu_
    x1 = nuU - nuU / muU

    if gaU <= 1.0:
        lo = min(mu_, hb_lo(phU) + pp_ * (1.0 - phU), ga_ * nu_ / g1(xh)) * g1(xh)
        hi = max(muU, hb_hi(phU) + ppU * (1.0 - ph_), gaU * nuU / g2(xh)) * g2(xh)
        rho = np.sqrt(omU - ppU + ppU * unit_dev_sq(gaU * phU, ga_ * ph_)
                      + nuU * lam_yz)
    elif ga_ >= 1.0:
        lo = min(mu_ * g1(x1), nu_ * g1(x1),
                 hb_lo(muU * phU) + pp_ * (1.0 - muU * phU))
        hi = max(muU * g2(x1), nuU * g2(x1),
                 hb_hi(muU * phU) + ppU * (1.0 - mu_ * ph_))
        rho = np.sqrt(omU - ppU
                      + ppU * ((muU - 1.0) * muU * phU
                               + unit_dev_sq(muU * phU, mu_ * ph_)))
    else:
        lo = min(mu_, hb_lo(muU * phU) + pp_ * (1.0 - muU * phU),
                 g1(x1) / g1(xh), mu_ * nu_ * g1(x1) / g1(xh)) * g1(xh)
        hi = max(1.0, hb_hi(muU * phU) + ppU * (1.0 - ph_),
                 muU * g2(x1) / g2(xh), nuU * g2(x1) / g2(xh)) * g2(xh)
        rho = np.sqrt(omU - ppU
                      + ppU * ((muU - 1.0) * muU * phU
                               + unit_dev_sq(muU * phU, mu_ * ph_))
                      + nuU * est.lam_shift_once)
    return EigenBox(float(lo), float(hi), float(rho))


# -- Bendixson rectangles --------------------------------------------------

def classic_bendixson_box(H) -> EigenBox:
    """Re/Im ranges of any real square matrix from its symmetric and skew
    parts."""
    H = as_dense(H, "matrix")
    if H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    sym = 0.5 * (H + H.T)
    skew = 0.5 * (H - H.T)
    w, _ = symmetric_eigen(sym)
    w2, _ = symmetric_eigen(skew.T @ skew)
    return EigenBox(float(w[0]), float(w[-1]), float(np.sqrt(max(w2[-1], 0.0))))


def block_bendixson_box(At, Bt, Ct, Dt, Et, Ft) -> EigenBox:
    """Eigenvalue rectangle for the skew-coupled block matrix

        [ At    Bt^T   Et^T ]
        [-Bt    Dt     Ct^T ]
        [ Et   -Ct     Ft   ]

    requiring At SPD, Dt symmetric, and Ft - Et At^{-1} Et^T positive
    semidefinite (HypothesisViolated otherwise).
    """
    At, Dt, Ft = map(as_dense, (At, Dt, Ft))
    Bt, Ct, Et = map(as_dense, (Bt, Ct, Et))
    try:
        At = require_symmetric(At, name="leading block")
        L = dense_cholesky(At)
    except NotSPDError as exc:
        raise HypothesisViolatedError(f"leading block must be SPD: {exc}") from exc
    gap = np.abs(Dt - Dt.T).max() if Dt.size else 0.0
    if gap > 1e-12 * (np.abs(Dt).max() if Dt.size else 0.0) + ABS_FLOOR:
        raise HypothesisViolatedError("middle block must be symmetric")

    if Et.size:
        Y = triangular_solve(L, Et.T)          # L^{-1} Et^T
        F_s = Ft - Y.T @ Y
        Z = triangular_solve(L, Y, transpose=True)   # At^{-1} Et^T
        q_mat = Z.T @ Z                         # Et At^{-2} Et^T
        wq, _ = symmetric_eigen(0.5 * (q_mat + q_mat.T))
        q = float(max(wq[-1], 0.0)) if wq.size else 0.0
    else:
        F_s = Ft.copy()
        q = 0.0
    F_s = 0.5 * (F_s + F_s.T)

    terms_lo, terms_hi = [], []
    wa, _ = symmetric_eigen(At)
    if wa.size and wa[0] <= 0:
        raise HypothesisViolatedError("leading block must be positive definite")
    terms_lo.append(float(wa[0]))
    terms_hi.append(float(wa[-1]))

    if F_s.size:
        wf, _ = symmetric_eigen(F_s)
        scale = max(abs(wf[0]), abs(wf[-1]), 1e-300)
        if wf[0] < -1e-10 * scale - ABS_FLOOR:
            raise HypothesisViolatedError(
                f"trailing Schur block must be PSD (lambda_min={wf[0]:.3e})")
        terms_lo.append(float(wf[0]))
        terms_hi.append(float(wf[-1]))

    g1 = shear_eig_lower(q)
    g2 = shear_eig_upper(q)
    if Dt.size:
        wd, _ = symmetric_eigen(0.5 * (Dt + Dt.T))
        terms_lo.append(float(wd[0]) / g1)
        terms_hi.append(float(wd[-1]) / g2)

    re_lo = min(terms_lo) * g1
    re_hi = max(terms_hi) * g2

    m_dim = Bt.shape[0]
    if Ct.size and Ct.shape[1] != m_dim:
        raise ValueError("coupling blocks do not conform")
    skew_sq = np.zeros((m_dim, m_dim))
    if Bt.size:
        skew_sq = skew_sq + Bt @ Bt.T
    if Ct.size:
        skew_sq = skew_sq + Ct.T @ Ct
    if skew_sq.size:
        wn, _ = symmetric_eigen(0.5 * (skew_sq + skew_sq.T))
        im = float(np.sqrt(max(wn[-1], 0.0)))
    else:
        im = 0.0
    return EigenBox(float(re_lo), float(re_hi), im)


def assemble_bendixson(At, Bt, Ct, Dt, Et, Ft) -> np.ndarray:
    """The skew-coupled block matrix whose spectrum block_bendixson_box
    bounds."""
    At, Bt, Ct, Dt, Et, Ft = map(as_dense, (At, Bt, Ct, Dt, Et, Ft))
    top = np.hstack([At, Bt.T, Et.T])
    mid = np.hstack([-Bt, Dt, Ct.T])
    bot = np.hstack([Et, -Ct, Ft])
    return np.vstack([top, mid, bot])


# -- spectrum-equivalent construction --------------------------------------

UNIT_EIG_TOL = 1e-8


def _equivalence_parts(sys: BlockSystem, blocks: ApproxBlocks, kind):
    """Diagonalized pieces of the congruence construction (desk scale)."""
    k = kind_from_tag(kind)
    A_d = sys.A.to_dense()
    scale = 1.0
    eps = UNIT_EIG_TOL
    for _ in range(64):
        Ah = matrix_sqrt_spd(scale * A_d)
        half = blocks.m_a.solve(Ah)
        P = Ah @ half
        lam, X = symmetric_eigen(0.5 * (P + P.T))
        if not np.any(np.abs(lam - 1.0) < UNIT_EIG_TOL):
            break
        # continuity argument: shrink the leading block until no pencil
        # eigenvalue sits on the unit value
        scale *= (1.0 - eps)
        eps *= 2.0
    lam = np.maximum(lam, 1e-300)
    ly = lam if k.lower else np.zeros_like(lam)
    lz = lam if k.upper else np.zeros_like(lam)
    gamma = ly + lz - ly * lz
    dplus = np.sqrt(np.maximum(1.0 - gamma, 0.0))
    dminus = np.sqrt(np.maximum(gamma - 1.0, 0.0))

    ah_f = dense_factor(Ah)
    sh_half = matrix_sqrt_spd(blocks.s_hat_mat.to_dense()
                              if isinstance(blocks.s_hat_mat, SparseMatrix)
                              else blocks.s_hat_mat)
    msh_half = matrix_sqrt_spd(blocks.m_s_hat_mat.to_dense()
                               if isinstance(blocks.m_s_hat_mat, SparseMatrix)
                               else blocks.m_s_hat_mat)
    sh_f = dense_factor(sh_half)
    msh_f = dense_factor(msh_half)

    W1 = ah_f.solve(X)                        # A^{-1/2} X
    G = sh_f.solve(sys.B.matmat(W1))          # S_hat^{-1/2} B A^{-1/2} X
    H = msh_f.solve(sh_f.solve(sys.C.to_dense().T).T)   # M_S^{-1/2} C S_hat^{-1/2}
    Dh = msh_f.solve(msh_f.solve(sys.D.to_dense()).T)
    Dh = 0.5 * (Dh + Dh.T)
    return dict(lam=lam, X=X, gamma=gamma, dplus=dplus, dminus=dminus,
                G=G, H=H, Dhat=Dh, scale=scale, kind=k)


def spectral_equivalent(sys: BlockSystem, blocks: ApproxBlocks, kind) -> np.ndarray:
    """Dense matrix sharing the spectrum of the preconditioned operator.

    Built from the congruence pieces; numerically far better conditioned
    than forming the preconditioned product when the spectrum is defective.
    """
    parts = _equivalence_parts(sys, blocks, kind)
    k = parts["kind"]
    lam, gamma = parts["lam"], parts["gamma"]
    dplus, dminus = parts["dplus"], parts["dminus"]
    G, H, Dh = parts["G"], parts["H"], parts["Dhat"]
    n = lam.shape[0]
    m = G.shape[0]
    l = H.shape[0]

    sl = np.sqrt(lam)
    if k.schur:
        GW, HW = G, H
    else:
        GW = np.zeros_like(G)
        HW = np.zeros_like(H)
    GWHWt = GW.T @ HW.T
    FW = 2.0 * np.eye(m) - GW @ (gamma[:, None] * GW.T)

    K11 = np.diag(lam)
    K12 = ((dplus + dminus) * sl)[:, None] * G.T
    K13 = ((dplus + dminus) * sl)[:, None] * GWHWt
    K21 = -G @ np.diag(sl * (dplus - dminus))
    K22 = G @ (gamma[:, None] * G.T)
    K23 = G @ (gamma[:, None] * GWHWt) - H.T
    K31 = HW @ GW @ np.diag(sl * (dplus - dminus))
    K32 = H - HW @ GW @ (gamma[:, None] * G.T)
    K33 = Dh + HW @ FW @ HW.T
    return np.block([[K11, K12, K13], [K21, K22, K23], [K31, K32, K33]])


def preconditioned_dense(sys: BlockSystem, blocks: ApproxBlocks, kind) -> np.ndarray:
    """M^{-1} K assembled column by column through the factored applies."""
    P = BlockPreconditioner(kind, blocks, sys)
    K = assemble_monolithic(sys).to_dense()
    N = K.shape[0]
    W = np.empty_like(K)
    for j in range(N):
        W[:, j] = P.apply_inverse(K[:, j])
    return W


@dataclass
class SpectrumCheck:
    kind: str
    eigenvalues: np.ndarray
    box: EigenBox
    in_box: np.ndarray
    slack: float

    @property
    def all_contained(self) -> bool:
        return bool(self.in_box.all())

    @property
    def contained_fraction(self) -> float:
        return float(self.in_box.mean()) if self.in_box.size else 1.0

    def records(self):
        """Plot-ready rows (re, im, in_box)."""
        return [(float(z.real), float(z.imag), bool(ok))
                for z, ok in zip(self.eigenvalues, self.in_box)]


def spectrum_and_check(sys: BlockSystem, blocks: ApproxBlocks, kind,
                       slack: float = 1e-8,
                       dense_threshold: int = DENSE_THRESHOLD) -> SpectrumCheck:
    """Dense preconditioned spectrum, bound box, and containment flags."""
    est = estimate_constants(sys, blocks, dense_threshold)
    box = kind_box(kind, est)
    W = preconditioned_dense(sys, blocks, kind)
    lam = nonsymmetric_eigen(W)
    return SpectrumCheck(kind_from_tag(kind).tag, lam, box,
                         box.contains(lam, slack), slack)
