"""GMRES with block preconditioning.

Full (unrestarted) GMRES by default, modified Gram-Schmidt with one
conditional reorthogonalization pass, and a choice of preconditioning side:

  * "left":  iterates on M^{-1}K, stopping on the preconditioned relative
    residual estimate |g_{k+1}| / ||M^{-1}b||.  This matches the convention
    of the usual MATLAB-style gmres runs and reproduces published iteration
    counts for ill-scaled preconditioners.
  * "right": iterates on K M^{-1}, stopping on the true relative residual
    ||b - K x_k|| / ||b|| evaluated explicitly every iteration.

The report always carries the final true relative residual regardless of
the stopping rule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotSupportedError
from .sparse import SparseMatrix, as_vector

BREAKDOWN_FLOOR = 1e-14


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-6
    maxit: int = 1000
    restart: int | None = None
    record_history: bool = True
    precond_side: str = "left"
    reorth_threshold: float = 1e-10

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.maxit < 1:
            raise ValueError("maxit must be at least 1")
        if self.restart is not None and self.restart < 1:
            raise ValueError("restart must be positive when given")
        if self.precond_side not in ("left", "right"):
            raise NotSupportedError("precond_side must be 'left' or 'right'")


@dataclass
class SolveReport:
    iterations: int = 0
    converged: bool = False
    termination: str = "maxit"
    relative_residuals: list = field(default_factory=list)
    true_relative_residual: float = np.inf
    wall_time: float = 0.0
    arnoldi_orthogonality: float | None = None


def _as_matvec(K):
    if isinstance(K, SparseMatrix):
        return K.matvec, K.nrows
    if isinstance(K, np.ndarray):
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise DimensionError("dense operator must be square")
        return (lambda v: K @ v), K.shape[0]
    if callable(K):
        return K, None
    if hasattr(K, "matvec"):
        return K.matvec, getattr(K, "nrows", None)
    raise NotSupportedError("operator must be SparseMatrix, ndarray, or callable")


def _as_preconditioner(M):
    if M is None:
        return lambda v: v
    if hasattr(M, "apply_inverse"):
        return M.apply_inverse
    if callable(M):
        return M
    raise NotSupportedError("preconditioner must expose apply_inverse or be callable")


class _Basis:
    """Arnoldi basis with geometric column growth."""

    def __init__(self, n, hint):
        self.n = n
        self.V = np.zeros((n, min(hint, 33)))
        self.k = 0  # columns stored

    def ensure(self, cols):
        if cols > self.V.shape[1]:
            grown = np.zeros((self.n, max(cols, 2 * self.V.shape[1])))
            grown[:, :self.k] = self.V[:, :self.k]
            self.V = grown

    def push(self, v):
        self.ensure(self.k + 1)
        self.V[:, self.k] = v
        self.k += 1

    def cols(self, j=None):
        return self.V[:, :self.k if j is None else j]


def gmres(K, M, b, cfg: SolveConfig = SolveConfig()):
    """Solve K x = b with (optionally preconditioned) GMRES.

    Starts from x0 = 0 and returns (x, SolveReport); iterations stop at the
    first Arnoldi step whose stopping residual reaches cfg.tol, at a happy
    breakdown, or after cfg.maxit total steps.
    """
    matvec, nrows = _as_matvec(K)
    apply_m = _as_preconditioner(M)
    b = as_vector(b, nrows, "rhs")
    N = b.shape[0]
    t0 = time.perf_counter()
    rep = SolveReport()

    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        rep.converged = True
        rep.termination = "converged"
        rep.true_relative_residual = 0.0
        rep.wall_time = time.perf_counter() - t0
        return np.zeros(N), rep

    left = cfg.precond_side == "left"
    denom = float(np.linalg.norm(apply_m(b))) if left else norm_b
    if denom == 0.0:
        raise NotSupportedError("preconditioned right-hand side vanished")

    x = np.zeros(N)
    cycle = cfg.restart if cfg.restart is not None else cfg.maxit
    total_it = 0
    ortho_worst = 0.0
    done = False

    while total_it < cfg.maxit and not done:
        r = b - matvec(x) if total_it else b.copy()
        if left:
            r = apply_m(r)
        beta = float(np.linalg.norm(r))
        if beta <= cfg.tol * denom:
            rep.converged = True
            rep.termination = "converged"
            break

        steps = min(cycle, cfg.maxit - total_it)
        basis = _Basis(N, steps + 1)
        H = np.zeros((steps + 1, steps))
        cs = np.zeros(steps)
        sn = np.zeros(steps)
        gvec = np.zeros(steps + 1)
        gvec[0] = beta
        basis.push(r / beta)
        k_done = 0
        breakdown = False

        for k in range(steps):
            if left:
                w = apply_m(matvec(basis.V[:, k]))
            else:
                w = matvec(apply_m(basis.V[:, k]))
            norm_w0 = float(np.linalg.norm(w))
            Vk = basis.cols()
            hcol = Vk.T @ w
            w = w - Vk @ hcol
            corr = Vk.T @ w
            if float(np.linalg.norm(corr)) > cfg.reorth_threshold * max(norm_w0, 1e-300):
                w = w - Vk @ corr
                hcol = hcol + corr
            H[:k + 1, k] = hcol
            hk1 = float(np.linalg.norm(w))
            H[k + 1, k] = hk1
            if hk1 > BREAKDOWN_FLOOR * max(norm_w0, 1.0):
                basis.push(w / hk1)
            else:
                breakdown = True
            for i in range(k):
                t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
                H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
                H[i, k] = t
            d = float(np.hypot(H[k, k], H[k + 1, k]))
            if d == 0.0:
                cs[k], sn[k] = 1.0, 0.0
            else:
                cs[k], sn[k] = H[k, k] / d, H[k + 1, k] / d
            H[k, k] = d
            H[k + 1, k] = 0.0
            gvec[k + 1] = -sn[k] * gvec[k]
            gvec[k] = cs[k] * gvec[k]
            k_done = k + 1
            total_it += 1

            if left:
                res = abs(gvec[k + 1]) / denom
            else:
                y = _solve_upper(H, gvec, k_done)
                xk = x + apply_m(basis.cols(k_done) @ y)
                res = float(np.linalg.norm(b - matvec(xk))) / norm_b
            rep.relative_residuals.append(float(res))
            if res <= cfg.tol or breakdown:
                rep.converged = bool(res <= cfg.tol) or breakdown
                rep.termination = "converged" if res <= cfg.tol else "breakdown"
                done = True
                break

        y = _solve_upper(H, gvec, k_done)
        if k_done:
            upd = basis.cols(k_done) @ y
            x = x + (upd if left else apply_m(upd))
            if cfg.record_history:
                # measure over the solution-spanning columns; a final
                # near-breakdown direction is noise and is not used
                Vk = basis.cols(k_done)
                gram = np.abs(Vk.T @ Vk - np.eye(Vk.shape[1])).max()
                ortho_worst = max(ortho_worst, float(gram))
        if cfg.restart is None and not done:
            rep.termination = "maxit"
            break

    rep.iterations = total_it
    rep.true_relative_residual = float(np.linalg.norm(b - matvec(x))) / norm_b
    rep.wall_time = time.perf_counter() - t0
    if cfg.record_history:
        rep.arnoldi_orthogonality = ortho_worst
    return x, rep


def _solve_upper(H, gvec, k):
    if k == 0:
        return np.zeros(0)
    return np.linalg.solve(np.triu(H[:k, :k]), gvec[:k])
