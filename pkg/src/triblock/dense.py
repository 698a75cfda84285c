"""Dense numerical kernels: Cholesky, triangular solves, eigensolvers,
SPD square root, Lanczos extreme estimates, and rank checks.

Eigensolvers are the package's own (cyclic Jacobi for symmetric input,
Householder Hessenberg + double-shift QR otherwise) running on the selected
kernel backend; they stay independent of any LAPACK eigen routine so tests
can use numpy as an outside oracle.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .errors import DimensionError, EigenConvergenceError, NotSPDError
from .sparse import as_dense

ABS_FLOOR = 1e-14


def require_square(A, name="matrix"):
    A = as_dense(A, name)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got {A.shape}")
    return A


def require_symmetric(A, rel_tol=1e-12, name="matrix"):
    A = require_square(A, name)
    scale = np.abs(A).max() if A.size else 0.0
    gap = np.abs(A - A.T).max() if A.size else 0.0
    if gap > rel_tol * scale + ABS_FLOOR:
        raise NotSPDError(f"{name} is not symmetric (gap {gap:.3e})")
    return A


def dense_cholesky(A) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix."""
    A = require_symmetric(A)
    L, bad = kernels.dense_chol(np.ascontiguousarray(A))
    if bad >= 0:
        raise NotSPDError(f"nonpositive pivot at index {bad}; matrix is not SPD")
    return L


def triangular_solve(L, B, transpose=False) -> np.ndarray:
    """Solve L X = B, or L^T X = B when transpose is set (L lower triangular)."""
    L = require_square(L, "triangular factor")
    B = np.asarray(B, dtype=np.float64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    if B.shape[0] != L.shape[0]:
        raise DimensionError("right-hand side does not conform")
    X = kernels.dense_tri_solve(np.ascontiguousarray(L),
                                np.ascontiguousarray(B), 1 if transpose else 0)
    return X[:, 0] if vec else X


def chol_solve(L, B) -> np.ndarray:
    """(L L^T)^{-1} B through the two triangular solves."""
    return triangular_solve(L, triangular_solve(L, B), transpose=True)


def symmetric_eigen(A, max_sweeps=60):
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric A."""
    A = require_symmetric(A)
    if A.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0))
    w, V, sweeps = kernels.jacobi_eigh(np.ascontiguousarray(A), max_sweeps)
    if sweeps < 0:
        raise EigenConvergenceError(
            f"Jacobi sweeps exceeded {max_sweeps} without convergence")
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def two_norm_estimate(A, iters=25, seed=0) -> float:
    """Power-iteration estimate of the spectral norm."""
    A = as_dense(A)
    if A.size == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        est = np.sqrt(nw)
        v = w / nw
    return float(est)


def nonsymmetric_eigen(A, check_samples=4, max_sweep_mult=30):
    """All eigenvalues of a real square matrix as a complex array.

    Hessenberg reduction followed by double-shift QR; a handful of computed
    eigenvalues are re-verified through inverse iteration and must satisfy
    ||A v - lambda v|| <= 1e-8 ||A||_2.
    """
    A = require_square(A)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    H = kernels.hessenberg(np.ascontiguousarray(A))
    wr, wi, status = kernels.hqr_eigvals(H, max_sweep_mult * n)
    if status != 0:
        raise EigenConvergenceError(
            f"QR iteration exceeded {max_sweep_mult}*n sweeps")
    lam = wr + 1j * wi
    if check_samples > 0 and n > 1:
        _verify_eigenpairs(A, lam, check_samples)
    return lam

def _verify_eigenpairs(A, lam, count):
    n = A.shape[0]
    norm_a = two_norm_estimate(A)
    if norm_a == 0.0:
        return
    rng = np.random.default_rng(12345)
    idx = np.linspace(0, len(lam) - 1, min(count, len(lam))).astype(int)
    for k in idx:
        mu = lam[k]
        shift = mu + (1e-10 * (abs(mu) + norm_a)) * (1 + 1j)
        M = A.astype(np.complex128) - shift * np.eye(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        best = np.inf
        for _ in range(3):
            try:
                v = np.linalg.solve(M, v)
            except np.linalg.LinAlgError:
                shift *= 1 + 1e-8
                M = A.astype(np.complex128) - shift * np.eye(n)
                continue
            v /= np.linalg.norm(v)
            best = min(best, float(np.linalg.norm(A @ v - mu * v)))
        if best > 1e-8 * norm_a + ABS_FLOOR:
            raise EigenConvergenceError(
                f"eigenpair residual {best:.3e} exceeds 1e-8*||A||")


def matrix_sqrt_spd(A) -> np.ndarray:
    """Symmetric positive definite square root, via the symmetric eigensolver."""
    A = require_symmetric(A)
    w, V = symmetric_eigen(A)
    if A.shape[0] and w[0] <= 0.0:
        raise NotSPDError(f"matrix has nonpositive eigenvalue {w[0]:.3e}")
    return (V * np.sqrt(w)) @ V.T


def lanczos_extremes(matvec, n, iters=80, seed=0):
    """Extreme eigenvalue estimates of a symmetric operator given as a matvec.

    Full reorthogonalization; adequate for the interval-envelope estimates on
    operators too large for the dense path.
    """
    iters = min(iters, n)
    rng = np.random.default_rng(seed)
    V = np.zeros((n, iters + 1))
    alpha = np.zeros(iters)
    beta = np.zeros(iters + 1)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    V[:, 0] = v
    k_used = 0
    for k in range(iters):
        w = matvec(V[:, k])
        alpha[k] = V[:, k] @ w
        w = w - alpha[k] * V[:, k]
        if k > 0:
            w = w - beta[k] * V[:, k - 1]
        w = w - V[:, :k + 1] @ (V[:, :k + 1].T @ w)
        beta[k + 1] = np.linalg.norm(w)
        k_used = k + 1
        if beta[k + 1] < 1e-12:
            break
        V[:, k + 1] = w / beta[k + 1]
    T = np.diag(alpha[:k_used])
    if k_used > 1:
        T += np.diag(beta[1:k_used], 1) + np.diag(beta[1:k_used], -1)
    w, _ = symmetric_eigen(T)
    return float(w[0]), float(w[-1])


def row_rank(A, rel_tol=1e-10) -> int:
    """Numerical row rank through QR of the transpose.

    The diagonal of R is compared against rel_tol times the largest singular
    value (power-iteration estimate); intended for desk-scale validation.
    """
    A = as_dense(A)
    if min(A.shape) == 0:
        return 0
    R = np.linalg.qr(A.T, mode="r")
    sigma = two_norm_estimate(A)
    if sigma == 0.0:
        return 0
    return int(np.sum(np.abs(np.diag(R)) > rel_tol * sigma))
