# cython: language_level=3
"""Compiled hot kernels: CSR products, droptol incomplete Cholesky, triangular
solves, dense Cholesky, cyclic-Jacobi symmetric eigensolver, and Hessenberg-QR
nonsymmetric eigenvalues.

Mirrored by the numpy implementations in _kernels_py; triblock.backend picks
one of the two at import time.
"""

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc

NAME = "compiled"

DEF EPS = 2.220446049250313e-16


def csr_matvec(long[::1] indptr, long[::1] indices, double[::1] data,
               double[::1] x, long nrows):
    y = np.zeros(nrows, dtype=np.float64)
    cdef double[::1] yv = y
    cdef long i, t
    cdef double acc
    with nogil:
        for i in range(nrows):
            acc = 0.0
            for t in range(indptr[i], indptr[i + 1]):
                acc += data[t] * x[indices[t]]
            yv[i] = acc
    return y


def csr_matmul(long[::1] ap, long[::1] ai, double[::1] ax,
               long[::1] bp, long[::1] bi, double[::1] bx,
               long nrows, long ncols):
    """Gustavson row-by-row product; output rows sorted, duplicates summed."""
    cdef long i, t, u, k, col, nnz, pos, count
    cdef double a
    cdef long *mark = <long *> malloc(ncols * sizeof(long))
    if mark == NULL:
        raise MemoryError
    for k in range(ncols):
        mark[k] = -1
    # pass 1: count nnz per row
    cp = np.zeros(nrows + 1, dtype=np.int64)
    cdef long[::1] cpv = cp
    with nogil:
        for i in range(nrows):
            count = 0
            for t in range(ap[i], ap[i + 1]):
                k = ai[t]
                for u in range(bp[k], bp[k + 1]):
                    col = bi[u]
                    if mark[col] != i:
                        mark[col] = i
                        count += 1
            cpv[i + 1] = cpv[i] + count
    nnz = cpv[nrows]
    ci = np.empty(nnz, dtype=np.int64)
    cx = np.empty(nnz, dtype=np.float64)
    cdef long[::1] civ = ci
    cdef double[::1] cxv = cx
    cdef double *work = <double *> malloc(ncols * sizeof(double))
    if work == NULL:
        free(mark)
        raise MemoryError
    for k in range(ncols):
        mark[k] = -1
    cdef long j, lo, hi, key_i
    cdef double key_x
    with nogil:
        for i in range(nrows):
            pos = cpv[i]
            for t in range(ap[i], ap[i + 1]):
                k = ai[t]
                a = ax[t]
                for u in range(bp[k], bp[k + 1]):
                    col = bi[u]
                    if mark[col] != i:
                        mark[col] = i
                        work[col] = a * bx[u]
                        civ[pos] = col
                        pos += 1
                    else:
                        work[col] += a * bx[u]
            lo = cpv[i]
            hi = cpv[i + 1]
            # insertion sort of the row's column indices
            for t in range(lo + 1, hi):
                key_i = civ[t]
                u = t - 1
                while u >= lo and civ[u] > key_i:
                    civ[u + 1] = civ[u]
                    u -= 1
                civ[u + 1] = key_i
            for t in range(lo, hi):
                cxv[t] = work[civ[t]]
    free(mark)
    free(work)
    return cp, ci, cx


def ichol_dt(long n, long[::1] ap, long[::1] ai, double[::1] ax,
             double droptol, double[::1] colnorm):
    """Column-oriented incomplete Cholesky with threshold dropping.

    A is full symmetric CSR; the lower part of column j is read from the
    tail of row j.  Returns (lp, li, lx, bad) in compressed-column layout,
    bad = -1 on success, else the column with a nonpositive pivot.
    """
    cdef long nnz_est = ax.shape[0] + n
    cdef long cap = 2 * nnz_est + 16
    lp = np.zeros(n + 1, dtype=np.int64)
    li = np.empty(cap, dtype=np.int64)
    lx = np.empty(cap, dtype=np.float64)
    cdef long[::1] lpv = lp
    cdef long[::1] liv = li
    cdef double[::1] lxv = lx

    head = np.full(n, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    ptr = np.zeros(n, dtype=np.int64)
    w = np.zeros(n, dtype=np.float64)
    wmark = np.full(n, -1, dtype=np.int64)
    wrows = np.empty(n, dtype=np.int64)
    cdef long[::1] headv = head
    cdef long[::1] nxtv = nxt
    cdef long[::1] ptrv = ptr
    cdef double[::1] wv = w
    cdef long[::1] wmarkv = wmark
    cdef long[::1] wrowsv = wrows

    cdef long j, t, c, k, knext, t0, r, cnt, pos, u, key_i, need
    cdef double ljk, dj, thresh, val

    pos = 0
    for j in range(n):
        cnt = 0
        for t in range(ap[j], ap[j + 1]):
            c = ai[t]
            if c >= j:
                if wmarkv[c] != j:
                    wmarkv[c] = j
                    wv[c] = ax[t]
                    wrowsv[cnt] = c
                    cnt += 1
                else:
                    wv[c] += ax[t]
        k = headv[j]
        while k != -1:
            knext = nxtv[k]
            t0 = ptrv[k]
            ljk = lxv[t0]
            for t in range(t0, lpv[k + 1]):
                r = liv[t]
                if wmarkv[r] != j:
                    wmarkv[r] = j
                    wv[r] = 0.0
                    wrowsv[cnt] = r
                    cnt += 1
                wv[r] -= ljk * lxv[t]
            if t0 + 1 < lpv[k + 1]:
                ptrv[k] = t0 + 1
                r = liv[t0 + 1]
                nxtv[k] = headv[r]
                headv[r] = k
            k = knext
        if wmarkv[j] != j or wv[j] <= 0.0:
            return lp, np.asarray(li[:pos]), np.asarray(lx[:pos]), j
        dj = sqrt(wv[j])
        # sort collected rows ascending (insertion; fill is modest at desk scale)
        for t in range(1, cnt):
            key_i = wrowsv[t]
            u = t - 1
            while u >= 0 and wrowsv[u] > key_i:
                wrowsv[u + 1] = wrowsv[u]
                u -= 1
            wrowsv[u + 1] = key_i
        need = pos + cnt
        if need > cap:
            while cap < need:
                cap *= 2
            li = np.concatenate([np.asarray(li), np.empty(cap - li.shape[0], dtype=np.int64)])
            lx = np.concatenate([np.asarray(lx), np.empty(cap - lx.shape[0], dtype=np.float64)])
            liv = li
            lxv = lx
        liv[pos] = j
        lxv[pos] = dj
        pos += 1
        thresh = droptol * colnorm[j]
        for t in range(cnt):
            r = wrowsv[t]
            if r == j:
                continue
            val = wv[r] / dj
            if fabs(val) >= thresh:
                liv[pos] = r
                lxv[pos] = val
                pos += 1
        lpv[j + 1] = pos
        if lpv[j + 1] - lpv[j] > 1:
            ptrv[j] = lpv[j] + 1
            r = liv[lpv[j] + 1]
            nxtv[j] = headv[r]
            headv[r] = j
    return lp, np.asarray(li[:pos]).copy(), np.asarray(lx[:pos]).copy(), -1


def csc_lower_solve(long[::1] lp, long[::1] li, double[::1] lx, double[::1] b):
    """x = L^{-1} b with L in compressed-column form (diagonal entry first)."""
    x = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] xv = x
    cdef long n = lp.shape[0] - 1
    cdef long j, t
    cdef double xj
    with nogil:
        for j in range(n):
            xj = xv[j] / lx[lp[j]]
            xv[j] = xj
            for t in range(lp[j] + 1, lp[j + 1]):
                xv[li[t]] -= lx[t] * xj
    return x

def csc_lower_solve_t(long[::1] lp, long[::1] li, double[::1] lx, double[::1] b):
    """x = L^{-T} b with L in compressed-column form."""
    x = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] xv = x
    cdef long n = lp.shape[0] - 1
    cdef long j, t
    cdef double acc
    with nogil:
        for j in range(n - 1, -1, -1):
            acc = xv[j]
            for t in range(lp[j] + 1, lp[j + 1]):
                acc -= lx[t] * xv[li[t]]
            xv[j] = acc / lx[lp[j]]
    return x


def dense_chol(double[:, ::1] A):
    """Lower Cholesky factor of A; returns (L, bad) with bad = -1 on success."""
    cdef long n = A.shape[0]
    L = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] Lv = L
    cdef long i, j, k
    cdef double acc
    with nogil:
        for j in range(n):
            acc = A[j, j]
            for k in range(j):
                acc -= Lv[j, k] * Lv[j, k]
            if acc <= 0.0:
                with gil:
                    return L, j
            Lv[j, j] = sqrt(acc)
            for i in range(j + 1, n):
                acc = A[i, j]
                for k in range(j):
                    acc -= Lv[i, k] * Lv[j, k]
                Lv[i, j] = acc / Lv[j, j]
    return L, -1


def dense_tri_solve(double[:, ::1] L, double[:, ::1] B, long trans):
    """Solve L X = B (trans=0) or L^T X = B (trans=1); L lower, B (n, k)."""
    cdef long n = L.shape[0]
    cdef long m = B.shape[1]
    X = np.array(B, dtype=np.float64, copy=True)
    cdef double[:, ::1] Xv = X
    cdef long i, j, c
    cdef double piv
    with nogil:
        if trans == 0:
            for i in range(n):
                piv = L[i, i]
                for c in range(m):
                    Xv[i, c] /= piv
                for j in range(i + 1, n):
                    if L[j, i] != 0.0:
                        for c in range(m):
                            Xv[j, c] -= L[j, i] * Xv[i, c]
        else:
            for i in range(n - 1, -1, -1):
                piv = L[i, i]
                for c in range(m):
                    Xv[i, c] /= piv
                for j in range(i):
                    if L[i, j] != 0.0:
                        for c in range(m):
                            Xv[j, c] -= L[i, j] * Xv[i, c]
    return X


def jacobi_eigh(double[:, ::1] Ain, long max_sweeps):
    """Cyclic Jacobi for symmetric matrices; returns (w, V, sweeps) with
    sweeps = -1 when the off-diagonal norm failed to converge."""
    cdef long n = Ain.shape[0]
    A = np.array(Ain, dtype=np.float64, copy=True)
    V = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] Av = A
    cdef double[:, ::1] Vv = V
    cdef long sweep, p, q, k
    cdef double off, fro, apq, app, aqq, theta, tt, c, s, akp, akq, tol
    fro = 0.0
    for p in range(n):
        for q in range(n):
            fro += Av[p, q] * Av[p, q]
    fro = sqrt(fro)
    tol = 1e-14 * fro + 1e-300
    cdef long done = 0
    cdef long used = -1
    with nogil:
        for sweep in range(max_sweeps):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * Av[p, q] * Av[p, q]
            off = sqrt(off)
            if off <= tol:
                done = 1
                used = sweep
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = Av[p, q]
                    if fabs(apq) <= 1e-300:
                        continue
                    app = Av[p, p]
                    aqq = Av[q, q]
                    theta = 0.5 * (aqq - app) / apq
                    if theta >= 0:
                        tt = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        tt = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(tt * tt + 1.0)
                    s = tt * c
                    for k in range(n):
                        akp = Av[k, p]
                        akq = Av[k, q]
                        Av[k, p] = c * akp - s * akq
                        Av[k, q] = s * akp + c * akq
                    for k in range(n):
                        akp = Av[p, k]
                        akq = Av[q, k]
                        Av[p, k] = c * akp - s * akq
                        Av[q, k] = s * akp + c * akq
                    for k in range(n):
                        akp = Vv[k, p]
                        akq = Vv[k, q]
                        Vv[k, p] = c * akp - s * akq
                        Vv[k, q] = s * akp + c * akq
    if not done:
        # final recheck: accept if the last sweep finished the job
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * Av[p, q] * Av[p, q]
        if sqrt(off) <= tol:
            used = max_sweeps
        else:
            return np.diag(A), V, -1
    w = np.diag(A).copy()
    return w, V, used


def hessenberg(double[:, ::1] Ain):
    """Householder reduction to upper Hessenberg form (returns a new array)."""
    cdef long n = Ain.shape[0]
    H = np.array(Ain, dtype=np.float64, copy=True)
    cdef double[:, ::1] Hv = H
    v = np.zeros(n, dtype=np.float64)
    cdef double[::1] vv = v
    cdef long k, i, j
    cdef double alpha, nrm, beta, acc
    with nogil:
        for k in range(n - 2):
            nrm = 0.0
            for i in range(k + 1, n):
                nrm += Hv[i, k] * Hv[i, k]
            nrm = sqrt(nrm)
            if nrm == 0.0:
                continue
            alpha = -nrm if Hv[k + 1, k] >= 0 else nrm
            beta = 0.0
            for i in range(k + 1, n):
                vv[i] = Hv[i, k]
            vv[k + 1] -= alpha
            for i in range(k + 1, n):
                beta += vv[i] * vv[i]
            if beta == 0.0:
                continue
            # rows k+1..n-1
            for j in range(k, n):
                acc = 0.0
                for i in range(k + 1, n):
                    acc += vv[i] * Hv[i, j]
                acc = 2.0 * acc / beta
                for i in range(k + 1, n):
                    Hv[i, j] -= acc * vv[i]
            # columns k+1..n-1
            for i in range(n):
                acc = 0.0
                for j in range(k + 1, n):
                    acc += Hv[i, j] * vv[j]
                acc = 2.0 * acc / beta
                for j in range(k + 1, n):
                    Hv[i, j] -= acc * vv[j]
            for i in range(k + 2, n):
                Hv[i, k] = 0.0
    return H


def hqr_eigvals(double[:, ::1] Hin, long sweep_cap):
    """Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).

    Returns (wr, wi, status); status 0 = converged, 1 = sweep cap exceeded.
    """
    cdef long n = Hin.shape[0]
    H = np.array(Hin, dtype=np.float64, copy=True)
    cdef double[:, ::1] a = H
    wr = np.zeros(n, dtype=np.float64)
    wi = np.zeros(n, dtype=np.float64)
    cdef double[::1] wrv = wr
    cdef double[::1] wiv = wi
    cdef long nn, l, m, i, j, k, mmin, its
    cdef long total = 0
    cdef double anorm, t, s, x, y, w, p, q, r, z, u, v
    anorm = 0.0
    for i in range(n):
        for j in range(max(i - 1, 0), n):
            anorm += fabs(a[i, j])
    if anorm == 0.0:
        return wr, wi, 0
    nn = n - 1
    t = 0.0
    p = q = r = 0.0
    cdef double loose
    cdef double hscale = anorm / n
    while nn >= 0:
        its = 0
        while True:
            # defective clusters plateau above the eps-level split test; after
            # repeated sweeps relax the split threshold (relative to the
            # global matrix scale) toward sqrt(eps), the cluster's intrinsic
            # eigenvalue accuracy
            loose = 0.0
            if its >= 25:
                loose = 1.5e-8
            elif its >= 13:
                loose = 4e-11
            l = nn
            while l >= 1:
                s = fabs(a[l - 1, l - 1]) + fabs(a[l, l])
                if s == 0.0:
                    s = anorm
                if fabs(a[l, l - 1]) <= EPS * s or fabs(a[l, l - 1]) <= loose * hscale:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wrv[nn] = x + t
                wiv[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = sqrt(fabs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0 else -z)
                    wrv[nn - 1] = x + z
                    wrv[nn] = wrv[nn - 1]
                    if z != 0.0:
                        wrv[nn] = x - w / z
                    wiv[nn - 1] = 0.0
                    wiv[nn] = 0.0
                else:
                    wrv[nn - 1] = x + p
                    wrv[nn] = x + p
                    wiv[nn - 1] = -z
                    wiv[nn] = z
                nn -= 2
                break
            if total >= sweep_cap or its >= 30:
                return wr, wi, 1
            if its == 10 or its == 20:
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = fabs(a[nn, nn - 1]) + fabs(a[nn - 1, nn - 2])
                y = 0.75 * s
                x = y
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = fabs(p) + fabs(q) + fabs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = fabs(a[m, m - 1]) * (fabs(q) + fabs(r))
                v = fabs(p) * (fabs(a[m - 1, m - 1]) + fabs(z) + fabs(a[m + 1, m + 1]))
                if u <= EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
            for i in range(m + 3, nn + 1):
                a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = fabs(p) + fabs(q) + fabs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = sqrt(p * p + q * q + r * r)
                if p < 0:
                    s = -s
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k != nn - 1:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                mmin = nn if nn < k + 3 else k + 3
                for i in range(l, mmin + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k != nn - 1:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return wr, wi, 0
