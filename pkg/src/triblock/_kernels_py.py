"""Numpy implementations of the hot kernels.

Same surface as the compiled module (_kernels.pyx); selected by
triblock.backend when the extension is unavailable or when
TRIBLOCK_KERNELS=py is set.  Inner loops are vectorized with numpy where the
algorithm allows; sequential recurrences (triangular solves, factorizations,
QR sweeps) keep a Python loop over rows/columns with vectorized bodies.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

_EPS = float(np.finfo(np.float64).eps)


def csr_matvec(indptr, indices, data, x, nrows):
    prods = data * x[indices]
    cs = np.concatenate(([0.0], np.cumsum(prods)))
    return cs[indptr[1:]] - cs[indptr[:-1]]


def csr_matmul(ap, ai, ax, bp, bi, bx, nrows, ncols):
    """Row-expansion product; output rows sorted, duplicates summed."""
    lens = bp[ai + 1] - bp[ai]
    total = int(lens.sum())
    if total == 0:
        return (np.zeros(nrows + 1, dtype=np.int64),
                np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.float64))
    starts = bp[ai]
    offsets = np.concatenate(([0], np.cumsum(lens)))
    pos = np.arange(total, dtype=np.int64) - np.repeat(offsets[:-1], lens) + np.repeat(starts, lens)
    a_rows = np.repeat(np.arange(nrows, dtype=np.int64), ap[1:] - ap[:-1])
    rows = np.repeat(a_rows, lens)
    cols = bi[pos]
    vals = np.repeat(ax, lens) * bx[pos]
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    key_new = np.empty(total, dtype=bool)
    key_new[0] = True
    key_new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    group = np.flatnonzero(key_new)
    out_vals = np.add.reduceat(vals, group)
    out_rows = rows[group]
    out_cols = cols[group]
    cp = np.zeros(nrows + 1, dtype=np.int64)
    np.add.at(cp, out_rows + 1, 1)
    np.cumsum(cp, out=cp)
    return cp, out_cols, out_vals


def ichol_dt(n, ap, ai, ax, droptol, colnorm):
    """Column incomplete Cholesky with threshold dropping (see compiled twin)."""
    cap = 2 * (len(ax) + n) + 16
    lp = np.zeros(n + 1, dtype=np.int64)
    li = np.empty(cap, dtype=np.int64)
    lx = np.empty(cap, dtype=np.float64)
    head = np.full(n, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    ptr = np.zeros(n, dtype=np.int64)
    w = np.zeros(n, dtype=np.float64)
    wmark = np.full(n, -1, dtype=np.int64)
    pos = 0
    for j in range(n):
        r0, r1 = ap[j], ap[j + 1]
        cols = ai[r0:r1]
        keep = cols >= j
        rows_j = cols[keep]
        w[rows_j] = ax[r0:r1][keep]
        wmark[rows_j] = j
        touched = [rows_j]
        k = head[j]
        while k != -1:
            knext = nxt[k]
            t0 = ptr[k]
            t1 = lp[k + 1]
            ljk = lx[t0]
            seg_rows = li[t0:t1]
            fresh = seg_rows[wmark[seg_rows] != j]
            if fresh.size:
                w[fresh] = 0.0
                wmark[fresh] = j
                touched.append(fresh)
            np.subtract.at(w, seg_rows, ljk * lx[t0:t1])
            if t0 + 1 < t1:
                ptr[k] = t0 + 1
                r = li[t0 + 1]
                nxt[k] = head[r]
                head[r] = k
            k = knext
        if wmark[j] != j or w[j] <= 0.0:
            return lp, li[:pos], lx[:pos], j
        dj = np.sqrt(w[j])
        rows = np.unique(np.concatenate(touched))
        off = rows[rows > j]
        vals = w[off] / dj
        if droptol > 0.0:
            kept = np.abs(vals) >= droptol * colnorm[j]
            off, vals = off[kept], vals[kept]
        cnt = 1 + off.size
        if pos + cnt > cap:
            while cap < pos + cnt:
                cap *= 2
            li = np.concatenate([li, np.empty(cap - li.size, dtype=np.int64)])
            lx = np.concatenate([lx, np.empty(cap - lx.size, dtype=np.float64)])
        li[pos] = j
        lx[pos] = dj
        li[pos + 1:pos + cnt] = off
        lx[pos + 1:pos + cnt] = vals
        pos += cnt
        lp[j + 1] = pos
        if cnt > 1:
            ptr[j] = lp[j] + 1
            r = li[lp[j] + 1]
            nxt[j] = head[r]
            head[r] = j
    return lp, li[:pos].copy(), lx[:pos].copy(), -1


def csc_lower_solve(lp, li, lx, b):
    x = np.array(b, dtype=np.float64, copy=True)
    n = len(lp) - 1
    for j in range(n):
        p0, p1 = lp[j], lp[j + 1]
        xj = x[j] / lx[p0]
        x[j] = xj
        if p1 > p0 + 1:
            x[li[p0 + 1:p1]] -= lx[p0 + 1:p1] * xj
    return x


def csc_lower_solve_t(lp, li, lx, b):
    x = np.array(b, dtype=np.float64, copy=True)
    n = len(lp) - 1
    for j in range(n - 1, -1, -1):
        p0, p1 = lp[j], lp[j + 1]
        acc = x[j]
        if p1 > p0 + 1:
            acc -= lx[p0 + 1:p1] @ x[li[p0 + 1:p1]]
        x[j] = acc / lx[p0]
    return x


def dense_chol(A):
    n = A.shape[0]
    L = np.zeros((n, n), dtype=np.float64)
    for j in range(n):
        acc = A[j, j] - L[j, :j] @ L[j, :j]
        if acc <= 0.0:
            return L, j
        L[j, j] = np.sqrt(acc)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L, -1


def dense_tri_solve(L, B, trans):
    n = L.shape[0]
    X = np.array(B, dtype=np.float64, copy=True)
    if trans == 0:
        for i in range(n):
            X[i] = (X[i] - L[i, :i] @ X[:i]) / L[i, i]
    else:
        for i in range(n - 1, -1, -1):
            X[i] = (X[i] - L[i + 1:, i] @ X[i + 1:]) / L[i, i]
    return X


def jacobi_eigh(Ain, max_sweeps):
    A = np.array(Ain, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    tol = 1e-14 * fro + 1e-300
    used = -1
    for sweep in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= tol:
            used = sweep
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 \
                    else 1.0 / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    if used == -1:
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off > tol:
            return np.diag(A).copy(), V, -1
        used = max_sweeps
    return np.diag(A).copy(), V, used


def hessenberg(Ain):
    H = np.array(Ain, dtype=np.float64, copy=True)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            continue
        alpha = -nrm if x[0] >= 0 else nrm
        v = x.copy()
        v[0] -= alpha
        beta = v @ v
        if beta == 0.0:
            continue
        H[k + 1:, k:] -= np.outer(v, (2.0 / beta) * (v @ H[k + 1:, k:]))
        H[:, k + 1:] -= np.outer((2.0 / beta) * (H[:, k + 1:] @ v), v)
        H[k + 2:, k] = 0.0
    return H


def hqr_eigvals(Hin, sweep_cap):
    """Francis double-shift QR, eigenvalues only (see compiled twin)."""
    a = np.array(Hin, dtype=np.float64, copy=True)
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = np.abs(np.triu(a, -1)).sum()
    if anorm == 0.0:
        return wr, wi, 0
    nn = n - 1
    t = 0.0
    total = 0
    hscale = anorm / n
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
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= _EPS * s or abs(a[l, l - 1]) <= loose * hscale:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0 else -z)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if total >= sweep_cap or its >= 30:
                return wr, wi, 1
            if its in (10, 20):
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                y = x = 0.75 * s
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
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= _EPS * v:
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
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.sqrt(p * p + q * q + r * r)
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
                if k != nn - 1:
                    pj = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1] + r * a[k + 2, k:nn + 1]
                    a[k + 2, k:nn + 1] -= pj * z
                else:
                    pj = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1]
                a[k + 1, k:nn + 1] -= pj * y
                a[k, k:nn + 1] -= pj * x
                mmin = min(nn, k + 3)
                if k != nn - 1:
                    pi = x * a[l:mmin + 1, k] + y * a[l:mmin + 1, k + 1] + z * a[l:mmin + 1, k + 2]
                    a[l:mmin + 1, k + 2] -= pi * r
                else:
                    pi = x * a[l:mmin + 1, k] + y * a[l:mmin + 1, k + 1]
                a[l:mmin + 1, k + 1] -= pi * q
                a[l:mmin + 1, k] -= pi
    return wr, wi, 0
