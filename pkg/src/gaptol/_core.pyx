# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled kernels: hard-margin SMO, dichotomy enumeration, cyclic Jacobi.

Mirrors gaptol._kernels_py operation-for-operation (same pair selection,
update formulas, and exit conditions); see that module for the contract.
"""

from libc.math cimport sqrt, INFINITY
from libc.stdlib cimport free, malloc

import numpy as np

BACKEND_NAME = "compiled"

cdef double OBJ_DIVERGE = 1e16
cdef double SUM_ALPHA_CAP = 1e18


cdef int _smo(const double* K, const double* y, int n,
              double kkt_tol, long max_iter, double target, bint use_target,
              double* alpha, double* grad,
              double* out_margin, double* out_b, long* out_iters) noexcept nogil:
    cdef double inf_cap, f_obj, sum_alpha, wnorm2, best_margin, best_b
    cdef double si, sj, sc, gap, gpos, gneg, marg, wn2, a, tmax, t, dQa, ai, aj
    cdef double u, dual, ayr
    cdef long it
    cdef int i, j, r, c, status

    for r in range(n):
        alpha[r] = 0.0
        grad[r] = -1.0
    f_obj = 0.0
    sum_alpha = 0.0
    wnorm2 = 0.0
    if use_target and target > 0.0:
        inf_cap = 0.5 / (target * target)
    else:
        inf_cap = INFINITY
    best_margin = -INFINITY
    best_b = 0.0
    it = 0

    while it < max_iter:
        it += 1
        # maximal violating pair: first-max / first-min scan
        i = -1
        j = -1
        si = -INFINITY
        sj = INFINITY
        for r in range(n):
            sc = -(y[r] * grad[r])
            if y[r] > 0 or alpha[r] > 0:          # r in I_up
                if sc > si:
                    si = sc
                    i = r
            if y[r] < 0 or alpha[r] > 0:          # r in I_low
                if sc < sj:
                    sj = sc
                    j = r
        gap = si - sj

        if wnorm2 > 0.0:
            gpos = INFINITY
            gneg = -INFINITY
            for r in range(n):
                u = y[r] * (grad[r] + 1.0)
                if y[r] > 0:
                    if u < gpos:
                        gpos = u
                else:
                    if u > gneg:
                        gneg = u
            marg = (gpos - gneg) / (2.0 * sqrt(wnorm2))
            if marg > best_margin:
                best_margin = marg
                best_b = 0.5 * (gpos + gneg)
            if use_target and marg >= target:
                wn2 = 0.0
                for r in range(n):
                    ayr = alpha[r] * y[r]
                    if ayr != 0.0:
                        for c in range(n):
                            wn2 += ayr * K[r * n + c] * (alpha[c] * y[c])
                if wn2 > 0.0:
                    marg = (gpos - gneg) / (2.0 * sqrt(wn2))
                    if marg >= target:
                        out_margin[0] = marg
                        out_b[0] = 0.5 * (gpos + gneg)
                        out_iters[0] = it
                        return 1
                wnorm2 = wn2

        if gap <= kkt_tol:
            wn2 = 0.0
            for r in range(n):
                ayr = alpha[r] * y[r]
                if ayr != 0.0:
                    for c in range(n):
                        wn2 += ayr * K[r * n + c] * (alpha[c] * y[c])
            gpos = INFINITY
            gneg = -INFINITY
            for r in range(n):
                u = y[r] * (grad[r] + 1.0)
                if y[r] > 0:
                    if u < gpos:
                        gpos = u
                else:
                    if u > gneg:
                        gneg = u
            if wn2 <= 0.0:
                out_margin[0] = best_margin
                out_b[0] = best_b
                out_iters[0] = it
                return 3
            out_margin[0] = (gpos - gneg) / (2.0 * sqrt(wn2))
            out_b[0] = 0.5 * (gpos + gneg)
            out_iters[0] = it
            return 0

        a = K[i * n + i] + K[j * n + j] - 2.0 * K[i * n + j]
        tmax = INFINITY
        if y[i] < 0:
            tmax = alpha[i]
        if y[j] > 0 and alpha[j] < tmax:
            tmax = alpha[j]
        if a > 0.0:
            t = gap / a
            if t > tmax:
                t = tmax
        else:
            t = tmax
            if t == INFINITY:
                t = 2.0 * (sum_alpha + 1.0)

        dQa = y[i] * (grad[i] + 1.0) - y[j] * (grad[j] + 1.0)
        wnorm2 += 2.0 * t * dQa + t * t * a
        f_obj += -gap * t + 0.5 * a * t * t
        sum_alpha += (y[i] - y[j]) * t

        ai = alpha[i] + y[i] * t
        aj = alpha[j] - y[j] * t
        if y[i] < 0 and t >= alpha[i]:
            ai = 0.0
        if y[j] > 0 and t >= alpha[j]:
            aj = 0.0
        alpha[i] = ai
        alpha[j] = aj
        for r in range(n):
            grad[r] += (t * y[r]) * (K[r * n + i] - K[r * n + j])

        dual = -f_obj
        if dual > inf_cap:
            out_margin[0] = best_margin
            out_b[0] = best_b
            out_iters[0] = it
            return 2
        if dual > OBJ_DIVERGE or sum_alpha > SUM_ALPHA_CAP:
            out_margin[0] = best_margin
            out_b[0] = best_b
            out_iters[0] = it
            return 3

    out_margin[0] = best_margin
    out_b[0] = best_b
    out_iters[0] = it
    return 4


def smo_max_margin(K, y, double kkt_tol=1e-6, long max_iter=200_000,
                   double target=0.0, bint use_target=False):
    """See gaptol._kernels_py.smo_max_margin."""
    cdef double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef int n = yv.shape[0]
    cdef bint has_pos = False, has_neg = False
    cdef int r
    for r in range(n):
        if yv[r] > 0:
            has_pos = True
        else:
            has_neg = True
    if not (has_pos and has_neg):
        raise ValueError("smo_max_margin requires both classes")
    alpha_arr = np.zeros(n, dtype=np.float64)
    grad_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] av = alpha_arr
    cdef double[::1] gv = grad_arr
    cdef double margin = 0.0, b = 0.0
    cdef long iters = 0
    cdef int status
    with nogil:
        status = _smo(&Kv[0, 0], &yv[0], n, kkt_tol, max_iter, target,
                      use_target, &av[0], &gv[0], &margin, &b, &iters)
    return status, margin, b, iters, alpha_arr


def count_dichotomies_gram(K, double target, double kkt_tol=1e-6,
                           long max_iter=200_000, bint abort_on_infeasible=False):
    """See gaptol._kernels_py.count_dichotomies_gram."""
    cdef double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef int n = Kv.shape[0]
    cdef long count = 0, exhausted = 0, mask, total
    cdef bint aborted = False, feasible
    cdef int k, status
    cdef double margin = 0.0, b = 0.0
    cdef long iters = 0
    cdef double* y = <double*> malloc(3 * n * sizeof(double))
    if y == NULL:
        raise MemoryError()
    cdef double* alpha = y + n
    cdef double* grad = y + 2 * n
    total = (<long> 1) << (n - 1)
    with nogil:
        for mask in range(total):
            if mask == 0:
                count += 1      # uniform labeling: witnessed by a far plane
                continue
            y[0] = 1.0
            for k in range(1, n):
                if (mask >> (k - 1)) & 1:
                    y[k] = -1.0
                else:
                    y[k] = 1.0
            status = _smo(&Kv[0, 0], y, n, kkt_tol, max_iter, target, True,
                          alpha, grad, &margin, &b, &iters)
            feasible = status == 1 or (status == 0 and margin >= target)
            if status == 4:
                exhausted += 1
            if feasible:
                count += 1
            elif abort_on_infeasible:
                aborted = True
                break
    free(y)
    return 2 * count, aborted, exhausted


def jacobi_eigh(A, double offdiag_tol=1e-12, int max_sweeps=100):
    """See gaptol._kernels_py.jacobi_eigh."""
    A_arr = np.array(A, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] Av = A_arr
    cdef int n = Av.shape[0]
    V_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] Vv = V_arr
    cdef double* scratch = <double*> malloc(6 * n * sizeof(double))
    if scratch == NULL:
        raise MemoryError()
    cdef double* rp = scratch
    cdef double* rq = scratch + n
    cdef double* cp = scratch + 2 * n
    cdef double* cq = scratch + 3 * n
    cdef double* vp = scratch + 4 * n
    cdef double* vq = scratch + 5 * n
    cdef double scale = 0.0, tol_abs, off, apq, app, aqq, tau, t, c, s, acc
    cdef int sweeps = 0, p, q, r

    with nogil:
        acc = 0.0
        for p in range(n):
            for q in range(n):
                acc += Av[p, q] * Av[p, q]
        scale = sqrt(acc)
        if scale < 1.0:
            scale = 1.0
        tol_abs = offdiag_tol * scale

        acc = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    acc += Av[p, q] * Av[p, q]
        off = sqrt(acc if acc > 0.0 else 0.0)

        while off > tol_abs and sweeps < max_sweeps:
            sweeps += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = Av[p, q]
                    if apq == 0.0:
                        continue
                    app = Av[p, p]
                    aqq = Av[q, q]
                    tau = (aqq - app) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    for r in range(n):
                        rp[r] = Av[p, r]
                        rq[r] = Av[q, r]
                    for r in range(n):
                        Av[p, r] = c * rp[r] - s * rq[r]
                        Av[q, r] = s * rp[r] + c * rq[r]
                    for r in range(n):
                        cp[r] = Av[r, p]
                        cq[r] = Av[r, q]
                    for r in range(n):
                        Av[r, p] = c * cp[r] - s * cq[r]
                        Av[r, q] = s * cp[r] + c * cq[r]
                    Av[p, p] = app - t * apq
                    Av[q, q] = aqq + t * apq
                    Av[p, q] = 0.0
                    Av[q, p] = 0.0
                    for r in range(n):
                        vp[r] = Vv[r, p]
                        vq[r] = Vv[r, q]
                    for r in range(n):
                        Vv[r, p] = c * vp[r] - s * vq[r]
                        Vv[r, q] = s * vp[r] + c * vq[r]
            acc = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        acc += Av[p, q] * Av[p, q]
            off = sqrt(acc if acc > 0.0 else 0.0)

    free(scratch)
    return np.diag(A_arr).copy(), V_arr, sweeps, off
