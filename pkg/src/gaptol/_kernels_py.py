"""Pure-Python (numpy) kernels: hard-margin SMO, dichotomy enumeration, Jacobi.

This module is the reference implementation; ``gaptol._core`` is a compiled
mirror of the same arithmetic (same pair selection, same update formulas,
same exit conditions), selected at import by :mod:`gaptol._backend`.

SMO solves the hard-margin dual

    max  sum(alpha) - 0.5 * alpha' Q alpha,   Q_ij = y_i y_j K_ij
    s.t. sum(y * alpha) = 0,  alpha >= 0

by maximal-violating-pair ascent. With the primal scaled to functional
margin 1, the geometric margin is 1/||w||, the dual objective increases
towards 0.5*||w*||^2, and divergence certifies non-separability. Status
codes returned by ``smo_max_margin``:

    0  converged (KKT gap <= tol); margin is the optimal geometric margin
    1  feasible: a primal witness certified margin >= target (early exit)
    2  infeasible: dual objective proved the optimal margin < target
    3  diverged: data not linearly separable
    4  iteration budget exhausted
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

OBJ_DIVERGE = 1e16      # dual objective beyond this means margin < ~1e-8
SUM_ALPHA_CAP = 1e18


def smo_max_margin(K, y, kkt_tol=1e-6, max_iter=200_000, target=0.0,
                   use_target=False):
    """Hard-margin SMO on a Gram matrix. Returns (status, margin, b_hat, iters, alpha).

    ``margin`` is a primal-feasible (witness) value except on status 2/3,
    where it is the best witness margin seen before divergence. ``b_hat`` is
    the functional offset balancing the two classes for the current weights.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    pos = y > 0
    neg = ~pos
    if not pos.any() or not neg.any():
        raise ValueError("smo_max_margin requires both classes")

    alpha = np.zeros(n)
    grad = -np.ones(n)           # gradient of f = 0.5 a'Qa - sum(a)
    f_obj = 0.0
    sum_alpha = 0.0
    wnorm2 = 0.0
    inf_cap = 0.5 / (target * target) if (use_target and target > 0) else math.inf
    best_margin = -math.inf
    best_b = 0.0
    it = 0

    while it < max_iter:
        it += 1
        score = -(y * grad)      # equals y_t - <w, x_t>
        up = pos | (neg & (alpha > 0))
        low = neg | (pos & (alpha > 0))
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]

        if wnorm2 > 0.0:
            u = y * (grad + 1.0)
            gpos = u[pos].min()
            gneg = u[neg].max()
            marg = (gpos - gneg) / (2.0 * math.sqrt(wnorm2))
            if marg > best_margin:
                best_margin = marg
                best_b = 0.5 * (gpos + gneg)
            if use_target and marg >= target:
                # re-verify against an exactly recomputed ||w||^2 before
                # certifying (the incremental value drifts slightly)
                ay = alpha * y
                wn2 = float(ay @ K @ ay)
                if wn2 > 0.0:
                    marg = (gpos - gneg) / (2.0 * math.sqrt(wn2))
                    if marg >= target:
                        return 1, marg, 0.5 * (gpos + gneg), it, alpha
                wnorm2 = wn2

        if gap <= kkt_tol:
            ay = alpha * y
            wn2 = float(ay @ K @ ay)
            u = y * (grad + 1.0)
            gpos = u[pos].min()
            gneg = u[neg].max()
            if wn2 <= 0.0:
                return 3, best_margin, best_b, it, alpha
            margin = (gpos - gneg) / (2.0 * math.sqrt(wn2))
            return 0, margin, 0.5 * (gpos + gneg), it, alpha

        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        tmax = math.inf
        if y[i] < 0:
            tmax = alpha[i]
        if y[j] > 0:
            tmax = min(tmax, alpha[j])
        if a > 0.0:
            t = gap / a
            if t > tmax:
                t = tmax
        else:
            t = tmax
            if not math.isfinite(t):
                t = 2.0 * (sum_alpha + 1.0)    # unbounded ascent ray

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
        grad += (t * y) * (K[:, i] - K[:, j])

        dual = -f_obj
        if dual > inf_cap:
            return 2, best_margin, best_b, it, alpha
        if dual > OBJ_DIVERGE or sum_alpha > SUM_ALPHA_CAP:
            return 3, best_margin, best_b, it, alpha

    return 4, best_margin, best_b, it, alpha


def count_dichotomies_gram(K, target, kkt_tol=1e-6, max_iter=200_000,
                           abort_on_infeasible=False):
    """Count labelings (out of 2^l) feasible at geometric margin >= target.

    Enumerates the 2^(l-1) labelings with the first label fixed to +1 and
    doubles the count (label negation maps witnesses to witnesses). Returns
    (count, aborted, exhausted): ``aborted`` is set when
    ``abort_on_infeasible`` stopped the scan early (count is then partial),
    ``exhausted`` counts labelings whose solve hit the iteration budget
    (conservatively treated as infeasible).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    n = K.shape[0]
    count = 0
    exhausted = 0
    y = np.empty(n)
    for mask in range(1 << (n - 1)):
        if mask == 0:
            count += 1          # uniform labeling: witnessed by a far plane
            continue
        y[0] = 1.0
        for k in range(1, n):
            y[k] = -1.0 if (mask >> (k - 1)) & 1 else 1.0
        status, margin, _, _, _ = smo_max_margin(
            K, y, kkt_tol=kkt_tol, max_iter=max_iter,
            target=target, use_target=True)
        feasible = status == 1 or (status == 0 and margin >= target)
        if status == 4:
            exhausted += 1
        if feasible:
            count += 1
        elif abort_on_infeasible:
            return 2 * count, True, exhausted
    return 2 * count, False, exhausted


def jacobi_eigh(A, offdiag_tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps the upper triangle with Givens rotations until the off-diagonal
    Frobenius norm drops below ``offdiag_tol * max(1, ||A||_F)``. Returns
    (eigenvalues_unsorted, V, sweeps, off) with A = V diag(w) V'.
    """
    A = np.array(A, dtype=np.float64, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    scale = max(1.0, math.sqrt(float((A * A).sum())))
    tol_abs = offdiag_tol * scale

    def offdiag():
        return math.sqrt(max(0.0, float((A * A).sum()) -
                             float((np.diag(A) ** 2).sum())))

    off = offdiag()
    sweeps = 0
    while off > tol_abs and sweeps < max_sweeps:
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        off = offdiag()
    return np.diag(A).copy(), V, sweeps, off
