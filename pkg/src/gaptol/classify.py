"""Maximum-margin training, gap feasibility, and risk evaluation.

The l2 path is exact: a hard-margin SMO solver certifies feasibility with a
primal witness and infeasibility through the diverging dual. For other p the
margin program max min_i y_i(<w,x_i> - b) over the unit dual-norm sphere is
attacked by projected subgradient ascent from several deterministic warm
starts plus random restarts; a found witness proves feasibility, while
"infeasible" only means no witness was found within the budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ._backend import kernels
from .core import (EUCLIDEAN, FEASIBILITY_TOL, FeatureVector, GapClassifier,
                   LabeledDataset, NormSpec, RngStream, lp_norm,
                   signed_margins)
from .errors import DomainError, NumericalError, SeparabilityError

SMO_KKT_TOL = 1e-6
SMO_MAX_ITER = 500_000
SUBGRAD_ITERS = 10_000
SUBGRAD_RESTARTS = 20


@dataclass
class FeasibilityResult:
    """Outcome of a gap-feasibility query.

    ``feasible`` implies ``witness`` is present and every sample satisfies
    label * signed_margin >= delta - 1e-6 under it.
    """

    feasible: bool
    achieved_margin: float
    witness: GapClassifier | None
    iterations: int
    exhausted: bool = False


def as_matrix(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return np.ascontiguousarray(points, dtype=np.float64)
    rows = [p.coords if isinstance(p, FeatureVector) else np.asarray(p, dtype=np.float64)
            for p in points]
    return np.ascontiguousarray(rows, dtype=np.float64)


def _far_plane(X: np.ndarray, label: int, delta: float,
               norm_spec: NormSpec) -> GapClassifier:
    """Witness for a single-class labeling: a plane beyond the data."""
    w = np.zeros(X.shape[1])
    w[0] = 1.0
    proj = X @ w
    if label > 0:
        b = float(proj.min()) - delta - 1.0
    else:
        b = float(proj.max()) + delta + 1.0
    return GapClassifier(w, b, delta, norm_spec)


def _witness_from_alpha(X, y, alpha, b_hat, delta, norm_spec) -> GapClassifier | None:
    w_raw = X.T @ (alpha * y)
    wn = float(np.linalg.norm(w_raw))
    if wn <= 0:
        return None
    return GapClassifier(w_raw / wn, b_hat / wn, delta, norm_spec)


def _hull_intersection_witness(X: np.ndarray, y: np.ndarray):
    """A point common to the two class hulls, or None if the hulls are disjoint.

    LP feasibility over convex coefficients (mu, nu):
    X_pos' mu = X_neg' nu, sum mu = sum nu = 1, mu, nu >= 0.
    """
    Xp = X[y > 0]
    Xn = X[y < 0]
    npos, nneg = Xp.shape[0], Xn.shape[0]
    d = X.shape[1]
    A_eq = np.zeros((d + 2, npos + nneg))
    A_eq[:d, :npos] = Xp.T
    A_eq[:d, npos:] = -Xn.T
    A_eq[d, :npos] = 1.0
    A_eq[d + 1, npos:] = 1.0
    b_eq = np.zeros(d + 2)
    b_eq[d] = 1.0
    b_eq[d + 1] = 1.0
    res = linprog(np.zeros(npos + nneg), A_eq=A_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs")
    if not res.success:
        return None
    mu = res.x[:npos]
    nu = res.x[npos:]
    return Xp.T @ mu, mu, nu


def _subgradient_margin(X, y, q, target, rng_gen, iters=SUBGRAD_ITERS,
                        restarts=SUBGRAD_RESTARTS):
    """Best (margin, w, b) found for the dual-norm-q margin program.

    Warm starts: the sign pattern of the class-mean difference, the mean
    difference itself, the exact l2 direction, then random directions. Stops
    early as soon as some iterate certifies margin >= target.
    """
    pos = y > 0
    neg = ~pos
    Xp, Xn = X[pos], X[neg]

    def objective(w):
        up = Xp @ w
        un = Xn @ w
        return 0.5 * (up.min() - un.max()), up, un

    def normalize(w):
        nrm = lp_norm(w, q)
        return w / nrm if nrm > 0 else None

    inits = []
    diff = Xp.mean(axis=0) - Xn.mean(axis=0)
    s = np.sign(diff)
    for cand in (s, diff):
        w0 = normalize(cand.astype(np.float64).copy())
        if w0 is not None:
            inits.append(w0)
    try:
        K = X @ X.T
        status, _, b_hat, _, alpha = kernels.smo_max_margin(
            K, y.astype(np.float64), kkt_tol=SMO_KKT_TOL,
            max_iter=SMO_MAX_ITER)
        if status == 0:
            w0 = normalize(X.T @ (alpha * y))
            if w0 is not None:
                inits.append(w0)
    except ValueError:
        pass
    while len(inits) < restarts:
        w0 = normalize(rng_gen.standard_normal(X.shape[1]))
        if w0 is not None:
            inits.append(w0)

    scale = max(1.0, float(np.abs(X).max()))
    best = (-math.inf, None, 0.0)
    total_iters = 0
    for w0 in inits:
        w = w0.copy()
        f, up, un = objective(w)
        if f > best[0]:
            best = (f, w.copy(), 0.5 * (up.min() + un.max()))
        if best[0] >= target:
            break
        for t in range(1, iters + 1):
            total_iters += 1
            i = int(np.argmin(up))
            j = int(np.argmax(un))
            g = 0.5 * (Xp[i] - Xn[j])
            step = 0.5 / (scale * math.sqrt(t))
            w_new = normalize(w + step * g)
            if w_new is None:
                break
            w = w_new
            f, up, un = objective(w)
            if f > best[0]:
                best = (f, w.copy(), 0.5 * (up.min() + un.max()))
                if best[0] >= target:
                    break
        if best[0] >= target:
            break
    return best[0], best[1], best[2], total_iters


def gap_feasible(points, labels, delta: float,
                 norm_spec: NormSpec = EUCLIDEAN) -> FeasibilityResult:
    """Can some unit-dual-norm hyperplane put every point on its labeled side
    at distance >= delta? Exact for p = 2; witness-certified otherwise."""
    if delta < 0:
        raise DomainError("margin delta must be >= 0")
    X = as_matrix(points)
    y = np.asarray(labels, dtype=np.float64)
    if X.shape[0] != y.shape[0]:
        raise DomainError("points and labels disagree in length")
    if not np.all(np.abs(y) == 1):
        raise DomainError("labels must be +-1")
    target = delta - FEASIBILITY_TOL

    if np.all(y > 0) or np.all(y < 0):
        clf = _far_plane(X, int(y[0]), delta, norm_spec)
        margins = y * signed_margins(clf, X)
        return FeasibilityResult(True, float(margins.min()), clf, 0)

    if norm_spec.p == 2:
        K = X @ X.T
        status, margin, b_hat, iters, alpha = kernels.smo_max_margin(
            K, y, kkt_tol=SMO_KKT_TOL, max_iter=SMO_MAX_ITER,
            target=target, use_target=True)
        if status == 1 or (status == 0 and margin >= target):
            clf = _witness_from_alpha(X, y, alpha, b_hat, delta, norm_spec)
            return FeasibilityResult(True, float(margin), clf, int(iters))
        achieved = margin if math.isfinite(margin) else -math.inf
        return FeasibilityResult(False, float(achieved), None, int(iters),
                                 exhausted=(status == 4))

    gen = RngStream(0xFEA5, 0).generator()
    best, w, b, iters = _subgradient_margin(X, y, norm_spec.dual, target, gen)
    if w is not None and best >= target:
        clf = GapClassifier(w, b, delta, norm_spec)
        return FeasibilityResult(True, float(best), clf, iters)
    return FeasibilityResult(False, float(best), None, iters)


def max_margin_train(dataset: LabeledDataset) -> tuple[GapClassifier, float]:
    """Train the maximum-margin separator; returns (classifier, margin).

    Exact for p = 2 (hard-margin SMO, stationarity residual <= 1e-6);
    best-found for other p in (1, inf). Raises SeparabilityError with a
    hull-intersection certificate when the data cannot be separated.
    """
    p = dataset.norm_spec.p
    if not (1.0 < p < math.inf):
        raise DomainError(f"training requires p in (1, inf), got {p}")
    X = np.ascontiguousarray(dataset.X)
    y = dataset.y.astype(np.float64)
    if np.all(y > 0) or np.all(y < 0):
        raise DomainError("single-class data has unbounded margin; nothing to train")

    if p == 2:
        K = X @ X.T
        status, margin, b_hat, iters, alpha = kernels.smo_max_margin(
            K, y, kkt_tol=SMO_KKT_TOL, max_iter=SMO_MAX_ITER)
        if status == 3:
            witness = _hull_intersection_witness(X, y)
            raise SeparabilityError(
                "data is not linearly separable", witness=witness)
        if status != 0:
            raise NumericalError(
                f"margin solver exhausted after {iters} iterations "
                f"(best margin {margin:.6g})")
        clf = _witness_from_alpha(X, y, alpha, b_hat, margin, dataset.norm_spec)
        if clf is None:
            raise NumericalError("degenerate solution with zero weight vector")
        check = y * signed_margins(clf, X)
        if check.min() < margin * (1.0 - 1e-4):
            raise NumericalError(
                f"stationarity check failed: witness margin {check.min():.6g} "
                f"vs reported {margin:.6g}")
        return clf, float(margin)

    witness = _hull_intersection_witness(X, y)
    if witness is not None:
        raise SeparabilityError("data is not linearly separable", witness=witness)
    gen = RngStream(0xFEA5, 1).generator()
    best, w, b, _ = _subgradient_margin(
        X, y, dataset.norm_spec.dual, math.inf, gen, iters=20_000)
    if w is None or best <= 0:
        raise NumericalError(
            f"no separating direction found (best margin {best:.6g})")
    clf = GapClassifier(w, b, best, dataset.norm_spec)
    return clf, float(best)


def empirical_risk(c: GapClassifier, dataset: LabeledDataset,
                   gap_tolerant: bool = False) -> float:
    """Misclassification frequency; in gap-tolerant mode, samples strictly
    inside the margin slab are declared correct (still divided by l)."""
    if dataset.dim != c.w.shape[0]:
        raise DomainError("classifier and dataset dimensions differ")
    sm = signed_margins(c, dataset.X)
    wrong = dataset.y * sm < 0
    if gap_tolerant:
        wrong &= np.abs(sm) >= c.delta
    return float(wrong.sum() / len(dataset))


def erm_select(candidates, dataset: LabeledDataset,
               gap_tolerant: bool = False) -> GapClassifier:
    """Empirical risk minimizer; ties break to the lowest candidate index."""
    candidates = list(candidates)
    if not candidates:
        raise DomainError("ERM needs a nonempty candidate set")
    risks = [empirical_risk(c, dataset, gap_tolerant) for c in candidates]
    return candidates[int(np.argmin(risks))]


def classifier_to_json(c: GapClassifier) -> str:
    return json.dumps({"w": [float(v) for v in c.w], "b": float(c.b),
                       "delta": float(c.delta), "p": float(c.norm_spec.p)})


def classifier_from_json(text: str) -> GapClassifier:
    obj = json.loads(text)
    return GapClassifier(np.array(obj["w"], dtype=np.float64), float(obj["b"]),
                         float(obj["delta"]), NormSpec(float(obj["p"])))
