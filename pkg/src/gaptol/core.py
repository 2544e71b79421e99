"""Shared domain types, norm arithmetic, and deterministic RNG plumbing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvariantError

# Centralized tolerances: single source of truth for property tests.
FEASIBILITY_TOL = 1e-6      # margin slack accepted by feasibility predicates
NORM_TOL = 1e-9             # unit-dual-norm tolerance for classifier weights
NORM_ERROR_TOL = 1e-6       # deviation beyond this raises InvariantError
EIGEN_RESIDUAL_TOL = 1e-10  # per-pair |Mv - lambda*v| validation scale
JACOBI_OFFDIAG_TOL = 1e-12  # off-diagonal Frobenius stopping threshold
JACOBI_MAX_SWEEPS = 100


def dual_exponent(p: float) -> float:
    """Hölder conjugate q with 1/p + 1/q = 1 (q=inf at p=1, q=1 at p=inf)."""
    if p < 1:
        raise DomainError(f"norm exponent must satisfy p >= 1, got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm(coords, p: float) -> float:
    """The l_p norm of a coordinate array; max-abs for p = inf."""
    a = np.abs(np.asarray(coords, dtype=np.float64))
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.sqrt((a * a).sum()))
    return float((a**p).sum() ** (1.0 / p))


@dataclass(frozen=True)
class NormSpec:
    """Ambient norm: exponent p plus the Rademacher type data (T = 1 for l_p)."""

    p: float = 2.0
    type_const: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise DomainError(f"norm exponent must satisfy p >= 1, got {self.p}")
        if self.type_const < 1:
            raise DomainError("type constant must be >= 1")

    @property
    def type_p(self) -> float:
        return min(2.0, self.p)

    @property
    def dual(self) -> float:
        return dual_exponent(self.p)


EUCLIDEAN = NormSpec(2.0)


class FeatureVector:
    """Dense real vector with an ambient norm attached."""

    __slots__ = ("coords", "norm_spec")

    def __init__(self, coords, norm_spec: NormSpec = EUCLIDEAN):
        a = np.asarray(coords, dtype=np.float64)
        if a.ndim != 1:
            raise DomainError("feature vectors are one-dimensional")
        if not np.all(np.isfinite(a)):
            raise DomainError("feature vector entries must be finite")
        self.coords = a
        self.norm_spec = norm_spec

    def __len__(self):
        return self.coords.shape[0]

    def __repr__(self):
        return f"FeatureVector({self.coords.tolist()}, p={self.norm_spec.p})"


def norm(v: FeatureVector) -> float:
    """Length of ``v`` in its own ambient norm."""
    return lp_norm(v.coords, v.norm_spec.p)


@dataclass
class GapClassifier:
    """Oriented hyperplane with a margin slab of half-width ``delta``.

    ``w`` has unit dual norm, so the signed margin <w, x> - b is the signed
    l_p distance from x to the hyperplane. A point is outside the margin iff
    |signed margin| >= delta; the slab has total thickness 2*delta.
    """

    w: np.ndarray
    b: float
    delta: float
    norm_spec: NormSpec = EUCLIDEAN

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.delta < 0:
            raise DomainError("margin delta must be nonnegative")
        dev = abs(lp_norm(self.w, self.norm_spec.dual) - 1.0)
        if dev > NORM_ERROR_TOL:
            raise InvariantError(
                f"weight vector must have unit dual norm (q={self.norm_spec.dual}); "
                f"deviation {dev:.3g}"
            )


def signed_margin(c: GapClassifier, x) -> float:
    """Signed distance from ``x`` to the classifier's hyperplane."""
    dev = abs(lp_norm(c.w, c.norm_spec.dual) - 1.0)
    if dev > NORM_ERROR_TOL:
        raise InvariantError(f"unit-dual-norm invariant violated by {dev:.3g}")
    coords = x.coords if isinstance(x, FeatureVector) else np.asarray(x, dtype=np.float64)
    return float(np.dot(c.w, coords) - c.b)


def signed_margins(c: GapClassifier, X: np.ndarray) -> np.ndarray:
    """Vectorized ``signed_margin`` over the rows of ``X``."""
    dev = abs(lp_norm(c.w, c.norm_spec.dual) - 1.0)
    if dev > NORM_ERROR_TOL:
        raise InvariantError(f"unit-dual-norm invariant violated by {dev:.3g}")
    return np.asarray(X, dtype=np.float64) @ c.w - c.b


@dataclass(frozen=True)
class RngStream:
    """Named, platform-stable random stream.

    Equal (seed, stream_id) pairs yield bitwise-identical draw sequences:
    streams are PCG64 generators keyed by ``SeedSequence(seed, spawn_key=
    (stream_id,))``, whose expansion is fixed by the numpy spec.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        """Derived stream for per-trial / per-worker use."""
        if index < 0:
            raise DomainError("child index must be nonnegative")
        return RngStream(self.seed, self.stream_id * 1_000_003 + index + 1)


@dataclass
class LabeledDataset:
    """Sample matrix with +-1 labels, a shared norm, and generator provenance."""

    X: np.ndarray
    y: np.ndarray
    norm_spec: NormSpec = EUCLIDEAN
    seed: int = 0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise DomainError("dataset needs an (l, n) matrix and l labels")
        if not np.all(np.isfinite(self.X)):
            raise DomainError("dataset entries must be finite")
        if not np.all(np.abs(self.y) == 1):
            raise DomainError("labels must be +-1")

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> list[tuple[FeatureVector, int]]:
        return [(FeatureVector(row, self.norm_spec), int(lab))
                for row, lab in zip(self.X, self.y)]


def fmt17(x: float) -> str:
    """17-significant-digit decimal formatting; round-trips float64 exactly."""
    return format(float(x), ".17g")
