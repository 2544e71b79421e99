"""Heavy-tailed feature generators and margin-realizable dataset planting."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import (EUCLIDEAN, FeatureVector, LabeledDataset, NormSpec,
                   RngStream, fmt17, lp_norm)
from .errors import DomainError, MarginInfeasibleError

PROBE_DRAWS = 100_000
MIN_ACCEPT_RATE = 1e-4


@dataclass(frozen=True)
class HeavyTailSpec:
    """Power-law feature model: coordinate i (1-indexed) decays like C*i^-alpha.

    ``magnitude_decay`` bounds coordinate magnitudes by the envelope;
    ``sparse_indicator`` makes coordinate i equal 1 with probability
    min(1, C*i^-alpha) and 0 otherwise. For the magnitude model,
    ``envelope="exact"`` pins |x_i| to the envelope with a random sign (the
    adversarial case), while ``envelope="uniform"`` additionally multiplies
    by an independent Uniform[0,1] factor.
    """

    n: int
    C: float = 1.0
    alpha: float = 2.0
    mode: str = "magnitude_decay"
    envelope: str = "exact"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("dimension n must be >= 1")
        if self.C <= 0:
            raise DomainError("envelope constant C must be > 0")
        if self.alpha <= 1:
            raise DomainError(
                f"tail exponent alpha must be > 1 (got {self.alpha}); the "
                "second-moment bound needs a summable envelope")
        if self.mode not in ("magnitude_decay", "sparse_indicator"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.envelope not in ("exact", "uniform"):
            raise DomainError(f"unknown envelope {self.envelope!r}")

    @property
    def envelope_values(self) -> np.ndarray:
        i = np.arange(1, self.n + 1, dtype=np.float64)
        return self.C * i ** (-self.alpha)


def draw_points(spec: HeavyTailSpec, count: int, rng) -> np.ndarray:
    """Draw ``count`` feature rows; ``rng`` is an RngStream or numpy Generator."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    env = spec.envelope_values
    if spec.mode == "magnitude_decay":
        signs = gen.integers(0, 2, size=(count, spec.n)) * 2.0 - 1.0
        pts = signs * env
        if spec.envelope == "uniform":
            pts *= gen.random(size=(count, spec.n))
        return pts
    probs = np.minimum(1.0, env)
    return (gen.random(size=(count, spec.n)) < probs).astype(np.float64)


def gen_heavy_magnitude(spec: HeavyTailSpec, rng) -> FeatureVector:
    """One draw from the magnitude-decay model."""
    if spec.mode != "magnitude_decay":
        raise DomainError("spec.mode must be magnitude_decay")
    return FeatureVector(draw_points(spec, 1, rng)[0], EUCLIDEAN)


def gen_sparse_indicator(spec: HeavyTailSpec, rng) -> FeatureVector:
    """One draw from the sparse-indicator model."""
    if spec.mode != "sparse_indicator":
        raise DomainError("spec.mode must be sparse_indicator")
    return FeatureVector(draw_points(spec, 1, rng)[0], EUCLIDEAN)


def plant_labeled_dataset(spec: HeavyTailSpec, ell: int, delta: float,
                          rng: RngStream, offset: bool = False,
                          norm_spec: NormSpec = EUCLIDEAN) -> LabeledDataset:
    """Margin-realizable dataset: labels planted by a hidden hyperplane.

    Draws a hidden direction w* of unit dual norm from a symmetric
    distribution (b* = 0 unless ``offset``, then U[-0.5, 0.5]), labels each
    point by the sign of its signed margin, and rejects points closer than
    ``delta`` to the plane. Raises :class:`MarginInfeasibleError` when the
    acceptance rate over a 1e5-draw probe falls below 1e-4.
    """
    if delta < 0:
        raise DomainError("margin delta must be >= 0")
    if ell < 1:
        raise DomainError("sample count ell must be >= 1")
    gen = rng.generator()
    w = gen.standard_normal(spec.n)
    w /= lp_norm(w, norm_spec.dual)
    b = float(gen.uniform(-0.5, 0.5)) if offset else 0.0

    rows = []
    labels = []
    attempts = 0
    accepted = 0
    while accepted < ell:
        batch = draw_points(spec, 4096, gen)
        sm = batch @ w - b
        keep = np.abs(sm) >= delta
        attempts += batch.shape[0]
        for row, s in zip(batch[keep], sm[keep]):
            if accepted == ell:
                break
            rows.append(row)
            labels.append(1 if s >= 0 else -1)
            accepted += 1
        if attempts >= PROBE_DRAWS and accepted / attempts < MIN_ACCEPT_RATE:
            raise MarginInfeasibleError(delta, accepted / attempts, attempts)

    provenance = {
        "generator": asdict(spec),
        "plant_delta": delta,
        "planted_w": [float(v) for v in w],
        "planted_b": b,
        "offset": offset,
        "acceptance_rate": accepted / attempts,
    }
    return LabeledDataset(np.array(rows), np.array(labels), norm_spec,
                          seed=rng.seed, provenance=provenance)


def save_dataset_csv(dataset: LabeledDataset, path) -> None:
    """One row per sample, columns x_1..x_n,label, 17-significant-digit floats."""
    n = dataset.dim
    header = ",".join(f"x_{i}" for i in range(1, n + 1)) + ",label"
    lines = [header]
    for row, lab in zip(dataset.X, dataset.y):
        lines.append(",".join(fmt17(v) for v in row) + f",{int(lab)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset_csv(path, norm_spec: NormSpec = EUCLIDEAN) -> LabeledDataset:
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise DomainError(f"empty dataset file {path}")
    header = text[0].split(",")
    if header[-1] != "label" or any(h != f"x_{i+1}" for i, h in enumerate(header[:-1])):
        raise DomainError(f"malformed dataset header in {path}")
    n = len(header) - 1
    X = np.empty((len(text) - 1, n))
    y = np.empty(len(text) - 1, dtype=np.int64)
    for r, line in enumerate(text[1:]):
        parts = line.split(",")
        if len(parts) != n + 1:
            raise DomainError(f"row {r + 1} of {path} has {len(parts)} fields, expected {n + 1}")
        X[r] = [float(v) for v in parts[:-1]]
        y[r] = int(parts[-1])
    return LabeledDataset(X, y, norm_spec, provenance={"source": str(path)})
