"""Diffusion-map embeddings via eigendecomposition of the normalized adjacency.

Uses the symmetric operator D^-1/2 A D^-1/2: its spectrum equals the random
walk's, its eigenvectors are the unit-Euclidean-norm eigenfunctions, and it
keeps the eigensolver on symmetric ground.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import kernels
from .core import (EIGEN_RESIDUAL_TOL, EUCLIDEAN, FeatureVector,
                   JACOBI_MAX_SWEEPS, JACOBI_OFFDIAG_TOL, NormSpec, RngStream,
                   fmt17)
from .errors import DegreeError, DomainError, InvariantError, NumericalError

SPECTRUM_SLACK = 1e-8


@dataclass
class Graph:
    """Undirected graph: 0-indexed edge list with optional nonnegative weights.

    No self-loops; every vertex needs degree >= 1. Duplicate edges sum.
    """

    n: int
    edges: list
    weights: list | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("graph needs at least one vertex")
        self.edges = [(int(u), int(v)) for u, v in self.edges]
        if self.weights is not None:
            self.weights = [float(w) for w in self.weights]
            if len(self.weights) != len(self.edges):
                raise DomainError("weights must match edges one-to-one")
            if any(w < 0 for w in self.weights):
                raise DomainError("edge weights must be nonnegative")
        degree = np.zeros(self.n)
        for k, (u, v) in enumerate(self.edges):
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DomainError(f"edge ({u}, {v}) out of range for n={self.n}")
            w = self.weights[k] if self.weights is not None else 1.0
            degree[u] += w
            degree[v] += w
        if np.any(degree == 0):
            isolated = int(np.argmin(degree))
            raise DegreeError(f"vertex {isolated} has zero degree")

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for k, (u, v) in enumerate(self.edges):
            w = self.weights[k] if self.weights is not None else 1.0
            A[u, v] += w
            A[v, u] += w
        return A


def normalized_operator(g: Graph) -> np.ndarray:
    """M = D^-1/2 A D^-1/2; symmetric, spectrum in [-1, 1]."""
    A = g.adjacency()
    deg = A.sum(axis=1)
    if np.any(deg <= 0):
        raise DegreeError(f"vertex {int(np.argmin(deg))} has zero weighted degree")
    dinv = 1.0 / np.sqrt(deg)
    M = A * dinv[:, None] * dinv[None, :]
    return 0.5 * (M + M.T)        # exact symmetry regardless of rounding


def eigendecompose(M: np.ndarray, symmetry_tol: float = 1e-12):
    """Eigenvalues (descending) and orthonormal eigenvectors of symmetric M.

    Cyclic Jacobi, off-diagonal Frobenius threshold 1e-12, 100-sweep cap.
    Eigenvector signs are canonicalized (largest-magnitude entry positive)
    so exports are deterministic.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("eigendecompose needs a square matrix")
    if M.shape[0] == 0:
        raise DomainError("empty matrix")
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > symmetry_tol:
        raise DomainError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    vals, vecs, sweeps, off = kernels.jacobi_eigh(
        M, offdiag_tol=JACOBI_OFFDIAG_TOL, max_sweeps=JACOBI_MAX_SWEEPS)
    scale = max(1.0, float(np.linalg.norm(M)))
    if off > JACOBI_OFFDIAG_TOL * scale:
        raise NumericalError(
            f"Jacobi did not converge in {sweeps} sweeps; off-diagonal "
            f"residual {off:.3g}")
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for j in range(vecs.shape[1]):
        k = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[k, j] < 0:
            vecs[:, j] = -vecs[:, j]
    residual = float(np.max(np.abs(M @ vecs - vecs * vals)))
    if residual > max(EIGEN_RESIDUAL_TOL, 1e-8) * M.shape[0] * scale:
        raise NumericalError(f"eigenpair residual {residual:.3g} too large")
    return vals, vecs


@dataclass
class SpectralEmbedding:
    """Per-vertex diffusion coordinates phi_j(v) = lambda_j^k f_j(v)."""

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    k: int
    dropped_top: bool = False
    norm_spec: NormSpec = EUCLIDEAN

    @property
    def n(self) -> int:
        return self.eigenfunctions.shape[0]

    def feature_matrix(self) -> np.ndarray:
        """Row v holds the feature vector of vertex v."""
        return self.eigenfunctions * self.eigenvalues**self.k

    def feature(self, v: int) -> FeatureVector:
        return FeatureVector(self.feature_matrix()[v], self.norm_spec)


def diffusion_map(g: Graph, k: int, drop_top: bool = False) -> SpectralEmbedding:
    """Embed vertices by eigenvalue-powered eigenfunction coordinates.

    k = 0 gives Laplacian-Eigenmaps coordinates. ``drop_top`` removes the
    trivial top eigenfunction (the one at eigenvalue 1).
    """
    if k < 0:
        raise DomainError("diffusion exponent k must be >= 0")
    M = normalized_operator(g)
    vals, vecs = eigendecompose(M)
    if np.any(vals > 1.0 + SPECTRUM_SLACK) or np.any(vals < -1.0 - SPECTRUM_SLACK):
        raise InvariantError(f"spectrum escapes [-1, 1]: {vals}")
    if drop_top:
        vals = vals[1:]
        vecs = vecs[:, 1:]
    return SpectralEmbedding(vals, vecs, k)


def mean_squared_norm(e: SpectralEmbedding) -> float:
    """(1/n) sum_v ||phi(v)||_2^2; equals sum_j lambda_j^(2k) / n and is <= 1."""
    phi = e.feature_matrix()
    return float((phi * phi).sum() / e.n)


def eigenvalue_moment(e: SpectralEmbedding) -> float:
    """The spectral form sum_j lambda_j^(2k) / n of the mean squared norm."""
    return float((e.eigenvalues ** (2 * e.k)).sum() / e.n)


def gnp_graph(n: int, p: float, rng: RngStream) -> Graph:
    """Seeded Erdos-Renyi graph; isolated vertices get one random edge
    attached so the degree invariant holds."""
    if not (0.0 <= p <= 1.0):
        raise DomainError("edge probability must lie in [0, 1]")
    if n < 2:
        raise DomainError("need at least two vertices")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    iu, ju = np.triu_indices(n, k=1)
    mask = gen.random(iu.shape[0]) < p
    edges = list(zip(iu[mask].tolist(), ju[mask].tolist()))
    degree = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    for v in range(n):
        if degree[v] == 0:
            other = int(gen.integers(0, n - 1))
            if other >= v:
                other += 1
            edges.append((min(v, other), max(v, other)))
            degree[v] += 1
            degree[other] += 1
    return Graph(n, edges)


def parse_graph(text: str) -> Graph:
    """Edge list: one "u v [weight]" per line, '#' comments, optional
    leading "n <count>" header; otherwise n = max index + 1."""
    n_declared = None
    edges = []
    weights = []
    saw_weight = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n" and n_declared is None and not edges:
            if len(parts) != 2:
                raise DomainError(f"line {lineno}: malformed header {raw!r}")
            n_declared = int(parts[1])
            continue
        if len(parts) not in (2, 3):
            raise DomainError(f"line {lineno}: expected 'u v [weight]', got {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
        if len(parts) == 3:
            saw_weight = True
            weights.append(float(parts[2]))
        else:
            weights.append(1.0)
    if not edges:
        raise DomainError("graph file declares no edges")
    n = n_declared if n_declared is not None else max(max(u, v) for u, v in edges) + 1
    return Graph(n, edges, weights if saw_weight else None)


def load_graph(path) -> Graph:
    return parse_graph(Path(path).read_text())


def save_embedding_csv(e: SpectralEmbedding, path) -> None:
    """Columns vertex,phi_1..phi_m with 17-significant-digit floats."""
    phi = e.feature_matrix()
    m = phi.shape[1]
    header = "vertex," + ",".join(f"phi_{j}" for j in range(1, m + 1))
    lines = [header]
    for v in range(e.n):
        lines.append(str(v) + "," + ",".join(fmt17(x) for x in phi[v]))
    Path(path).write_text("\n".join(lines) + "\n")
