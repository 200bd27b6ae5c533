"""Eigen-clusters: contiguous runs of numerically repeated eigenvalues."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CLUSTER_TOL = 1e-6
DEFAULT_SCALE_FLOOR = 1.0
INVARIANT_TOL = 1e-8


@dataclass(frozen=True)
class Cluster:
    """Eigenvalues ``start .. start + multiplicity - 1`` (0-based, retained spectrum)."""

    start: int
    members: tuple[float, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.members)

    @property
    def stop(self) -> int:
        return self.start + len(self.members)

    @property
    def indices(self) -> range:
        return range(self.start, self.stop)

    @property
    def mean(self) -> float:
        return cluster_mean(self)


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple[Cluster, ...]
    values: tuple[float, ...]
    rel_tol: float = DEFAULT_CLUSTER_TOL

    def __len__(self):
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    def __getitem__(self, q) -> Cluster:
        return self.clusters[q]

    @property
    def n_c(self) -> int:
        return len(self.clusters)

    @property
    def multiplicities(self) -> list[int]:
        return [c.multiplicity for c in self.clusters]

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.clusters])

    def owner(self, k: int) -> int:
        """Index of the cluster holding eigenvalue ``k``."""
        for q, c in enumerate(self.clusters):
            if c.start <= k < c.stop:
                return q
        raise IndexError(f"eigenvalue index {k} out of range")

    def to_dict(self) -> dict:
        return {
            "n_c": self.n_c,
            "rel_tol": self.rel_tol,
            "clusters": [
                {"start": c.start, "multiplicity": c.multiplicity, "mean": c.mean,
                 "members": list(c.members)}
                for c in self.clusters
            ],
        }


def cluster(eigenvalues, rel_tol: float = DEFAULT_CLUSTER_TOL,
            scale_floor: float = DEFAULT_SCALE_FLOOR) -> ClusterSet:
    """Greedy left-to-right grouping of an ascending list.

    ``lam[k+1]`` joins the current cluster iff
    ``lam[k+1] - lam[k] <= rel_tol * max(|lam[k+1]|, scale_floor)``.
    """
    lam = [float(v) for v in np.asarray(eigenvalues, dtype=float).ravel()]
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    if any(b < a for a, b in zip(lam, lam[1:])):
        raise ValueError("eigenvalues must be sorted ascending")
    out: list[Cluster] = []
    start = 0
    for k in range(1, len(lam) + 1):
        if k < len(lam) and lam[k] - lam[k - 1] <= rel_tol * max(abs(lam[k]), scale_floor):
            continue
        out.append(Cluster(start, tuple(lam[start:k])))
        start = k
    return ClusterSet(tuple(out), tuple(lam), rel_tol)


def cluster_mean(c: Cluster) -> float:
    if not c.members:
        raise ValueError("empty cluster")
    return float(np.mean(c.members))


@dataclass(frozen=True)
class Completeness:
    n: int
    complete: bool
    cluster: int | None = None      # 0-based cluster cut by the truncation
    position: int | None = None     # how many of its members fall inside the truncation

    def describe(self) -> str:
        if self.complete:
            return f"first {self.n} eigenvalues: complete"
        return (f"first {self.n} eigenvalues: cuts cluster {self.cluster + 1} "
                f"after {self.position} member(s)")


def completeness(clusters: ClusterSet, n: int) -> Completeness:
    """Does truncating after the first ``n`` eigenvalues split a cluster?"""
    total = len(clusters.values)
    if not 1 <= n <= total:
        raise ValueError(f"truncation count {n} outside 1..{total}")
    for q, c in enumerate(clusters):
        if c.start < n < c.stop:
            return Completeness(n, False, q, n - c.start)
    return Completeness(n, True)


def detect_invariant_clusters(model, spec, clusters: ClusterSet,
                              tol: float = INVARIANT_TOL) -> list[bool]:
    """Flag clusters whose mean has zero sensitivity to every design group.

    ``spec`` is the retained (non-zero) spectrum the clusters were built on.
    A cluster is invariant when ``max_g |dmean/dx_g| <= tol * max(|mean|, 1)``.
    """
    from .sensitivity import MatrixDerivatives, cluster_mean_gradients

    der = MatrixDerivatives.from_model(model)
    grads = cluster_mean_gradients(spec, der, clusters)
    return [
        bool(np.max(np.abs(grads[q])) <= tol * max(abs(c.mean), 1.0))
        for q, c in enumerate(clusters)
    ]
