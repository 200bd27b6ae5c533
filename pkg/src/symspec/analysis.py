"""Solve-cluster-flag pipeline shared by the CLI and the reproduction runner."""

from __future__ import annotations

from dataclasses import dataclass

from .clusters import DEFAULT_CLUSTER_TOL, ClusterSet, cluster, detect_invariant_clusters
from .eigen import DEFAULT_ZERO_TOL, Residuals, Spectrum, nonzero_spectrum, solve, verify
from .model import AssembledSystem, TrussModel, assemble


@dataclass(frozen=True)
class Analysis:
    model: TrussModel
    system: AssembledSystem
    full: Spectrum
    spectrum: Spectrum
    clusters: ClusterSet
    invariant: tuple[bool, ...]
    residuals: Residuals

    @property
    def zero_count(self) -> int:
        return self.spectrum.dropped

    def to_dict(self) -> dict:
        return {
            "name": self.model.meta.get("name") if self.model.meta else None,
            "n_free": self.system.n_free,
            "zero_count": self.zero_count,
            "eigenvalues": [float(v) for v in self.spectrum.eigenvalues],
            "clusters": [
                {"index": q + 1, "start": c.start + 1, "multiplicity": c.multiplicity,
                 "mean": c.mean, "invariant": self.invariant[q]}
                for q, c in enumerate(self.clusters)
            ],
            "residuals": {"residual": self.residuals.residual,
                          "orthonormality": self.residuals.orthonormality,
                          "diagonalization": self.residuals.diagonalization},
        }


def analyze(model: TrussModel, zero_tol: float = DEFAULT_ZERO_TOL,
            cluster_tol: float = DEFAULT_CLUSTER_TOL) -> Analysis:
    system = assemble(model)
    full = solve(system, zero_tol)
    kept = nonzero_spectrum(full, zero_tol)
    cs = cluster(kept.eigenvalues, cluster_tol)
    flags = tuple(detect_invariant_clusters(model, kept, cs))
    return Analysis(model, system, full, kept, cs, flags, verify(full, system))
