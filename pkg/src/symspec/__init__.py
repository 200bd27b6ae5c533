"""Eigen-analysis of symmetric 3-D trusses and sensitivity audits of repeated eigenvalues."""

from .model import (AssembledSystem, DesignGroup, DesignPartition, Element, Material, ModelError,
                    Node, TrussModel, assemble, load_model, save_model)
from .eigen import Spectrum, SolverError, nonzero_spectrum, solve, verify
from .clusters import Cluster, ClusterSet, cluster, cluster_mean, completeness
from .symmetry import PointGroup, check_symmetry, detect_accidental, make_group, orbits
from .structures import apply_preset, generate, perturb_apex

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem", "Cluster", "ClusterSet", "DesignGroup", "DesignPartition", "Element",
    "Material", "ModelError", "Node", "PointGroup", "SolverError", "Spectrum", "TrussModel",
    "apply_preset", "assemble", "check_symmetry", "cluster", "cluster_mean", "completeness",
    "detect_accidental", "generate", "load_model", "make_group", "nonzero_spectrum", "orbits",
    "perturb_apex", "save_model", "solve", "verify",
]
