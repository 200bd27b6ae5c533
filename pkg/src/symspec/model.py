"""Pin-jointed 3-D truss models and assembly of global stiffness/mass matrices.

All arithmetic uses raw numbers in the working units of the preset library:
lengths in m, areas in mm^2, density in g/cm^3 and Young's modulus in MPa.
No conversion to SI is applied.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


class ModelError(ValueError):
    """Raised for structurally invalid truss models or bad element inputs."""


@dataclass(frozen=True)
class Material:
    youngs_modulus: float
    mass_density: float

    def __post_init__(self):
        if not self.youngs_modulus > 0:
            raise ModelError(f"Young's modulus must be positive, got {self.youngs_modulus}")
        if not self.mass_density > 0:
            raise ModelError(f"mass density must be positive, got {self.mass_density}")


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float, float]
    fixed: tuple[bool, bool, bool] = (False, False, False)

    @property
    def xyz(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)

    @property
    def is_support(self) -> bool:
        return all(self.fixed)


@dataclass(frozen=True)
class Element:
    id: int
    nodes: tuple[int, int]
    group: int


@dataclass(frozen=True)
class DesignGroup:
    """One symmetric design variable: a set of elements sharing an area."""

    id: int
    label: str
    elements: tuple[int, ...]
    area: float


@dataclass(frozen=True)
class DesignPartition:
    groups: tuple[DesignGroup, ...]

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def ids(self) -> list[int]:
        return [g.id for g in self.groups]

    @property
    def areas(self) -> np.ndarray:
        return np.array([g.area for g in self.groups], dtype=float)

    def group(self, gid: int) -> DesignGroup:
        for g in self.groups:
            if g.id == gid:
                return g
        raise KeyError(f"unknown design group {gid}")

    def index(self, gid: int) -> int:
        for k, g in enumerate(self.groups):
            if g.id == gid:
                return k
        raise KeyError(f"unknown design group {gid}")


@dataclass(frozen=True)
class TrussModel:
    nodes: tuple[Node, ...]
    elements: tuple[Element, ...]
    material: Material
    partition: DesignPartition
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "elements", tuple(self.elements))
        self._validate()

    # ------------------------------------------------------------------
    @classmethod
    def build(cls, nodes, elements, material, groups, meta=None) -> "TrussModel":
        """Build a model deriving each group's element set from ``Element.group``.

        ``groups`` is an iterable of ``(id, label, area)`` triples.
        """
        members: dict[int, list[int]] = {}
        for e in elements:
            members.setdefault(e.group, []).append(e.id)
        part = DesignPartition(
            tuple(
                DesignGroup(int(gid), str(label), tuple(sorted(members.get(gid, ()))), float(area))
                for gid, label, area in groups
            )
        )
        return cls(tuple(nodes), tuple(elements), material, part, dict(meta or {}))

    def _validate(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ModelError("node ids must be unique")
        eids = [e.id for e in self.elements]
        if len(set(eids)) != len(eids):
            raise ModelError("element ids must be unique")
        known = set(ids)
        for e in self.elements:
            a, b = e.nodes
            if a == b:
                raise ModelError(f"element {e.id} has coincident endpoint ids")
            if a not in known or b not in known:
                raise ModelError(f"element {e.id} references an unknown node")
        seen: set[int] = set()
        for g in self.partition:
            if not g.area > 0:
                raise ModelError(f"design group {g.id} has non-positive area {g.area}")
            if not g.elements:
                raise ModelError(f"design group {g.id} has no elements")
            overlap = seen.intersection(g.elements)
            if overlap:
                raise ModelError(f"elements {sorted(overlap)} belong to more than one group")
            seen.update(g.elements)
        if seen != set(eids):
            raise ModelError("design groups must cover every element exactly once")
        gids = {g.id for g in self.partition}
        for e in self.elements:
            if e.group not in gids or e.id not in self.partition.group(e.group).elements:
                raise ModelError(f"element {e.id} group field disagrees with the partition")
        if not any(not f for n in self.nodes for f in n.fixed):
            raise ModelError("model has no free degrees of freedom")
        for e in self.elements:
            if self.length(e.id) <= 0.0:
                raise ModelError(f"element {e.id} has zero length")

    # ------------------------------------------------------------------
    def node(self, nid: int) -> Node:
        try:
            return self._node_index()[nid]
        except KeyError:
            raise KeyError(f"unknown node {nid}") from None

    def element(self, eid: int) -> Element:
        for e in self.elements:
            if e.id == eid:
                return e
        raise KeyError(f"unknown element {eid}")

    def _node_index(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    def length(self, eid: int) -> float:
        a, b = self.element(eid).nodes
        return float(np.linalg.norm(self.node(b).xyz - self.node(a).xyz))

    def element_areas(self) -> np.ndarray:
        """Area of every element, in ``self.elements`` order."""
        lookup = {g.id: g.area for g in self.partition}
        return np.array([lookup[e.group] for e in self.elements])

    @property
    def n_free(self) -> int:
        return sum(1 for n in self.nodes for f in n.fixed if not f)

    def dof_map(self) -> dict[tuple[int, int], int]:
        """Map ``(node id, axis)`` to free-dof index; nodes sorted by id, axes 0..2."""
        out = {}
        k = 0
        for n in sorted(self.nodes, key=lambda n: n.id):
            for axis in range(3):
                if not n.fixed[axis]:
                    out[(n.id, axis)] = k
                    k += 1
        return out

    # ------------------------------------------------------------------
    def with_group_areas(self, areas: Mapping[int, float]) -> "TrussModel":
        """Copy of the model with some group areas replaced (keys are group ids)."""
        groups = tuple(
            replace(g, area=float(areas[g.id])) if g.id in areas else g for g in self.partition
        )
        return replace(self, partition=DesignPartition(groups))

    def scaled(self, alpha: float) -> "TrussModel":
        return self.with_group_areas({g.id: alpha * g.area for g in self.partition})

    def with_node_position(self, nid: int, position) -> "TrussModel":
        nodes = tuple(
            replace(n, position=tuple(float(c) for c in position)) if n.id == nid else n
            for n in self.nodes
        )
        if all(n.id != nid for n in nodes):
            raise KeyError(f"unknown node {nid}")
        return replace(self, nodes=nodes)

    def regrouped(self, groups: Iterable[tuple[int, str, Iterable[int], float]], meta=None) -> "TrussModel":
        """Copy with a new design partition given as ``(id, label, element ids, area)``."""
        owner = {}
        spec = []
        for gid, label, members, area in groups:
            members = tuple(sorted(members))
            for eid in members:
                owner[eid] = gid
            spec.append((gid, label, area))
        missing = [e.id for e in self.elements if e.id not in owner]
        if missing:
            raise ModelError(f"elements {missing} are not assigned to a group")
        elements = [replace(e, group=owner[e.id]) for e in self.elements]
        return TrussModel.build(self.nodes, elements, self.material, spec,
                                meta=self.meta if meta is None else meta)


# ----------------------------------------------------------------------
# element-level operations

def element_length(model: TrussModel, eid: int) -> float:
    return model.length(eid)


def _check_positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise ModelError(f"{name} must be positive, got {value}")


def local_stiffness(x: float, E: float, L: float) -> np.ndarray:
    """Axial bar stiffness ``(x E / L) [[1, -1], [-1, 1]]``."""
    _check_positive(x=x, E=E, L=L)
    return x * E / L * np.array([[1.0, -1.0], [-1.0, 1.0]])


def local_mass(x: float, rho: float, L: float) -> np.ndarray:
    """Consistent axial mass ``(rho x L / 6) [[2, 1], [1, 2]]``."""
    _check_positive(x=x, rho=rho, L=L)
    return rho * x * L / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])


def direction(model: TrussModel, eid: int) -> np.ndarray:
    """Unit vector of an element, pointing from the lower to the higher node id."""
    a, b = sorted(model.element(eid).nodes)
    d = model.node(b).xyz - model.node(a).xyz
    L = np.linalg.norm(d)
    if L == 0.0:
        raise ModelError(f"element {eid} has coincident endpoints")
    return d / L


def transformation(model: TrussModel, eid: int) -> np.ndarray:
    """2x6 matrix mapping the global end displacements to axial ones."""
    tau = direction(model, eid)
    T = np.zeros((2, 6))
    T[0, :3] = tau
    T[1, 3:] = tau
    return T


# ----------------------------------------------------------------------
# assembly

@dataclass(frozen=True)
class ElementTopology:
    """Per-element data in a form convenient for vectorised assembly.

    ``dofs[e]`` holds the six free-dof indices of element ``e`` (lower node id
    first); fixed dofs are marked with ``n_free`` so they can index a padded
    zero row.
    """

    dofs: np.ndarray
    tau: np.ndarray
    length: np.ndarray
    areas: np.ndarray
    group_index: np.ndarray
    n_free: int


def topology(model: TrussModel) -> ElementTopology:
    dmap = model.dof_map()
    nf = model.n_free
    gidx = {g.id: k for k, g in enumerate(model.partition)}
    dofs, taus, lengths, groups = [], [], [], []
    for e in model.elements:
        a, b = sorted(e.nodes)
        dofs.append([dmap.get((nid, ax), nf) for nid in (a, b) for ax in range(3)])
        taus.append(direction(model, e.id))
        lengths.append(model.length(e.id))
        groups.append(gidx[e.group])
    return ElementTopology(
        dofs=np.array(dofs, dtype=int),
        tau=np.array(taus),
        length=np.array(lengths),
        areas=model.element_areas(),
        group_index=np.array(groups, dtype=int),
        n_free=nf,
    )


def unit_element_matrices(model: TrussModel, top: ElementTopology | None = None):
    """Global 6x6 stiffness and mass matrices of every element per unit area.

    Both matrices are linear in the area, so these are also dK/dx_e and dM/dx_e.
    """
    top = topology(model) if top is None else top
    E = model.material.youngs_modulus
    rho = model.material.mass_density
    tt = np.einsum("ei,ej->eij", top.tau, top.tau)
    kb = np.array([[1.0, -1.0], [-1.0, 1.0]])
    mb = np.array([[2.0, 1.0], [1.0, 2.0]])
    ke = (E / top.length)[:, None, None, None, None] * np.einsum("ab,eij->eaibj", kb, tt)
    me = (rho * top.length / 6.0)[:, None, None, None, None] * np.einsum("ab,eij->eaibj", mb, tt)
    n = len(top.length)
    return ke.reshape(n, 6, 6), me.reshape(n, 6, 6)


def scatter(top: ElementTopology, mats: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Sum ``weights[e] * mats[e]`` into an ``n_free`` square matrix."""
    nf = top.n_free
    out = np.zeros((nf + 1, nf + 1))
    rows = np.repeat(top.dofs[:, :, None], 6, axis=2)
    cols = np.repeat(top.dofs[:, None, :], 6, axis=1)
    np.add.at(out, (rows, cols), weights[:, None, None] * mats)
    return out[:nf, :nf]


@dataclass(frozen=True)
class AssembledSystem:
    stiffness: np.ndarray
    mass: np.ndarray
    dof_map: Mapping[tuple[int, int], int]

    @property
    def n_free(self) -> int:
        return self.stiffness.shape[0]


def assemble(model: TrussModel) -> AssembledSystem:
    top = topology(model)
    if top.n_free == 0:
        raise ModelError("model has no free degrees of freedom")
    ke, me = unit_element_matrices(model, top)
    K = scatter(top, ke, top.areas)
    M = scatter(top, me, top.areas)
    # exact symmetry; np.add.at accumulates both triangles in the same order
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    K.setflags(write=False)
    M.setflags(write=False)
    return AssembledSystem(K, M, model.dof_map())


# ----------------------------------------------------------------------
# JSON model files

def to_dict(model: TrussModel) -> dict:
    m = model.material
    out = {
        "material": {"E": m.youngs_modulus, "rho": m.mass_density},
        "nodes": [
            {"id": n.id, "xyz": list(n.position), "fixed": list(n.fixed)} for n in model.nodes
        ],
        "elements": [{"id": e.id, "n": list(e.nodes), "group": e.group} for e in model.elements],
        "groups": [{"id": g.id, "label": g.label, "area": g.area} for g in model.partition],
    }
    if model.meta:
        out["meta"] = dict(model.meta)
    return out


def from_dict(data: Mapping) -> TrussModel:
    try:
        mat = Material(float(data["material"]["E"]), float(data["material"]["rho"]))
        nodes = [
            Node(int(n["id"]), tuple(float(c) for c in n["xyz"]),
                 tuple(bool(f) for f in n.get("fixed", (False, False, False))))
            for n in data["nodes"]
        ]
        elements = [Element(int(e["id"]), (int(e["n"][0]), int(e["n"][1])), int(e["group"]))
                    for e in data["elements"]]
        groups = [(int(g["id"]), str(g.get("label", g["id"])), float(g["area"]))
                  for g in data["groups"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelError(f"malformed model description: {exc!r}") from exc
    for n in nodes:
        if len(n.position) != 3 or len(n.fixed) != 3:
            raise ModelError(f"node {n.id} needs 3 coordinates and 3 fixed flags")
    return TrussModel.build(nodes, elements, mat, groups, meta=data.get("meta"))


def load_model(path) -> TrussModel:
    with open(path) as fh:
        return from_dict(json.load(fh))


def save_model(model: TrussModel, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(to_dict(model), fh, indent=1)
        fh.write("\n")
    return path
