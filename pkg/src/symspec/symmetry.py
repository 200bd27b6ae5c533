"""Point groups, orbits on truss nodes/elements, and symmetry checks."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .model import TrussModel

PSI = (1.0 + 5.0 ** 0.5) / 2.0
MATCH_TOL = 1e-9
GEOM_TOL = 1e-8


class SymmetryError(ValueError):
    """The model is not symmetric under the requested group."""


def rotation(axis, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` about ``axis`` (Rodrigues)."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * K @ K


def reflection(normal) -> np.ndarray:
    """Mirror through the plane with the given normal."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(3) - 2.0 * np.outer(n, n)


def closure(generators, limit: int = 500) -> np.ndarray:
    """All products of ``generators``, matched within ``MATCH_TOL``."""
    elems = [np.eye(3)]
    frontier = [np.eye(3)]
    while frontier:
        new = []
        for g in frontier:
            for s in generators:
                p = s @ g
                stack = np.array(elems)
                if np.min(np.max(np.abs(stack - p), axis=(1, 2))) > MATCH_TOL:
                    elems.append(p)
                    new.append(p)
                    if len(elems) > limit:
                        raise RuntimeError("group closure did not terminate")
        frontier = new
    return np.array(elems)


@dataclass(frozen=True)
class PointGroup:
    """A finite group of orthogonal 3x3 matrices acting about the origin."""

    name: str
    matrices: np.ndarray
    params: dict = field(default_factory=dict, compare=False)

    @property
    def order(self) -> int:
        return len(self.matrices)

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.matrices)

    def contains(self, g: np.ndarray, tol: float = MATCH_TOL) -> bool:
        return bool(np.min(np.max(np.abs(self.matrices - g), axis=(1, 2))) <= tol)

    def is_subgroup_of(self, other: "PointGroup") -> bool:
        return all(other.contains(g) for g in self.matrices)

    def to_dict(self, matrices: bool = False) -> dict:
        out = {"name": self.name, "order": self.order, **self.params}
        if matrices:
            out["matrices"] = self.matrices.round(15).tolist()
        return out


def _normalize(name: str) -> tuple[str, int | None]:
    s = name.replace("_", "").replace(" ", "").lower()
    m = re.fullmatch(r"c(\d+)v", s)
    if m:
        return "C_nv", int(m.group(1))
    if s == "cnv":
        return "C_nv", None
    table = {"td": "T_d", "oh": "O_h", "ih": "I_h", "c1": "C_1"}
    if s not in table:
        raise ValueError(f"unknown point group {name!r}")
    return table[s], None


def _perpendicular(axis: np.ndarray) -> np.ndarray:
    trial = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    v = np.cross(axis, trial)
    return v / np.linalg.norm(v)


def make_group(name: str, n: int | None = None, axis=None, mirror=None) -> PointGroup:
    """Build a named point group by closure from standard generators.

    ``C_Nv``: N-fold rotation about ``axis`` (default z) plus the mirror with
    normal ``mirror`` (default: perpendicular to the axis; must contain it).
    ``T_d`` and ``O_h`` use the cube axes.  ``I_h`` keeps (1,1,1) as a 3-fold
    axis and takes its 5-fold axis from ``axis``, default (0, 1, psi), the frame
    where ``(0, +-1, +-psi)`` are icosahedron vertices; (0, psi, 1) gives the
    frame of the dual dodecahedron built from the same cube.  ``C_1`` is the
    trivial group.
    """
    kind, parsed_n = _normalize(name)
    if kind == "C_nv":
        n = parsed_n if n is None else int(n)
        if n is None or n < 1:
            raise ValueError("C_Nv needs N >= 1")
        ax = np.array([0.0, 0.0, 1.0] if axis is None else axis, dtype=float)
        ax /= np.linalg.norm(ax)
        mn = _perpendicular(ax) if mirror is None else np.asarray(mirror, dtype=float)
        mn = mn / np.linalg.norm(mn)
        if abs(mn @ ax) > 1e-12:
            raise ValueError("mirror plane must contain the rotation axis")
        gens = [rotation(ax, 2 * np.pi / n), reflection(mn)]
        expected = 2 * n
        label = f"C_{n}v"
        params = {"n": n, "axis": ax.tolist(), "mirror": mn.tolist()}
    elif kind == "T_d":
        S4 = rotation([0, 0, 1], np.pi / 2) @ reflection([0, 0, 1])
        gens = [S4, rotation([1, 1, 1], 2 * np.pi / 3), reflection([1, -1, 0])]
        expected, label, params = 24, "T_d", {}
    elif kind == "O_h":
        gens = [rotation([0, 0, 1], np.pi / 2), rotation([1, 0, 0], np.pi / 2), -np.eye(3)]
        expected, label, params = 48, "O_h", {}
    elif kind == "I_h":
        five = np.array([0.0, 1.0, PSI] if axis is None else axis, dtype=float)
        gens = [rotation(five, 2 * np.pi / 5), rotation([1, 1, 1], 2 * np.pi / 3), -np.eye(3)]
        expected, label = 120, "I_h"
        params = {} if axis is None else {"axis": (five / np.linalg.norm(five)).tolist()}
    else:
        gens, expected, label, params = [np.eye(3)], 1, "C_1", {}
    try:
        mats = closure(gens)
    except RuntimeError:
        mats = ()
    if len(mats) != expected:
        raise SymmetryError(f"{label} generators close at order {len(mats) or '>limit'}, "
                            f"expected {expected}")
    return PointGroup(label, mats, params)


def group_from_dict(spec: dict) -> PointGroup:
    return make_group(spec["name"], spec.get("n"), spec.get("axis"), spec.get("mirror"))


# ----------------------------------------------------------------------
# action on a model

def node_permutations(model: TrussModel, group: PointGroup, tol: float = GEOM_TOL):
    """For each group element, the map node id -> image node id.

    Raises :class:`SymmetryError` when an image lands on no node or a support
    maps to a free node.
    """
    ids = [n.id for n in model.nodes]
    pos = np.array([n.position for n in model.nodes])
    fixed = [n.fixed for n in model.nodes]
    perms = []
    for g in group.matrices:
        img = pos @ g.T
        d = np.linalg.norm(img[:, None, :] - pos[None, :, :], axis=2)
        k = np.argmin(d, axis=1)
        if np.any(d[np.arange(len(ids)), k] > tol):
            raise SymmetryError(f"{group.name} maps a node off every node")
        if any(fixed[i] != fixed[j] for i, j in enumerate(k)):
            raise SymmetryError(f"{group.name} maps a support onto a free node")
        perms.append({ids[i]: ids[j] for i, j in enumerate(k)})
    return perms


def element_permutations(model: TrussModel, group: PointGroup, tol: float = GEOM_TOL):
    lookup = {frozenset(e.nodes): e.id for e in model.elements}
    perms = []
    for p in node_permutations(model, group, tol):
        m = {}
        for e in model.elements:
            key = frozenset(p[a] for a in e.nodes)
            if key not in lookup:
                raise SymmetryError(f"{group.name} maps element {e.id} onto no element")
            m[e.id] = lookup[key]
        perms.append(m)
    return perms


def _orbits_of(ids, perms) -> list[tuple[int, ...]]:
    seen, out = set(), []
    for i in ids:
        if i in seen:
            continue
        orb = tuple(sorted({p[i] for p in perms}))
        seen.update(orb)
        out.append(orb)
    return out


@dataclass(frozen=True)
class OrbitPartition:
    group: str
    node_orbits: tuple[tuple[int, ...], ...]
    element_orbits: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {"group": self.group,
                "node_orbits": [list(o) for o in self.node_orbits],
                "element_orbits": [list(o) for o in self.element_orbits]}


def orbits(model: TrussModel, group: PointGroup, tol: float = GEOM_TOL) -> OrbitPartition:
    nperm = node_permutations(model, group, tol)
    eperm = element_permutations(model, group, tol)
    return OrbitPartition(
        group.name,
        tuple(_orbits_of([n.id for n in model.nodes], nperm)),
        tuple(_orbits_of([e.id for e in model.elements], eperm)),
    )


@dataclass(frozen=True)
class SymmetryCheck:
    group: str
    geometric: bool
    design: bool


def check_symmetry(model: TrussModel, group: PointGroup, tol: float = GEOM_TOL,
                   area_rtol: float = 1e-12) -> SymmetryCheck:
    """Geometric symmetry, and design symmetry (images share the same area)."""
    try:
        eperm = element_permutations(model, group, tol)
    except SymmetryError:
        return SymmetryCheck(group.name, False, False)
    area = dict(zip((e.id for e in model.elements), model.element_areas()))
    design = all(
        abs(area[a] - area[b]) <= area_rtol * max(area[a], area[b])
        for p in eperm for a, b in p.items()
    )
    return SymmetryCheck(group.name, True, design)


def candidate_groups(model: TrussModel) -> list[PointGroup]:
    """Groups to try for accidental symmetry: model metadata, else the standard frames."""
    sym = dict(model.meta.get("symmetry", {})) if model.meta else {}
    specs = list(sym.get("candidates", []))
    if "enforced" in sym:
        specs.append(sym["enforced"])
    if not specs:
        specs = [{"name": "I_h"}, {"name": "O_h"}, {"name": "T_d"}]
        specs += [{"name": f"C_{n}v"} for n in range(2, 9)]
    return [group_from_dict(s) for s in specs]


def enforced_group(model: TrussModel) -> PointGroup:
    sym = dict(model.meta.get("symmetry", {})) if model.meta else {}
    return group_from_dict(sym.get("enforced", {"name": "C_1"}))


@dataclass(frozen=True)
class AccidentalReport:
    enforced: str
    detected: str
    enforced_order: int
    detected_order: int

    @property
    def accidental(self) -> bool:
        return self.detected_order > self.enforced_order


def detect_accidental(model: TrussModel, enforced: PointGroup | None = None,
                      candidates: list[PointGroup] | None = None) -> AccidentalReport:
    """Largest candidate group that contains ``enforced`` and has design symmetry."""
    enforced = enforced_group(model) if enforced is None else enforced
    candidates = candidate_groups(model) if candidates is None else candidates
    best = enforced
    for g in sorted(candidates, key=lambda g: -g.order):
        if g.order <= best.order:
            break
        if enforced.is_subgroup_of(g) and check_symmetry(model, g).design:
            best = g
            break
    return AccidentalReport(enforced.name, best.name, enforced.order, best.order)
