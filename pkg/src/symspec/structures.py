"""Generators for the dome and polyhedral truss families and their design presets.

Dimensions come from ``data/families.json``; every generator also accepts
keyword overrides.  A generated model has one design group per element
(area 100) until a preset assigns the symmetric grouping and values.
"""

from __future__ import annotations

import itertools
import json
from importlib import resources

import numpy as np

from .model import Element, Material, ModelError, Node, TrussModel
from .symmetry import PSI

FAMILIES = ("dome", "tetrahedral", "octahedral", "dodecahedral", "icosahedral")
FREE = (False, False, False)
PINNED = (True, True, True)


def family_config() -> dict:
    with resources.files("symspec").joinpath("data/families.json").open() as fh:
        return json.load(fh)


def _material(cfg: dict) -> Material:
    return Material(float(cfg["material"]["E"]), float(cfg["material"]["rho"]))


def _assemble(family, free_xyz, support_xyz, pairs, material, params, symmetry) -> TrussModel:
    """Nodes 1..n free then supports; ``pairs`` are 1-based node ids in element order."""
    nodes = [Node(i + 1, tuple(map(float, p)), FREE) for i, p in enumerate(free_xyz)]
    off = len(nodes)
    nodes += [Node(off + i + 1, tuple(map(float, p)), PINNED) for i, p in enumerate(support_xyz)]
    elements = [Element(k + 1, (int(a), int(b)), k + 1) for k, (a, b) in enumerate(pairs)]
    groups = [(k + 1, f"x{k + 1}", 100.0) for k in range(len(elements))]
    meta = {"family": family, "params": params, "preset": None,
            "symmetry": {"enforced": {"name": "C_1"}, "candidates": [symmetry]}}
    return TrussModel.build(nodes, elements, material, groups, meta)


def _polyhedron_edges(V: np.ndarray) -> list[tuple[int, int]]:
    d = np.linalg.norm(V[:, None] - V[None], axis=2)
    edge = np.min(d[d > 1e-9])
    return [(i + 1, j + 1) for i in range(len(V)) for j in range(i + 1, len(V))
            if abs(d[i, j] - edge) < 1e-9 * edge]


def _legs(n: int) -> list[tuple[int, int]]:
    return [(i + 1, n + i + 1) for i in range(n)]


# ----------------------------------------------------------------------
# families

def dome(n: int, apex_height=None, ring_radius=None, ring_height=None, support_height=None,
         material: Material | None = None) -> TrussModel:
    """Dome with ``n`` radial subsections.

    Apex on the z axis; ring node ``k`` at angle ``2 pi k / n``; support ``k``
    midway in angle between ring nodes ``k`` and ``k+1`` at the tip of their
    horizontal vector sum, so both legs have the apex-to-ring length.
    Elements: ``n`` apex-ring, ``n`` ring_k-support_k, ``n`` ring_{k+1}-support_k,
    ``n`` ring_k-ring_{k+1}.
    """
    if int(n) != n or n < 3:
        raise ModelError("dome needs an integer n >= 3")
    n = int(n)
    cfg = family_config()
    d = cfg["dome"]
    H = d["apex_height"] if apex_height is None else apex_height
    r = d["ring_radius"] if ring_radius is None else ring_radius
    h = d["ring_height"] if ring_height is None else ring_height
    z0 = d["support_height"] if support_height is None else support_height
    if not (r > 0 and H > h > z0):
        raise ModelError("dome needs ring_radius > 0 and apex above ring above supports")
    ang = 2 * np.pi * np.arange(n) / n
    free = [(0.0, 0.0, H)] + [(r * np.cos(a), r * np.sin(a), h) for a in ang]
    R = 2 * r * np.cos(np.pi / n)
    sup = [(R * np.cos(a + np.pi / n), R * np.sin(a + np.pi / n), z0) for a in ang]
    ring = [2 + k for k in range(n)]
    support = [2 + n + k for k in range(n)]
    pairs = [(1, ring[k]) for k in range(n)]
    pairs += [(ring[k], support[k]) for k in range(n)]
    pairs += [(ring[(k + 1) % n], support[k]) for k in range(n)]
    pairs += [tuple(sorted((ring[k], ring[(k + 1) % n]))) for k in range(n)]
    params = {"n": n, "apex_height": H, "ring_radius": r, "ring_height": h, "support_height": z0}
    sym = {"name": f"C_{n}v", "axis": [0.0, 0.0, 1.0], "mirror": [0.0, 1.0, 0.0]}
    return _assemble("dome", free, sup, pairs, material or _material(cfg), params, sym)


def tetrahedral(circumradius=None, support_factor=None, material=None) -> TrussModel:
    """Regular tetrahedron with radial legs.

    Nodes 1-3 are the base vertices, node 4 the apex on the (1,1,1) axis.
    Elements: base edges 12, 23, 31; apex edges 14, 24, 34; legs of nodes 1-4.
    """
    cfg = family_config()
    R = cfg["tetrahedral"]["circumradius"] if circumradius is None else circumradius
    f = cfg["tetrahedral"]["support_factor"] if support_factor is None else support_factor
    if not (R > 0 and f > 1):
        raise ModelError("tetrahedral needs circumradius > 0 and support_factor > 1")
    cube = np.array([[1, -1, -1], [-1, 1, -1], [-1, -1, 1], [1, 1, 1]], float)
    V = cube / np.sqrt(3.0) * R
    pairs = [(1, 2), (2, 3), (1, 3), (1, 4), (2, 4), (3, 4)] + _legs(4)
    return _assemble("tetrahedral", V, f * V, pairs, material or _material(cfg),
                     {"circumradius": R, "support_factor": f}, {"name": "T_d"})


def octahedral(circumradius=None, support_factor=None, material=None) -> TrussModel:
    """Regular octahedron with radial legs.

    Nodes 1-6: -x, +x, +y, -y, -z, +z.  Edges in lexicographic node-pair
    order, then the six legs.
    """
    cfg = family_config()
    R = cfg["octahedral"]["circumradius"] if circumradius is None else circumradius
    f = cfg["octahedral"]["support_factor"] if support_factor is None else support_factor
    if not (R > 0 and f > 1):
        raise ModelError("octahedral needs circumradius > 0 and support_factor > 1")
    V = R * np.array([[-1, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, -1], [0, 0, 1]], float)
    pairs = _polyhedron_edges(V) + _legs(6)
    return _assemble("octahedral", V, f * V, pairs, material or _material(cfg),
                     {"circumradius": R, "support_factor": f}, {"name": "O_h"})


def dodecahedron_vertices() -> np.ndarray:
    """Cube vertices (+-1,+-1,+-1) then cyclic permutations of (0, +-1/psi, +-psi)."""
    v = [p for p in itertools.product((-1.0, 1.0), repeat=3)]
    for a in (-1.0, 1.0):
        for b in (-1.0, 1.0):
            v += [(0.0, a / PSI, b * PSI), (a / PSI, b * PSI, 0.0), (b * PSI, 0.0, a / PSI)]
    return np.array(v)


def icosahedron_vertices() -> np.ndarray:
    """Cyclic permutations of (0, +-1, +-psi)."""
    v = []
    for a in (-1.0, 1.0):
        for b in (-1.0, 1.0):
            v += [(0.0, a, b * PSI), (a, b * PSI, 0.0), (b * PSI, 0.0, a)]
    return np.array(v)


def dodecahedral(support_factor=None, material=None) -> TrussModel:
    cfg = family_config()
    f = cfg["dodecahedral"]["support_factor"] if support_factor is None else support_factor
    if not f > 1:
        raise ModelError("support_factor must exceed 1")
    V = dodecahedron_vertices()
    pairs = _polyhedron_edges(V) + _legs(20)
    return _assemble("dodecahedral", V, f * V, pairs, material or _material(cfg),
                     {"support_factor": f}, {"name": "I_h", "axis": list(DODECA_AXIS)})


def icosahedral(support_factor=None, material=None) -> TrussModel:
    cfg = family_config()
    f = cfg["icosahedral"]["support_factor"] if support_factor is None else support_factor
    if not f > 1:
        raise ModelError("support_factor must exceed 1")
    V = icosahedron_vertices()
    pairs = _polyhedron_edges(V) + _legs(12)
    return _assemble("icosahedral", V, f * V, pairs, material or _material(cfg),
                     {"support_factor": f}, {"name": "I_h"})


GENERATORS = {
    "dome": dome,
    "tetrahedral": tetrahedral,
    "octahedral": octahedral,
    "dodecahedral": dodecahedral,
    "icosahedral": icosahedral,
}


def generate(family: str, **params) -> TrussModel:
    try:
        gen = GENERATORS[family]
    except KeyError:
        raise ModelError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}") from None
    try:
        return gen(**params)
    except TypeError as exc:
        raise ModelError(f"invalid parameters for {family}: {exc}") from None


# ----------------------------------------------------------------------
# element classification helpers

def _is_support(model: TrussModel, nid: int) -> bool:
    return model.node(nid).is_support


def _legs_of(model: TrussModel) -> list[int]:
    return [e.id for e in model.elements if any(_is_support(model, n) for n in e.nodes)]


def _struts_of(model: TrussModel) -> list[int]:
    return [e.id for e in model.elements if not any(_is_support(model, n) for n in e.nodes)]


def _height(model: TrussModel, nid: int, axis) -> float:
    a = np.asarray(axis, float)
    return float(model.node(nid).xyz @ a / np.linalg.norm(a))


def _family(model: TrussModel) -> str:
    fam = model.meta.get("family") if model.meta else None
    if fam not in FAMILIES:
        raise ModelError("model carries no generator family; presets need a generated model")
    return fam


# ----------------------------------------------------------------------
# presets: (groups as (label, element ids, area), enforced group spec)

def _dome_presets(model: TrussModel):
    n = model.meta["params"]["n"]
    ids = [e.id for e in model.elements]
    nosym = [(f"x{k + 1}", [eid], 100.0 + 10.0 * k) for k, eid in enumerate(ids)]
    cnv = [("x1", ids[:n], 150.0), ("x2", ids[n:3 * n], 200.0), ("x3", ids[3 * n:], 50.0)]
    sym = {"name": f"C_{n}v", "axis": [0.0, 0.0, 1.0], "mirror": [0.0, 1.0, 0.0]}
    return {
        "nosym": (nosym, {"name": "C_1"}),
        f"c{n}v": (cnv, sym),
    }


def _tetra_presets(model: TrussModel):
    legs = _legs_of(model)
    struts = _struts_of(model)
    apex = 4
    base = [e for e in struts if apex not in model.element(e).nodes]
    side = [e for e in struts if apex in model.element(e).nodes]
    values = [100, 100, 100, 150, 150, 150, 200, 150, 175, 225]
    nosym = [(f"x{k + 1}", [e.id], float(v)) for k, (e, v) in enumerate(zip(model.elements, values))]
    return {
        "td": ([("x1", struts, 100.0), ("x2", legs, 200.0)], {"name": "T_d"}),
        "c3v": ([("x1", base, 100.0), ("x2", side, 150.0), ("x3", legs, 200.0)],
                {"name": "C_3v", "axis": [1.0, 1.0, 1.0], "mirror": [1.0, -1.0, 0.0]}),
        "nosym": (nosym, {"name": "C_1"}),
    }


def _octa_presets(model: TrussModel):
    legs = _legs_of(model)
    struts = _struts_of(model)

    def touches(e, nid):
        return nid in model.element(e).nodes

    top = [e for e in struts if touches(e, 6)]
    bottom = [e for e in struts if touches(e, 5)]
    equator = [e for e in struts if e not in top and e not in bottom]
    # equatorial edges joining (+x,+y) and (-x,-y) versus the other diagonal pair
    diag = [e for e in equator if set(model.element(e).nodes) in ({2, 3}, {1, 4})]
    anti = [e for e in equator if e not in diag]
    nosym = [(f"x{k + 1}", [e.id], 100.0 + 10.0 * k) for k, e in enumerate(model.elements)]
    return {
        "oh": ([("x1", struts, 150.0), ("x2", legs, 200.0)], {"name": "O_h"}),
        "c4v": ([("x1", equator, 150.0), ("x2", legs, 300.0), ("x3", top, 225.0),
                 ("x4", bottom, 250.0)],
                {"name": "C_4v", "axis": [0.0, 0.0, 1.0], "mirror": [0.0, 1.0, 0.0]}),
        "c2v": ([("x1", top + bottom, 150.0), ("x2", legs, 200.0), ("x3", diag, 150.0),
                 ("x4", anti, 175.0)],
                {"name": "C_2v", "axis": [0.0, 0.0, 1.0], "mirror": [1.0, 1.0, 0.0]}),
        "nosym": (nosym, {"name": "C_1"}),
    }


DODECA_AXIS = (0.0, PSI, 1.0)


def _dodeca_presets(model: TrussModel):
    legs = _legs_of(model)
    struts = _struts_of(model)
    free = [n.id for n in model.nodes if not n.is_support]
    h = {nid: _height(model, nid, DODECA_AXIS) for nid in free}
    hmax, hmin = max(h.values()), min(h.values())
    top = [e for e in struts if all(abs(h[n] - hmax) < 1e-9 for n in model.element(e).nodes)]
    bottom = [e for e in struts if all(abs(h[n] - hmin) < 1e-9 for n in model.element(e).nodes)]
    side = [e for e in struts if e not in top and e not in bottom]
    c5v = {"name": "C_5v", "axis": list(DODECA_AXIS), "mirror": [1.0, 0.0, 0.0]}

    def split(x3, x4):
        return [("x1", side, 100.0), ("x2", legs, 200.0), ("x3", top, x3), ("x4", bottom, x4)]

    return {
        "ih": ([("x1", struts, 100.0), ("x2", legs, 200.0)], {"name": "I_h", "axis": list(DODECA_AXIS)}),
        "c5v": (split(225.0, 250.0), c5v),
        "accidental": (split(100.0, 100.0), c5v),
    }


ICOSA_EDGE_AREA = 150.0
ICOSA_LEG_AREA = 200.0


def _icosa_presets(model: TrussModel):
    legs = set(_legs_of(model))
    single = [(f"x{k + 1}", [e.id], ICOSA_LEG_AREA if e.id in legs else ICOSA_EDGE_AREA)
              for k, e in enumerate(model.elements)]
    return {
        "ih": ([("x1", _struts_of(model), ICOSA_EDGE_AREA), ("x2", sorted(legs), ICOSA_LEG_AREA)],
               {"name": "I_h"}),
        "accidental": (single, {"name": "C_1"}),
    }


_PRESETS = {
    "dome": _dome_presets,
    "tetrahedral": _tetra_presets,
    "octahedral": _octa_presets,
    "dodecahedral": _dodeca_presets,
    "icosahedral": _icosa_presets,
}


def preset_names(model: TrussModel) -> list[str]:
    return list(_PRESETS[_family(model)](model))


def apply_preset(model: TrussModel, preset: str) -> TrussModel:
    """Assign the design partition and values of a named preset."""
    fam = _family(model)
    table = _PRESETS[fam](model)
    key = preset.lower().replace("_", "")
    if fam == "dome" and key == "cnv":
        key = f"c{model.meta['params']['n']}v"
    if key not in table:
        raise ModelError(f"unknown preset {preset!r} for {fam}; choose from {', '.join(table)}")
    groups, enforced = table[key]
    meta = dict(model.meta)
    sym = dict(meta.get("symmetry", {}))
    sym["enforced"] = enforced
    meta["symmetry"] = sym
    meta["preset"] = key
    spec = [(k + 1, label, members, area) for k, (label, members, area) in enumerate(groups)]
    return model.regrouped(spec, meta=meta)


def perturb_apex(model: TrussModel, delta=None) -> TrussModel:
    """Shift the dome apex by ``delta`` (default from the family config)."""
    if not model.meta or model.meta.get("family") != "dome":
        raise ModelError("apex perturbation applies to dome models only")
    d = family_config()["dome"]["apex_perturbation"] if delta is None else delta
    d = np.asarray(d, dtype=float)
    if d.shape != (3,):
        raise ModelError("perturbation must be a 3-vector")
    apex = 1
    moved = model.with_node_position(apex, model.node(apex).xyz + d)
    meta = dict(moved.meta)
    meta["apex_perturbation"] = d.tolist()
    sym = dict(meta.get("symmetry", {}))
    sym["enforced"] = {"name": "C_1"} if np.any(d) else sym.get("enforced", {"name": "C_1"})
    meta["symmetry"] = sym
    return TrussModel(moved.nodes, moved.elements, moved.material, moved.partition, meta)
