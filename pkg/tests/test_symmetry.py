import numpy as np
import pytest

from symspec.structures import PSI, DODECA_AXIS
from symspec.symmetry import (SymmetryError, candidate_groups, check_symmetry, closure,
                              detect_accidental, enforced_group, group_from_dict, make_group,
                              node_permutations, orbits, reflection, rotation)


@pytest.mark.parametrize("name,order", [("C_1", 1), ("C_2v", 4), ("C_3v", 6), ("C_8v", 16),
                                        ("T_d", 24), ("O_h", 48), ("I_h", 120)])
def test_orders_and_orthogonality(name, order):
    g = make_group(name)
    assert g.order == order
    for m in g:
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
        assert abs(abs(np.linalg.det(m)) - 1) < 1e-12


def test_name_forms():
    assert make_group("c5v").order == make_group("C_5v").order == make_group("Cnv", n=5).order
    assert make_group("Td").name == "T_d"
    with pytest.raises(ValueError):
        make_group("D_3h")
    with pytest.raises(ValueError):
        make_group("C_nv")


def test_cnv_mirror_must_contain_axis():
    with pytest.raises(ValueError):
        make_group("C_4v", axis=[0, 0, 1], mirror=[0, 0, 1])


def test_bad_ih_axis_rejected():
    with pytest.raises(SymmetryError):
        make_group("I_h", axis=[0.3, 0.2, 1.0])


def test_subgroups():
    ih = make_group("I_h", axis=DODECA_AXIS)
    c5 = make_group("C_5v", axis=DODECA_AXIS, mirror=[1, 0, 0])
    assert c5.is_subgroup_of(ih) and not ih.is_subgroup_of(c5)
    assert make_group("C_3v", axis=[1, 1, 1], mirror=[1, -1, 0]).is_subgroup_of(make_group("T_d"))
    assert make_group("C_4v", mirror=[0, 1, 0]).is_subgroup_of(make_group("O_h"))


def test_closure_of_generators():
    g = closure([rotation([0, 0, 1], np.pi / 2), reflection([1, 0, 0])])
    assert len(g) == 8


def test_group_from_dict_round_trip():
    g = make_group("C_6v", axis=[0, 0, 1], mirror=[0, 1, 0])
    d = g.to_dict()
    assert group_from_dict(d).is_subgroup_of(g) and d["order"] == 12


@pytest.mark.parametrize("name,node_sizes,elem_sizes", [
    ("dodecahedral-ih", [20, 20], [30, 20]),
    ("icosahedral-ih", [12, 12], [30, 12]),
    ("octahedral-oh", [6, 6], [12, 6]),
    ("tetrahedral-td", [4, 4], [6, 4]),
])
def test_full_group_orbits(preset, name, node_sizes, elem_sizes):
    m = preset(name)
    part = orbits(m, enforced_group(m))
    assert sorted(len(o) for o in part.node_orbits) == sorted(node_sizes)
    assert sorted(len(o) for o in part.element_orbits) == sorted(elem_sizes)


def test_dodecahedral_c5v_orbits_match_design_groups(preset):
    m = preset("dodecahedral-c5v")
    part = orbits(m, enforced_group(m))
    groups = sorted(len(g.elements) for g in m.partition)
    assert groups == [5, 5, 20, 20]
    # design groups are unions of element orbits
    owner = {e.id: e.group for e in m.elements}
    for o in part.element_orbits:
        assert len({owner[e] for e in o}) == 1


def test_permutations_are_bijections(preset):
    m = preset("icosahedral-ih")
    for p in node_permutations(m, make_group("I_h")):
        assert sorted(p.values()) == sorted(p.keys())


def test_geometry_mismatch_raises(preset):
    m = preset("dome5-c5v")
    with pytest.raises(SymmetryError):
        orbits(m, make_group("C_4v"))
    assert not check_symmetry(m, make_group("C_4v")).geometric


@pytest.mark.parametrize("name,enforced,detected", [
    ("dodecahedral-accidental", "C_5v", "I_h"),
    ("dodecahedral-c5v", "C_5v", "C_5v"),
    ("dodecahedral-ih", "I_h", "I_h"),
    ("icosahedral-accidental", "C_1", "I_h"),
    ("octahedral-c2v", "C_2v", "C_2v"),
    ("tetrahedral-nosym", "C_1", "C_1"),
    ("dome8-c8v-perturbed", "C_1", "C_1"),
])
def test_accidental_detection(preset, name, enforced, detected):
    r = detect_accidental(preset(name))
    assert (r.enforced, r.detected) == (enforced, detected)
    assert r.accidental == (enforced != detected)


def test_enforced_group_is_a_symmetry_of_every_preset(preset):
    from symspec.presets import RECIPES
    for name in RECIPES:
        m = preset(name)
        chk = check_symmetry(m, enforced_group(m))
        assert chk.geometric and chk.design, name
        assert all(check_symmetry(m, g).geometric for g in candidate_groups(m)
                   if not name.endswith("perturbed")), name


def test_icosahedral_frame():
    ih = make_group("I_h")
    v = np.array([0.0, 1.0, PSI])
    assert any(np.allclose(m @ v, [1.0, PSI, 0.0]) for m in ih)
