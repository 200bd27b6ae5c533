import numpy as np
import pytest
from hypothesis import given, strategies as st

from symspec.clusters import Cluster, cluster, cluster_mean, completeness
from symspec.presets import RECIPES
from symspec.reproduce import expected


def test_table12_multiplicities():
    lam = expected("table12")["columns"]["dodecahedral-ih"]
    cs = cluster(lam)
    assert cs.multiplicities == [3, 5, 4, 4, 3, 1, 3, 5, 4, 4, 3, 10]
    assert cs.n_c == 12


def test_table18_multiplicities(analysis):
    cs = analysis("icosahedral-ih").clusters
    assert cs.multiplicities == [3, 5, 4, 5, 3, 4, 5, 3, 1]


def test_distinct_values_are_singletons():
    assert cluster([1.0, 2.0, 5.0, 9.0]).multiplicities == [1, 1, 1, 1]


def test_unsorted_and_bad_tol_rejected():
    with pytest.raises(ValueError):
        cluster([2.0, 1.0])
    with pytest.raises(ValueError):
        cluster([1.0], rel_tol=0)


def test_cluster_mean():
    assert cluster_mean(Cluster(0, (120.0, 120.0, 120.0))) == 120.0
    assert cluster_mean(Cluster(5, (892.457,))) == 892.457
    assert cluster_mean(Cluster(0, (1.0, 2.0, 3.0))) == 2.0
    with pytest.raises(ValueError):
        cluster_mean(Cluster(0, ()))


def test_owner():
    cs = cluster([1.0, 1.0, 2.0])
    assert [cs.owner(k) for k in range(3)] == [0, 0, 1]
    with pytest.raises(IndexError):
        cs.owner(3)


def test_completeness_icosahedral(analysis):
    cs = analysis("icosahedral-accidental").clusters
    c15 = completeness(cs, 15)
    assert not c15.complete and c15.cluster == 3 and cs[3].start == 12 and cs[3].stop == 17
    assert "cluster 4" in c15.describe()
    assert completeness(cs, 17).complete
    assert completeness(cs, len(cs.values)).complete
    with pytest.raises(ValueError):
        completeness(cs, 0)


@pytest.mark.parametrize("name,means", [
    ("dodecahedral-ih", [1570.820]),
    ("octahedral-oh", [300.0, 1200.0]),
    ("tetrahedral-td", [225.0]),
    ("tetrahedral-c3v", [225.0]),
    ("tetrahedral-nosym", [225.0]),
])
def test_invariant_flags(analysis, name, means):
    a = analysis(name)
    assert [round(c.mean, 3) for c, f in zip(a.clusters, a.invariant) if f] == means


def test_tolerance_band(analysis):
    """Clusters are identical for tolerances from 1e-10 to 3e-6 on every preset.

    The perturbed C_8v dome keeps two pairs split by ~1e-9 relative, which the
    finer end resolves; the coarse end is bounded by the perturbed C_6v dome,
    whose closest distinct pair is 3.5e-6 apart.
    """
    for name in RECIPES:
        lam = analysis(name).spectrum.eigenvalues
        ref = cluster(lam, 1e-6).multiplicities
        assert cluster(lam, 3e-6).multiplicities == ref, name
        if name != "dome8-c8v-perturbed":
            assert cluster(lam, 1e-10).multiplicities == ref, name


@given(st.lists(st.floats(0.5, 1e4, allow_nan=False), min_size=1, max_size=40))
def test_cluster_properties(values):
    lam = np.sort(np.array(values))
    cs = cluster(lam)
    assert sum(cs.multiplicities) == len(lam)
    assert [k for c in cs for k in c.indices] == list(range(len(lam)))
    total = sum(c.multiplicity * c.mean for c in cs)
    assert total == pytest.approx(float(np.sum(lam)), rel=1e-12)
    assert np.all(np.diff(cs.means) > 0)
    # re-clustering the means gives singletons
    assert max(cluster(cs.means).multiplicities) == 1
