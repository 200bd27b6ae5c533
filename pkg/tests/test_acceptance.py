"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.optimize as opt

sys.path.insert(0, str(Path(__file__).parent))
from conftest import cached_analysis, cached_preset, small_truss  # noqa: E402

from symspec.clusters import cluster  # noqa: E402
from symspec.eigen import nonzero_spectrum, solve  # noqa: E402
from symspec.model import assemble  # noqa: E402
from symspec.presets import RECIPES  # noqa: E402
from symspec.reproduce import expected, reproduce  # noqa: E402
from symspec.sensitivity import (KS, ClusterMeans, DemoPolynomial, Eigenvalues,  # noqa: E402
                                 MatrixDerivatives, PNorm, audit, cdm_sensitivity,
                                 cluster_mean_gradients, eig_sensitivities,
                                 sine_product_function)
from symspec.symmetry import make_group  # noqa: E402

# finest clustering tolerance that still groups every exact repeat in the presets
SPLIT_TOL = 1e-10


def c01():
    a = cached_analysis("dodecahedral-ih")
    want = np.array(expected("table12")["columns"]["dodecahedral-ih"])
    lam = a.spectrum.eigenvalues
    top = a.clusters[-1]
    ok = (len(lam) == 49 and a.zero_count == 11 and np.max(np.abs(lam - want)) <= 1e-3
          and top.multiplicity == 10 and abs(top.mean - 1570.820) <= 1e-3)
    return ok, f"49 retained, {a.zero_count} dropped, max |diff| {np.max(np.abs(lam - want)):.1e}"


def c02():
    r = reproduce("table13")
    rows = sum(1 for c in r.checks if c.name.endswith("analytical = CDM"))
    return r.passed and rows == 10, f"{rows} rows, {len(r.checks)} checks"


def c03():
    acc, ih = cached_analysis("dodecahedral-accidental"), cached_analysis("dodecahedral-ih")
    spec_ok = np.max(np.abs(acc.spectrum.eigenvalues - ih.spectrum.eigenvalues)) <= 1e-3
    idx = [k for q, c in enumerate(acc.clusters)
           if c.multiplicity > 1 and not acc.invariant[q] for k in c.indices]
    rep = audit(acc.model, [Eigenvalues(idx)])
    flagged = all(not v.differentiable for v in rep.verdicts)
    v1 = rep.verdicts[0]
    x1 = v1.rows[0]
    x2 = v1.rows[1]
    ok = (spec_ok and flagged and abs(x1.cdm - (-0.170032)) <= 5e-7 and not x1.matches
          and abs(x2.cdm - 0.064458) <= 5e-7 and abs(x2.analytical - 0.064458) <= 5e-7
          and x2.matches)
    return ok, (f"{len(idx)} repeated non-invariant eigenvalues all flagged={flagged}; "
                f"dlam1/dx1 CDM {x1.cdm:.6f} vs analytical {x1.analytical:.6f}; "
                f"x2 {x2.cdm:.6f}/{x2.analytical:.6f}")


def c04():
    r = reproduce("table17")
    a = cached_analysis("dodecahedral-accidental")
    rep = audit(a.model, [ClusterMeans(a.clusters)])
    inv = float(np.max(np.abs(np.concatenate([rep.analytical()[11], rep.cdm()[11]]))))
    all_match = all(v.differentiable for v in rep.verdicts)
    return (r.passed and inv <= 1e-6 and all_match and len(rep.verdicts) == 12,
            f"12 rows reproduced={r.passed}; |dmean_12/dx| <= {inv:.1e}")


def c05():
    grads = []
    for name in ("dodecahedral-accidental", "dodecahedral-ih"):
        a = cached_analysis(name)
        grads.append(cluster_mean_gradients(a.spectrum, MatrixDerivatives.from_model(a.model),
                                            a.clusters))
    acc, ih = grads
    summed = acc[:, 0] + acc[:, 2] + acc[:, 3]
    err = np.abs(summed - ih[:, 0]) / np.maximum(np.abs(ih[:, 0]), 1e-300)
    # the invariant cluster has both sides at round-off level
    err[np.abs(ih[:, 0]) < 1e-10] = 0.0
    return len(ih) == 12 and float(err.max()) <= 1e-6, f"max rel diff {err.max():.1e}"


def c06():
    m = cached_preset("icosahedral-accidental")
    rep = audit(m, [PNorm(15, 10), KS(15, 10), PNorm(17, 10), KS(17, 10)])
    p15, k15, p17, k17 = rep.verdicts
    ok = (not p15.differentiable and not k15.differentiable and p17.differentiable
          and k17.differentiable and len(p17.rows) == 42)
    return ok, (f"n=15 mismatches p/ks {len(p15.offending)}/{len(k15.offending)}; "
                f"n=17 mismatches {len(p17.offending)}/{len(k17.offending)} of 42")


def c07():
    a = cached_analysis("icosahedral-accidental")
    rep = audit(a.model, [sine_product_function(a.clusters, (0, 3, 4))])
    v = rep.verdicts[0]
    return v.differentiable and len(v.rows) == 42, f"{len(v.offending)}/42 mismatches"


def c08():
    rep = audit(cached_preset("dodecahedral-accidental"), [DemoPolynomial("g"), DemoPolynomial("h")])
    g, h = rep.verdicts
    return g.differentiable and not h.differentiable, \
        f"g mismatches {len(g.offending)}, h mismatches {len(h.offending)}"


def c09():
    want = {f"C_{n}v": 2 * n for n in range(3, 9)}
    want.update({"T_d": 24, "O_h": 48, "I_h": 120})
    got = {k: make_group(k).order for k in want}
    return got == want, ", ".join(f"|{k}|={v}" for k, v in got.items())


def _invariant_means(name):
    a = cached_analysis(name)
    return [round(c.mean, 3) for c, f in zip(a.clusters, a.invariant) if f]


def c10():
    ids = ["table01", "table02", "table03", "table04", "table05", "table06", "table07",
           "table08", "table09", "table10", "table11", "invariants"]
    failed = [t for t in ids if not reproduce(t).passed]
    lam = cached_analysis("octahedral-c2v").spectrum.eigenvalues
    split = np.allclose(lam[3:6], [284.330, 300.000, 317.695], atol=1e-3)
    inv_tet = all(_invariant_means(n) == [225.0]
                  for n in ("tetrahedral-td", "tetrahedral-c3v", "tetrahedral-nosym"))
    oct_1200 = []
    for n in ("octahedral-oh", "octahedral-c4v", "octahedral-c2v", "octahedral-nosym"):
        a = cached_analysis(n)
        oct_1200.append(any(f and c.multiplicity == 3 and abs(c.mean - 1200.0) < 1e-6
                            for c, f in zip(a.clusters, a.invariant)))
    dome_120 = all(120.0 in _invariant_means(n) for n in ("dome6-nosym", "dome6-c6v", "dome8-c8v"))
    # distinct beyond round-off: exact repeats elsewhere spread < 1e-13 relative, while the
    # apex shift splits the C_8v pairs at 62.762 and 346.409 by only ~4e-9 and ~1e-9
    # relative, below the default clustering tolerance
    perturbed = ("dome6-nosym-perturbed", "dome8-nosym-perturbed",
                 "dome6-c6v-perturbed", "dome8-c8v-perturbed")
    simple = all(max(cluster(cached_analysis(n).spectrum.eigenvalues, SPLIT_TOL).multiplicities) == 1
                 for n in perturbed)
    merged = [n for n in perturbed if max(cached_analysis(n).clusters.multiplicities) > 1]
    ok = not failed and split and inv_tet and all(oct_1200) and dome_120 and simple
    return ok, (f"tables failed {failed or 'none'}; C_2v split {split}; tetra 225 invariant "
                f"{inv_tet}; octa 1200x3 {oct_1200}; dome 120 invariant {dome_120}; "
                f"perturbed all simple at rel_tol {SPLIT_TOL:g} {simple}, "
                f"merged at default tol: {merged or 'none'}")


def _det_roots(model):
    """Roots of det(K - lam M) by sign-change scan and bracketing, no eigensolver."""
    sys_ = assemble(model)
    K, M = sys_.stiffness, sys_.mass
    n = K.shape[0]
    scale = np.linalg.det(M) ** (1.0 / n)

    def f(lam):
        return np.linalg.det((K - lam * M) / scale)

    upper = 1.01 * np.sum(np.diag(K) / np.diag(M)) * n
    grid = np.linspace(0.0, upper, 40001)
    vals = np.array([f(x) for x in grid])
    roots = [opt.brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)
             for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]]
    return np.array(roots)


def c11():
    worst = {"residual": 0.0, "scale": 0.0, "euler": 0.0, "rotation": 0.0, "oracle": 0.0}
    for name in RECIPES:
        a = cached_analysis(name)
        if not a.residuals.ok(1e-8):
            return False, f"residual bound fails on {name}"
        worst["residual"] = max(worst["residual"], a.residuals.residual,
                                a.residuals.orthonormality, a.residuals.diagonalization)
        lam = a.spectrum.eigenvalues
        lam_s = nonzero_spectrum(solve(assemble(a.model.scaled(3.7))), dropped=a.zero_count).eigenvalues
        worst["scale"] = max(worst["scale"], float(np.max(np.abs(lam_s - lam) / np.abs(lam))))
        der = MatrixDerivatives.from_model(a.model)
        S = eig_sensitivities(a.spectrum, der)
        euler = np.abs(S @ der.areas) / np.abs(lam)
        worst["euler"] = max(worst["euler"], float(euler.max()))
        # rotate each repeated eigenspace by a random orthogonal matrix
        rng = np.random.default_rng(7)
        Phi = a.spectrum.eigenvectors.copy()
        for c in a.clusters:
            if c.multiplicity > 1:
                Q, _ = np.linalg.qr(rng.standard_normal((c.multiplicity, c.multiplicity)))
                Phi[:, c.start:c.stop] = Phi[:, c.start:c.stop] @ Q
        rot = type(a.spectrum)(lam, Phi, 0, a.spectrum.dropped)
        g0 = cluster_mean_gradients(a.spectrum, der, a.clusters)
        g1 = cluster_mean_gradients(rot, der, a.clusters)
        # relative to the model's largest cluster-mean sensitivity; invariant rows are
        # round-off on both sides and have no scale of their own
        worst["rotation"] = max(worst["rotation"],
                                float(np.max(np.abs(g1 - g0)) / np.max(np.abs(g0))))
    for extra in (False, True):
        m = small_truss(extra_dof=extra)
        lam = solve(assemble(m)).eigenvalues
        roots = _det_roots(m)
        if len(roots) != len(lam):
            return False, f"oracle found {len(roots)} roots for {len(lam)} eigenvalues"
        worst["oracle"] = max(worst["oracle"], float(np.max(np.abs(roots - lam) / lam)))
    ok = (worst["scale"] <= 1e-10 and worst["euler"] <= 1e-9 and worst["rotation"] <= 1e-9
          and worst["oracle"] <= 1e-9)
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


CRITERIA = [
    (1, "dodecahedral I_h spectrum", c01),
    (2, "dodecahedral I_h sensitivities", c02),
    (3, "accidental symmetry detection", c03),
    (4, "cluster means under accidental symmetry", c04),
    (5, "partition-consistency identity", c05),
    (6, "completeness of p-norm/KS truncation", c06),
    (7, "smooth function of cluster means", c07),
    (8, "symmetric g vs asymmetric h", c08),
    (9, "point-group orders", c09),
    (10, "tetrahedral/octahedral/dome structure", c10),
    (11, "property suite", c11),
]


def _line(num, title, ok, detail):
    return f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


def test_cdm_stencil_quadratic():
    from symspec.sensitivity import central_difference
    assert abs(central_difference(lambda x: x * x, 1.0, 1e-6) - 2.0) <= 1e-9


def test_cdm_full_ih_agrees():
    m = cached_preset("dodecahedral-ih")
    v = cdm_sensitivity(m, Eigenvalues([0]), group=m.partition.ids[0])[0]
    assert abs(v - (-0.128916)) <= 1e-4 * 0.128916


if __name__ == "__main__":
    results = []
    for num, title, fn in CRITERIA:
        ok, detail = fn()
        results.append(ok)
        print(_line(num, title, ok, detail))
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
