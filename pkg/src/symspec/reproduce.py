"""Re-run the published scenarios and diff them against the transcribed tables.

Fixtures live in ``data/expected/tableNN.json``.  Sensitivity entries are
printed to 6 decimals, so value comparisons allow ``rel_tol * |v|`` plus half
a unit in the last printed place.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .analysis import analyze
from .clusters import DEFAULT_CLUSTER_TOL, cluster
from .eigen import DEFAULT_ZERO_TOL, nonzero_spectrum, solve
from .model import assemble
from .presets import load_preset
from .sensitivity import (DEFAULT_STEP, KS, ClusterMeans, DemoPolynomial, Eigenvalues, PNorm,
                          audit, sine_product_function)
from .symmetry import make_group

PRINT_HALF_ULP = 5e-7
ZERO_ROW = 1e-5
ZERO_ROW_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Reproduction:
    id: str
    title: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                           for c in self.checks],
                "notes": list(self.notes)}


@dataclass(frozen=True)
class Settings:
    zero_tol: float = DEFAULT_ZERO_TOL
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    step: float = DEFAULT_STEP
    workers: int = 1


def expected(table: str) -> dict:
    with resources.files("symspec").joinpath(f"data/expected/{table}.json").open() as fh:
        return json.load(fh)


def _close(ours: float, printed: float, rel: float) -> bool:
    return abs(ours - printed) <= rel * abs(printed) + PRINT_HALF_ULP


# ----------------------------------------------------------------------
# eigenvalue tables

def _eigen_table(tid: str, title: str, s: Settings) -> Reproduction:
    fx = expected(tid)
    rep = Reproduction(tid, title)
    tol = fx["abs_tol"]
    for scen, values in fx["columns"].items():
        lam = nonzero_spectrum(solve(assemble(load_preset(scen)), s.zero_tol), s.zero_tol).eigenvalues
        if len(lam) != len(values):
            rep.add(scen, False, f"{len(lam)} retained eigenvalues, table lists {len(values)}")
            continue
        err = np.abs(lam - np.array(values))
        rep.add(scen, err.max() <= tol,
                f"{len(values)} values, max |diff| = {err.max():.2e} (tol {tol:g})")
    return rep


# ----------------------------------------------------------------------
# sensitivity tables

def _index(label: str) -> int:
    return int(re.search(r"(\d+)$", label).group(1)) - 1


def _sens_audit(fx: dict, s: Settings):
    model = load_preset(fx["scenario"])
    keys = list(fx["quantities"])
    if keys[0].startswith("mean"):
        ref = nonzero_spectrum(solve(assemble(model), s.zero_tol), s.zero_tol)
        cs = cluster(ref.eigenvalues, s.cluster_tol)
        q = ClusterMeans(cs, [_index(k) for k in keys])
    else:
        q = Eigenvalues([_index(k) for k in keys])
    report = audit(model, [q], h=s.step, zero_tol=s.zero_tol, workers=s.workers)
    return model, keys, q, report


def _compare_rows(rep: Reproduction, key: str, ours, printed, rel: float, what: str):
    ours, printed = np.asarray(ours), np.asarray(printed)
    if np.all(np.abs(printed) < ZERO_ROW):
        worst = float(np.max(np.abs(ours)))
        rep.add(f"{key} {what} ~ 0", worst <= ZERO_ROW_TOL, f"max |value| = {worst:.2e}")
        return
    ok = all(_close(a, b, rel) for a, b in zip(ours, printed))
    diff = float(np.max(np.abs(ours - printed)))
    rep.add(f"{key} {what}", ok, f"max |diff| = {diff:.2e}; ours {np.round(ours, 6).tolist()}")


def _sens_table(tid: str, title: str, s: Settings) -> Reproduction:
    fx = expected(tid)
    rep = Reproduction(tid, title)
    _, keys, _, report = _sens_audit(fx, s)
    A, C = report.analytical(), report.cdm()
    for r, key in enumerate(keys):
        e = fx["quantities"][key]
        _compare_rows(rep, key, A[r], e["analytical"], fx["rel_tol"], "analytical")
        _compare_rows(rep, key, C[r], e["cdm"], fx["rel_tol"], "CDM")
        v = report.verdicts[r]
        rep.add(f"{key} analytical = CDM", v.differentiable,
                "all variables match" if v.differentiable else
                f"mismatch in {[x.variable for x in v.offending]}")
    return rep


def _euler_residual(values, areas) -> float:
    return float(np.dot(values, areas))


def table14(s: Settings) -> Reproduction:
    """C5v sensitivities: the printed columns that violate the homogeneity identity are skipped."""
    tid = "table14"
    fx = expected(tid)
    rep = Reproduction(tid, "dodecahedral C5v eigenvalue sensitivities")
    model, keys, _, report = _sens_audit(fx, s)
    areas = model.partition.areas
    A, C = report.analytical(), report.cdm()
    # each printed entry carries up to half a unit of rounding in the 6th decimal
    slack = PRINT_HALF_ULP * float(np.sum(areas)) * 2
    for r, key in enumerate(keys):
        e = fx["quantities"][key]
        v = report.verdicts[r]
        rep.add(f"{key} analytical = CDM", v.differentiable)
        resid = _euler_residual(e["analytical"], areas)
        if abs(resid) <= slack:
            _compare_rows(rep, key, A[r], e["analytical"], fx["rel_tol"], "analytical")
            _compare_rows(rep, key, C[r], e["cdm"], fx["rel_tol"], "CDM")
        else:
            rep.notes.append(
                f"{key}: printed column gives sum x_g dlam/dx_g = {resid:.4f} (identity requires 0); "
                f"not compared. ours: {np.round(A[r], 6).tolist()}")
    return rep


def table16(s: Settings) -> Reproduction:
    """Accidental symmetry: CDM column reproduced, x2 agrees, other variables mismatch."""
    tid = "table16"
    fx = expected(tid)
    rep = Reproduction(tid, "dodecahedral accidental-I_h eigenvalue sensitivities")
    _, keys, _, report = _sens_audit(fx, s)
    A, C = report.analytical(), report.cdm()
    for r, key in enumerate(keys):
        e = fx["quantities"][key]
        _compare_rows(rep, key, C[r], e["cdm"], fx["rel_tol"], "CDM")
        rep.add(f"{key} x2 analytical", _close(A[r][1], e["analytical"][1], fx["rel_tol"]),
                f"ours {A[r][1]:.6f}, printed {e['analytical'][1]:.6f}")
        rows = report.verdicts[r].rows
        rep.add(f"{key} x2 analytical = CDM", rows[1].matches)
        rep.add(f"{key} non-differentiable", not report.verdicts[r].differentiable,
                f"mismatch in {[x.variable for x in report.verdicts[r].offending]}")
    rep.notes.append("analytical entries for x1, x3, x4 depend on the solver's eigenbasis; "
                     "only the mismatch verdict is compared")
    return rep


def table17(s: Settings) -> Reproduction:
    rep = _sens_table("table17", "dodecahedral accidental-I_h cluster-mean sensitivities", s)
    # the sub-groups x1, x3, x4 of the C5v split rebuild the I_h edge group
    acc = load_preset("dodecahedral-accidental")
    ih = load_preset("dodecahedral-ih")
    from .sensitivity import MatrixDerivatives, cluster_mean_gradients
    ga = [None, None]
    for i, m in enumerate((acc, ih)):
        ref = nonzero_spectrum(solve(assemble(m), s.zero_tol), s.zero_tol)
        ga[i] = cluster_mean_gradients(ref, MatrixDerivatives.from_model(m),
                                       cluster(ref.eigenvalues, s.cluster_tol))
    summed = ga[0][:, 0] + ga[0][:, 2] + ga[0][:, 3]
    scale = np.maximum(np.abs(ga[1][:, 0]), 1.0)
    err = float(np.max(np.abs(summed - ga[1][:, 0]) / scale))
    rep.add("partition consistency x1+x3+x4 = I_h x1", err <= 1e-6, f"max rel diff {err:.1e}")
    return rep


def table15(s: Settings) -> Reproduction:
    rep = Reproduction("table15", "dodecahedral design-variable values")
    want = {"dodecahedral-ih": [100, 200], "dodecahedral-c5v": [100, 200, 225, 250],
            "dodecahedral-accidental": [100, 200, 100, 100]}
    for name, vals in want.items():
        got = load_preset(name).partition.areas.tolist()
        rep.add(name, got == [float(v) for v in vals], f"areas {got}")
    return rep


# ----------------------------------------------------------------------
# figure scenarios (verdicts only; the figures carry no numeric labels)

def _verdicts(model, quantities, s: Settings):
    return audit(model, quantities, h=s.step, zero_tol=s.zero_tol, workers=s.workers)


def fig9(s: Settings) -> Reproduction:
    rep = Reproduction("fig9", "symmetric g vs asymmetric h on the accidental first cluster")
    r = _verdicts(load_preset("dodecahedral-accidental"),
                  [DemoPolynomial("g"), DemoPolynomial("h")], s)
    g, h = r.verdicts
    rep.add("g differentiable", g.differentiable)
    rep.add("h non-differentiable", not h.differentiable,
            f"mismatch in {[x.variable for x in h.offending]}")
    return rep


def _aggregate_fig(fid: str, title: str, cls, s: Settings) -> Reproduction:
    rep = Reproduction(fid, title)
    model = load_preset("icosahedral-accidental")
    r = _verdicts(model, [cls(15, 10.0), cls(17, 10.0)], s)
    inc, comp = r.verdicts
    rep.add(f"{inc.quantity} non-differentiable (cluster 4 cut)", not inc.differentiable,
            f"{len(inc.offending)}/{len(inc.rows)} variables mismatch")
    rep.add(f"{comp.quantity} differentiable (complete)", comp.differentiable,
            f"{len(comp.offending)}/{len(comp.rows)} variables mismatch")
    return rep


def fig13(s):
    return _aggregate_fig("fig13", "p-norm (p=10) over 15 vs 17 eigenvalues", PNorm, s)


def fig14(s):
    return _aggregate_fig("fig14", "KS (q=10) over 15 vs 17 eigenvalues", KS, s)


def fig15(s: Settings) -> Reproduction:
    rep = Reproduction("fig15", "smooth function of cluster means 1, 4, 5")
    model = load_preset("icosahedral-accidental")
    ref = nonzero_spectrum(solve(assemble(model), s.zero_tol), s.zero_tol)
    cs = cluster(ref.eigenvalues, s.cluster_tol)
    r = _verdicts(model, [sine_product_function(cs)], s)
    v = r.verdicts[0]
    rep.add(f"{v.quantity} differentiable", v.differentiable,
            f"{len(v.offending)}/{len(v.rows)} variables mismatch")
    return rep


def groups(s: Settings) -> Reproduction:
    rep = Reproduction("groups", "point-group orders by closure")
    want = {f"C_{n}v": 2 * n for n in range(3, 9)}
    want.update({"T_d": 24, "O_h": 48, "I_h": 120})
    for name, order in want.items():
        got = make_group(name).order
        rep.add(name, got == order, f"order {got}")
    return rep


def invariants(s: Settings) -> Reproduction:
    """Invariant clusters named in the text."""
    rep = Reproduction("invariants", "invariant eigen-clusters")
    cases = {
        "dodecahedral-ih": [1570.820],
        "octahedral-oh": [300.0, 1200.0],
        "octahedral-c4v": [300.0, 1200.0],
        "tetrahedral-td": [225.0], "tetrahedral-c3v": [225.0], "tetrahedral-nosym": [225.0],
        "icosahedral-ih": [67.765, 150.0, 514.058],
    }
    for name, vals in cases.items():
        a = analyze(load_preset(name), s.zero_tol, s.cluster_tol)
        got = [round(c.mean, 3) for c, f in zip(a.clusters, a.invariant) if f]
        rep.add(name, got == vals, f"invariant means {got}")
    return rep


SCENARIOS = {
    "table01": lambda s: _eigen_table("table01", "domes, no design symmetry", s),
    "table02": lambda s: _eigen_table("table02", "perturbed domes, no design symmetry", s),
    "table03": lambda s: _eigen_table("table03", "domes, C_Nv design symmetry", s),
    "table04": lambda s: _sens_table("table04", "dome C_8v eigenvalue sensitivities", s),
    "table05": lambda s: _eigen_table("table05", "perturbed domes, C_Nv design symmetry", s),
    "table06": lambda s: _eigen_table("table06", "tetrahedral spectra", s),
    "table07": lambda s: _sens_table("table07", "tetrahedral T_d sensitivities", s),
    "table08": lambda s: _sens_table("table08", "tetrahedral C_3v sensitivities", s),
    "table09": lambda s: _eigen_table("table09", "octahedral spectra", s),
    "table10": lambda s: _sens_table("table10", "octahedral O_h sensitivities", s),
    "table11": lambda s: _sens_table("table11", "octahedral C_4v sensitivities", s),
    "table12": lambda s: _eigen_table("table12", "dodecahedral spectra", s),
    "table13": lambda s: _sens_table("table13", "dodecahedral I_h sensitivities", s),
    "table14": table14,
    "table15": table15,
    "table16": table16,
    "table17": table17,
    "table18": lambda s: _eigen_table("table18", "icosahedral spectra", s),
    "fig9": fig9,
    "fig13": fig13,
    "fig14": fig14,
    "fig15": fig15,
    "groups": groups,
    "invariants": invariants,
}


def normalize_id(tid: str) -> str:
    t = tid.lower().replace("-", "").replace("_", "").replace(" ", "")
    m = re.fullmatch(r"(?:table|tab|t)?(\d+)", t)
    if m:
        return f"table{int(m.group(1)):02d}"
    m = re.fullmatch(r"(?:figure|fig|f)(\d+)", t)
    if m:
        return f"fig{int(m.group(1))}"
    return t


def reproduce(tid: str, settings: Settings | None = None) -> Reproduction:
    key = normalize_id(tid)
    if key not in SCENARIOS:
        raise KeyError(f"unsupported id {tid!r}; choose from {', '.join(SCENARIOS)}")
    return SCENARIOS[key](settings or Settings())
