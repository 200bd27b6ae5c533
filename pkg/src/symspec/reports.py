"""Text, CSV and JSON renderings of analyses, audits and reproductions.

Eigenvalues print with 3 decimals and sensitivities with 6, as in the
published tables.  Library indices are 0-based; reports label eigenvalues,
clusters and groups from 1.
"""

from __future__ import annotations

import csv
import io
import json

from .analysis import Analysis
from .reproduce import Reproduction
from .sensitivity import SensitivityReport

FORMATS = ("text", "csv", "json")


def aligned(headers, rows) -> str:
    """Right-aligned plain-text table."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _csv(headers, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _f6(v: float) -> str:
    # no "-0.000000" for round-off-level values
    out = f"{v:.6f}"
    return out[1:] if out == "-0.000000" else out


def _check_format(fmt: str):
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")


# ----------------------------------------------------------------------

def render_analysis(a: Analysis, fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return _json(a.to_dict())
    owner = {k: q for q, c in enumerate(a.clusters) for k in c.indices}
    rows = []
    for k, lam in enumerate(a.spectrum.eigenvalues):
        q = owner[k]
        c = a.clusters[q]
        rows.append([f"lambda_{k + 1}", f"{lam:.3f}", q + 1, c.multiplicity,
                     "yes" if a.invariant[q] else "no"])
    headers = ["eigenvalue", "value", "cluster", "multiplicity", "invariant"]
    if fmt == "csv":
        return _csv(headers, rows)
    name = a.model.meta.get("name") if a.model.meta else None
    head = [
        f"model: {name or 'unnamed'}  free dofs: {a.system.n_free}  "
        f"zero modes dropped: {a.zero_count}",
        "",
        aligned(headers, rows),
        "",
        "clusters (multiplicity x mean):",
    ]
    for q, c in enumerate(a.clusters):
        tag = "  invariant" if a.invariant[q] else ""
        head.append(f"  Lambda_{q + 1}: {c.multiplicity} x {c.mean:.3f}"
                    f"  [lambda_{c.start + 1}..lambda_{c.stop}]{tag}")
    r = a.residuals
    head += ["", f"residual {r.residual:.1e}  M-orthonormality {r.orthonormality:.1e}  "
                 f"K-diagonalization {r.diagonalization:.1e}"]
    return "\n".join(head) + "\n"


def render_audit(report: SensitivityReport, fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return _json(report.to_dict())
    if fmt == "csv":
        rows = [[r.quantity, r.variable, _f6(r.cdm), _f6(r.analytical),
                 "yes" if r.matches else "no"] for r in report.rows]
        return _csv(["quantity", "variable", "cdm", "analytical", "match"], rows)
    out = [f"central-difference step h = {report.step:g}", ""]
    for v in report.verdicts:
        rows = [[r.variable, _f6(r.cdm), _f6(r.analytical), "" if r.matches else "*"]
                for r in v.rows]
        out.append(f"d {v.quantity} / dx")
        out.append(aligned(["variable", "CDM", "Analytical", ""], rows))
        out.append("")
    out.append("verdicts (* marks analytical/CDM mismatch):")
    for v in report.verdicts:
        state = "differentiable" if v.differentiable else \
            f"NOT differentiable ({len(v.offending)}/{len(v.rows)} variables mismatch)"
        out.append(f"  {v.quantity}: {state}")
    return "\n".join(out) + "\n"


def render_reproductions(results: list[Reproduction], fmt: str = "text") -> str:
    _check_format(fmt)
    if fmt == "json":
        return _json({"passed": all(r.passed for r in results),
                      "results": [r.to_dict() for r in results]})
    if fmt == "csv":
        rows = [[r.id, c.name, "pass" if c.passed else "FAIL", c.detail]
                for r in results for c in r.checks]
        return _csv(["id", "check", "status", "detail"], rows)
    out = []
    for r in results:
        out.append(f"{r.id}: {r.title}: {'PASS' if r.passed else 'FAIL'}")
        for c in r.checks:
            out.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}"
                       + (f"  ({c.detail})" if c.detail else ""))
        for n in r.notes:
            out.append(f"  note: {n}")
    total = sum(r.passed for r in results)
    out.append(f"{total}/{len(results)} reproduced")
    return "\n".join(out) + "\n"


def render_mapping(title: str, data: dict, fmt: str = "text") -> str:
    """Generic key/value report for orbits and symmetry checks."""
    _check_format(fmt)
    if fmt == "json":
        return _json(data)
    rows = [[k, json.dumps(v) if isinstance(v, (list, dict)) else v] for k, v in data.items()]
    if fmt == "csv":
        return _csv(["key", "value"], rows)
    return title + "\n" + "\n".join(f"  {k}: {v}" for k, v in rows) + "\n"
