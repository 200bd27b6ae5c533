"""Command-line front end: ``symspec generate|analyze|audit|reproduce|orbits|check-symmetry``.

Exit codes: 0 success, 1 input error, 2 numerical failure, 3 reproduction mismatch.
A detected non-differentiability is a finding, not a failure, so ``audit``
exits 0.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import analyze
from .clusters import DEFAULT_CLUSTER_TOL, cluster
from .eigen import DEFAULT_ZERO_TOL, SolverError, nonzero_spectrum, solve
from .model import ModelError, assemble, save_model, to_dict
from .presets import resolve_model
from .reports import FORMATS, render_analysis, render_audit, render_mapping, render_reproductions
from .reproduce import SCENARIOS, Settings, reproduce
from .sensitivity import (DEFAULT_STEP, KS, ClusterMeans, DemoPolynomial, Eigenvalues, PNorm,
                          audit, sine_product_function)
from .structures import FAMILIES, apply_preset, generate, perturb_apex
from .symmetry import (SymmetryError, check_symmetry, detect_accidental, enforced_group, make_group,
                       orbits)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3
QUANTITIES = ("eigen", "cluster-means", "pnorm", "ks", "cluster-function", "g", "h")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--out", type=Path, help="write the report (or model) to this path")
    g.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS,
                   help="report format (default text)")
    g.add_argument("--zero-tol", type=float, default=argparse.SUPPRESS,
                   help=f"rigid-mode threshold relative to lambda_max (default {DEFAULT_ZERO_TOL:g})")
    g.add_argument("--cluster-tol", type=float, default=argparse.SUPPRESS,
                   help=f"relative gap for repeated eigenvalues (default {DEFAULT_CLUSTER_TOL:g})")
    g.add_argument("--cdm-step", type=float, default=argparse.SUPPRESS,
                   help=f"central-difference step on areas (default {DEFAULT_STEP:g})")
    g.add_argument("--deterministic", action="store_true", default=argparse.SUPPRESS,
                   help="no timestamps, single-threaded CDM")
    return p


def _group_args(p: argparse.ArgumentParser):
    p.add_argument("--group", help="point group, e.g. I_h, O_h, T_d, C_5v, C_1 "
                                   "(default: the model's enforced group)")
    p.add_argument("--axis", type=float, nargs=3, help="C_Nv rotation axis")
    p.add_argument("--mirror", type=float, nargs=3, help="C_Nv mirror-plane normal")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="symspec", parents=[common],
        description="Eigen-analysis and sensitivity audits of symmetric 3-D trusses.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a truss model file")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int, help="dome subdivisions")
    p.add_argument("--preset", help="design preset (e.g. nosym, c8v, td, c3v, oh, ih, accidental)")
    p.add_argument("--perturb-apex", type=float, nargs="*", metavar="D",
                   help="shift the dome apex (no values: configured default)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="override a generator dimension")

    p = sub.add_parser("analyze", parents=[common], help="spectrum and cluster report")
    p.add_argument("model", help="model file, preset:NAME, or preset name")

    p = sub.add_parser("audit", parents=[common], help="analytical vs CDM sensitivities")
    p.add_argument("model")
    p.add_argument("--quantity", choices=QUANTITIES, default="eigen")
    p.add_argument("--eigen", type=int, nargs="+", metavar="K",
                   help="1-based eigenvalue indices (default: first of each repeated cluster)")
    p.add_argument("--clusters", type=int, nargs="+", metavar="Q",
                   help="1-based cluster indices (cluster-means, cluster-function)")
    p.add_argument("--n", type=int, help="truncation count for pnorm/ks")
    p.add_argument("--p", type=float, default=10.0)
    p.add_argument("--q", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1, help="threads for CDM solves")

    p = sub.add_parser("reproduce", parents=[common], help="re-run a published table")
    p.add_argument("table", nargs="?", default="all",
                   help=f"one of {', '.join(SCENARIOS)}, or 'all'")

    p = sub.add_parser("orbits", parents=[common], help="node and element orbits")
    p.add_argument("model")
    _group_args(p)

    p = sub.add_parser("check-symmetry", parents=[common],
                       help="geometric/design symmetry and accidental-symmetry detection")
    p.add_argument("model")
    _group_args(p)
    return parser


def _opt(args, name, default):
    return getattr(args, name, default)


def _settings(args) -> Settings:
    workers = 1 if _opt(args, "deterministic", False) else max(1, _opt(args, "workers", 1))
    return Settings(_opt(args, "zero_tol", DEFAULT_ZERO_TOL),
                    _opt(args, "cluster_tol", DEFAULT_CLUSTER_TOL),
                    _opt(args, "cdm_step", DEFAULT_STEP), workers)


def _emit(text: str, args):
    fmt = _opt(args, "format", "text")
    if fmt == "text" and not _opt(args, "deterministic", False):
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        text = f"# symspec {__version__} {stamp}\n" + text
    out = _opt(args, "out", None)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _group(args, model):
    if args.group:
        return make_group(args.group, axis=args.axis, mirror=args.mirror)
    return enforced_group(model)


# ----------------------------------------------------------------------

def cmd_generate(args) -> int:
    params = {}
    if args.n is not None:
        params["n"] = args.n
    for kv in args.param:
        if "=" not in kv:
            raise ModelError(f"--param expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k.strip()] = float(v)
    model = generate(args.family, **params)
    if args.preset:
        model = apply_preset(model, args.preset)
    if args.perturb_apex is not None:
        if args.perturb_apex and len(args.perturb_apex) != 3:
            raise ModelError("--perturb-apex takes three values or none")
        model = perturb_apex(model, args.perturb_apex or None)
    out = _opt(args, "out", None)
    if out is None:
        sys.stdout.write(json.dumps(to_dict(model), indent=1) + "\n")
    else:
        save_model(model, out)
        sys.stderr.write(f"wrote {out}: {len(model.elements)} elements, "
                         f"{len(model.partition)} design groups\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    s = _settings(args)
    a = analyze(resolve_model(args.model), s.zero_tol, s.cluster_tol)
    _emit(render_analysis(a, _opt(args, "format", "text")), args)
    return EXIT_OK


def _quantities(args, model, s: Settings):
    ref = nonzero_spectrum(solve(assemble(model), s.zero_tol), s.zero_tol)
    cs = cluster(ref.eigenvalues, s.cluster_tol)
    picked = [q - 1 for q in args.clusters] if args.clusters else None
    kind = args.quantity
    if kind == "eigen":
        idx = [k - 1 for k in args.eigen] if args.eigen else \
            [c.start for c in cs if c.multiplicity > 1]
        return [Eigenvalues(idx or [0])]
    if kind == "cluster-means":
        return [ClusterMeans(cs, picked)]
    if kind in ("pnorm", "ks"):
        n = args.n or len(ref)
        return [PNorm(n, args.p) if kind == "pnorm" else KS(n, args.q)]
    if kind == "cluster-function":
        return [sine_product_function(cs, tuple(picked) if picked else (0, 3, 4), n=args.n)]
    idx = [k - 1 for k in args.eigen] if args.eigen else [0, 1, 2]
    return [DemoPolynomial(kind, idx)]


def cmd_audit(args) -> int:
    s = _settings(args)
    model = resolve_model(args.model)
    report = audit(model, _quantities(args, model, s), h=s.step, zero_tol=s.zero_tol,
                   workers=s.workers)
    _emit(render_audit(report, _opt(args, "format", "text")), args)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    s = _settings(args)
    ids = list(SCENARIOS) if args.table == "all" else [args.table]
    try:
        results = [reproduce(t, s) for t in ids]
    except KeyError as exc:
        raise ModelError(str(exc.args[0])) from None
    _emit(render_reproductions(results, _opt(args, "format", "text")), args)
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


def cmd_orbits(args) -> int:
    model = resolve_model(args.model)
    g = _group(args, model)
    part = orbits(model, g)
    data = {"group": g.name, "order": g.order,
            "node_orbit_sizes": [len(o) for o in part.node_orbits],
            "element_orbit_sizes": [len(o) for o in part.element_orbits],
            **part.to_dict()}
    _emit(render_mapping(f"orbits under {g.name} (order {g.order})", data,
                         _opt(args, "format", "text")), args)
    return EXIT_OK


def cmd_check_symmetry(args) -> int:
    model = resolve_model(args.model)
    g = _group(args, model)
    chk = check_symmetry(model, g)
    acc = detect_accidental(model, g)
    data = {"group": g.name, "order": g.order, "geometric": chk.geometric, "design": chk.design,
            "enforced": acc.enforced, "detected": acc.detected, "accidental": acc.accidental}
    _emit(render_mapping("symmetry check", data, _opt(args, "format", "text")), args)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "audit": cmd_audit,
    "reproduce": cmd_reproduce,
    "orbits": cmd_orbits,
    "check-symmetry": cmd_check_symmetry,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ModelError, SymmetryError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"symspec: error: {msg}\n")
        return EXIT_INPUT
    except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
        sys.stderr.write(f"symspec: numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
