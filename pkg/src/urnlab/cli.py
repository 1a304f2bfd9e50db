"""Command-line interface.

Every command writes a report with a provenance header in one of three
formats: ``json`` (exact rationals with float renderings), ``csv`` (floats
only, one ``section,row,col,value`` line per entry) or ``pretty``.

Exit codes: 0 success, 1 a ``verify`` rule failed, 2 invalid input (parse
errors included), 3 no normal limit (the covariance does not exist).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .asymptotics import (
    NotNormalRegime,
    UrnAnalysis,
    affine_project,
    analyze_urn,
    degree_means,
    fringe_projection,
    functional_moments,
    hmu_mst,
    hmu_pa,
    mst_degree_functional,
    project,
    protected_functional,
    protected_mean,
)
from .exact import RatMatrix, as_rational, format_rat, ldl_psd, rat_from_json, rat_to_json
from .mst import IsoMode, TreeParseError, canonical, enumerate_mst_shapes, parse_mst, prob_mst_equals
from .pa import PaWeights, canonical_pa, enumerate_pa_shapes, parse_pa, prob_pa_equals
from .roots import gamma_condition
from .simulation import Degrees, Fringe, MstModel, PaModel, Protected, SimPlan, run_sim
from .sylvester import rational_eigenvalues
from .urns import (
    UrnSpec,
    build_mst_degree_urn,
    build_mst_fringe_urn,
    build_pa_degree_urn,
    build_pa_fringe_urn,
    build_protected_urn,
    validate_urn,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NOT_NORMAL = 0, 1, 2, 3

MEAN_Z_LIMIT = 4.0
VAR_REL_LIMIT = 0.15


# ---------------------------------------------------------------------------
# rendering


def _vec(v) -> list:
    return [rat_to_json(x) for x in v]


def _mat(m) -> list | None:
    return None if m is None else [[rat_to_json(x) for x in row] for row in m]


def _is_rat(obj) -> bool:
    return isinstance(obj, dict) and set(obj) == {"num", "den", "float"}


def _to_float(obj):
    if _is_rat(obj):
        return obj["float"]
    return obj


def _csv_rows(obj, section: str, rows: list):
    """Flatten into ``(section, row, col, value)`` with floats for rationals."""
    if _is_rat(obj) or isinstance(obj, (int, float, str, bool)) or obj is None:
        rows.append((section, "", "", _to_float(obj)))
        return
    if isinstance(obj, dict):
        for k, v in obj.items():
            _csv_rows(v, f"{section}.{k}" if section else str(k), rows)
        return
    if isinstance(obj, list):
        if obj and all(isinstance(r, list) for r in obj) and all(
            _is_rat(x) or isinstance(x, (int, float)) or x is None for r in obj for x in r
        ):
            for i, r in enumerate(obj):
                for j, x in enumerate(r):
                    rows.append((section, i, j, _to_float(x)))
            return
        if all(_is_rat(x) or isinstance(x, (int, float, str, bool)) or x is None for x in obj):
            for i, x in enumerate(obj):
                rows.append((section, i, "", _to_float(x)))
            return
        for i, x in enumerate(obj):
            _csv_rows(x, f"{section}[{i}]", rows)


def _pretty(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if _is_rat(obj):
        x = Fraction(int(obj["num"]), int(obj["den"]))
        s = format_rat(x)
        return s if x.denominator == 1 else f"{s}  (~{obj['float']:.10g})"
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            body = _pretty(v, indent + 1)
            if "\n" in body or isinstance(v, (dict, list)) and body.startswith("\n"):
                lines.append(f"{pad}{k}:{body if body.startswith(chr(10)) else chr(10) + body}")
            else:
                lines.append(f"{pad}{k}: {body}")
        return "\n".join(lines)
    if isinstance(obj, list):
        if obj and all(isinstance(r, list) for r in obj):
            return "\n" + "\n".join(pad + "  [" + ", ".join(_short(x) for x in r) + "]" for r in obj)
        if all(not isinstance(x, (dict, list)) or _is_rat(x) for x in obj):
            return "[" + ", ".join(_short(x) for x in obj) + "]"
        return "\n" + "\n".join(pad + "  - " + _pretty(x, indent + 2).lstrip() for x in obj)
    return str(obj)


def _short(x) -> str:
    if _is_rat(x):
        return format_rat(Fraction(int(x["num"]), int(x["den"])))
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def emit(report: dict, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump(report, stream, indent=1)
        stream.write("\n")
    elif fmt == "csv":
        for k, v in report["provenance"].items():
            stream.write(f"# {k}: {json.dumps(v)}\n")
        rows: list = []
        _csv_rows({k: v for k, v in report.items() if k != "provenance"}, "", rows)
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["section", "row", "col", "value"])
        w.writerows(rows)
    else:
        stream.write(_pretty(report) + "\n")


def _provenance(args: argparse.Namespace, **extra) -> dict:
    inputs = {k: v for k, v in vars(args).items() if k not in ("func", "out", "command") and v is not None}
    return {"tool": "urnlab", "version": __version__, "command": args.command, "inputs": inputs, **extra}


# ---------------------------------------------------------------------------
# analysis reports


def _spectrum(an: UrnAnalysis) -> dict:
    rational = rational_eigenvalues(an.charpoly)
    return {
        "rational": [{"value": rat_to_json(r), "multiplicity": k} for r, k in rational],
        "numeric": [
            {"re": r.value.real, "im": r.value.imag, "radius": r.radius, "multiplicity": r.multiplicity}
            for r in an.eigenvalues
        ],
    }


def _stat_block(labels, mean, cov) -> dict:
    return {"labels": list(labels), "mean": _vec(mean), "cov": _mat(cov)}


def _base_report(an: UrnAnalysis, args) -> dict:
    rep = {"provenance": _provenance(args, urn=an.urn.meta)}
    body = an.to_json()
    body.pop("provenance", None)
    body.pop("eigenvalues", None)
    rep.update(body)
    rep["spectrum"] = _spectrum(an)
    rep["validation"] = {k: {"pass": p, "detail": d} for k, (p, d) in validate_urn(an.urn).checks.items()}
    if an.Sigma is not None:
        rep["sigma_psd"] = ldl_psd(an.Sigma)[0]
    return rep


def _size_aggregates_mst(an: UrnAnalysis, m: int, mode: IsoMode) -> dict:
    """Variance of the number of fringe subtrees of each size fully in the down-set."""
    labels = set(an.labels)
    out = {}
    sizes = sorted({parse_mst(lab, m).keys for lab in an.labels})
    for k in sizes:
        shapes = [canonical(s, mode) for s in enumerate_mst_shapes(m, k, mode)]
        if not set(shapes) <= labels:
            continue
        r = fringe_projection(an, shapes)
        row = RatMatrix._raw([[sum(r.col(j)) for j in range(r.ncols)]])
        mu, sig = project(an, row)
        out[str(k)] = {"mean": rat_to_json(mu[0]), "variance": rat_to_json(sig[0, 0])}
    return out


def _size_aggregates_pa(an: UrnAnalysis, mode: IsoMode) -> dict:
    labels = set(an.labels)
    out = {}
    sizes = sorted({parse_pa(lab).size for lab in an.labels if lab != "*"})
    for k in sizes:
        shapes = [canonical_pa(s, mode) for s in enumerate_pa_shapes(k, mode)]
        if not set(shapes) <= labels:
            continue
        r = fringe_projection(an, shapes)
        row = RatMatrix._raw([[sum(r.col(j)) for j in range(r.ncols)]])
        mu, sig = project(an, row)
        out[str(k)] = {"mean": rat_to_json(mu[0]), "variance": rat_to_json(sig[0, 0])}
    return out


def _fringe_report(an: UrnAnalysis, args, hmu) -> dict:
    rep = _base_report(an, args)
    targets = an.urn.meta["targets"]
    r = fringe_projection(an, targets)
    mu_f, sig_f = project(an, r)
    rep["R"] = _mat(r)
    rep["hmu"] = _vec(hmu)
    rep["hmu_equals_Rmu"] = tuple(hmu) == tuple(mu_f)
    total_row = RatMatrix._raw([[sum(r.col(j)) for j in range(r.ncols)]])
    mu_t, sig_t = project(an, total_row)
    rep["statistics"] = {
        "fringe": _stat_block(targets, mu_f, sig_f),
        "fringe_total": _stat_block(["total"], mu_t, sig_t),
    }
    return rep


def _load_urn(path: str) -> UrnSpec:
    with open(path) as fh:
        return UrnSpec.from_json(json.load(fh))


def _read_targets(path: str) -> list[str]:
    with open(path) as fh:
        return [line.split("#")[0].strip() for line in fh if line.split("#")[0].strip()]


def _analyze(u: UrnSpec, args) -> UrnAnalysis:
    return analyze_urn(u, sigma_method=args.sigma_method)


def cmd_analyze_mst_fringe(args) -> dict:
    mode = IsoMode.coerce(args.mode)
    if args.urn:
        u = _load_urn(args.urn)
    else:
        if args.m is None:
            raise ValueError("give --m or --urn")
        if args.targets:
            targets = [parse_mst(t, args.m) for t in _read_targets(args.targets)]
        elif args.all_keys is not None:
            targets = enumerate_mst_shapes(args.m, args.all_keys, mode)
        else:
            raise ValueError("give --targets FILE or --all-keys K")
        u = build_mst_fringe_urn(args.m, targets, mode)
    an = _analyze(u, args)
    m = u.meta["m"]
    mode = IsoMode.coerce(u.meta["mode"])
    rep = _fringe_report(an, args, hmu_mst(u.meta["targets"], m, mode))
    rep["by_size"] = _size_aggregates_mst(an, m, mode)
    return rep


def cmd_analyze_pa_fringe(args) -> dict:
    mode = IsoMode.coerce(args.mode)
    if args.urn:
        u = _load_urn(args.urn)
    else:
        w = PaWeights.make(as_rational(args.chi), as_rational(args.rho))
        if args.targets:
            targets = [parse_pa(t) for t in _read_targets(args.targets)]
        elif args.all_nodes is not None:
            targets = [s for k in range(1, args.all_nodes + 1) for s in enumerate_pa_shapes(k, mode)]
            if w.max_children is not None:
                targets = [t for t in targets if all(len(v.children) <= w.max_children for v in t.nodes())]
        else:
            raise ValueError("give --targets FILE or --all-nodes K")
        u = build_pa_fringe_urn(w, targets, mode)
    an = _analyze(u, args)
    w = PaWeights.make(Fraction(u.meta["chi"]), Fraction(u.meta["rho"]))
    mode = IsoMode.coerce(u.meta["mode"])
    rep = _fringe_report(an, args, hmu_pa(u.meta["targets"], w, mode))
    rep["kappa"] = rat_to_json(w.kappa)
    rep["by_size"] = _size_aggregates_pa(an, mode)
    return rep


def cmd_analyze_protected(args) -> dict:
    u = _load_urn(args.urn) if args.urn else build_protected_urn(args.m)
    an = _analyze(u, args)
    f, const = protected_functional(an)
    mean, var = functional_moments(an, f, const)
    rep = _base_report(an, args)
    closed = protected_mean(u.meta["m"])
    rep["protected_mean"] = rat_to_json(mean)
    rep["protected_mean_closed_form"] = rat_to_json(closed)
    rep["protected_mean_agrees"] = mean == closed
    rep["protected_variance"] = rat_to_json(var)
    rep["statistics"] = {"protected": _stat_block(["protected"], [mean], [[var]])}
    return rep


def cmd_analyze_degrees(args) -> dict:
    if args.urn:
        u = _load_urn(args.urn)
    elif args.model == "mst":
        if args.m is None:
            raise ValueError("--model mst needs --m")
        u = build_mst_degree_urn(args.m)
    else:
        if args.kmax is None:
            raise ValueError("--model pa needs --kmax")
        w = PaWeights.make(as_rational(args.chi), as_rational(args.rho))
        u = build_pa_degree_urn(w, args.kmax)
    an = _analyze(u, args)
    rep = _base_report(an, args)
    if u.meta["model"] == "mst-degree":
        m = u.meta["m"]
        rows, consts = mst_degree_functional(an)
        mean, cov = affine_project(an, rows, consts)
        closed = degree_means("mst", m=m)
        labels = [f"D{k}" for k in range(m + 1)]
    else:
        w = PaWeights.make(Fraction(u.meta["chi"]), Fraction(u.meta["rho"]))
        kmax = u.meta["kmax"]
        k = kmax + 1
        r = RatMatrix._raw([[Fraction(int(i == j)) for j in range(an.q)] for i in range(k)])
        mean, cov = project(an, r)
        closed = degree_means("pa", w=w, kmax=kmax)
        labels = [f"D{i}" for i in range(k)]
        rep["kappa"] = rat_to_json(w.kappa)
    rep["degree_means_closed_form"] = _vec(closed)
    rep["degree_means_agree"] = tuple(closed) == tuple(mean)
    rep["statistics"] = {"degrees": _stat_block(labels, mean, cov)}
    return rep


def cmd_gamma(args) -> dict:
    last = args.m_max if args.m_max is not None else args.m
    rows = []
    for m in range(args.m, last + 1):
        g = gamma_condition(m)
        rows.append(
            {
                "m": m,
                "gamma": g.gamma if math.isfinite(g.gamma) else "-inf",
                "radius": g.radius,
                "normal": g.normal,
                "margin": g.margin if math.isfinite(g.margin) else "inf",
            }
        )
    return {"provenance": _provenance(args), "gamma": rows}


def cmd_prob(args) -> dict:
    mode = IsoMode.coerce(args.mode)
    if args.model == "mst":
        if args.m is None:
            raise ValueError("--model mst needs --m")
        t = parse_mst(args.tree, args.m)
        p = prob_mst_equals(t, mode)
        canon = canonical(t, mode)
        size = t.keys
    else:
        w = PaWeights.make(as_rational(args.chi), as_rational(args.rho))
        t = parse_pa(args.tree)
        p = prob_pa_equals(t, w, mode)
        canon = canonical_pa(t, mode)
        size = t.size
    return {"provenance": _provenance(args), "tree": canon, "size": size, "probability": rat_to_json(p)}


def _sim_plan(args) -> SimPlan:
    mode = IsoMode.coerce(args.mode)
    if args.model == "mst":
        if args.m is None:
            raise ValueError("--model mst needs --m")
        model = MstModel(args.m)
    else:
        model = PaModel.make(as_rational(args.chi), as_rational(args.rho))
    stats = []
    for name in args.stat:
        if name in ("fringe", "fringe-total"):
            if args.targets:
                targets = _read_targets(args.targets)
            elif args.model == "mst" and args.all_keys is not None:
                targets = [canonical(s, mode) for s in enumerate_mst_shapes(args.m, args.all_keys, mode)]
            elif args.model == "pa" and args.all_nodes is not None:
                targets = [canonical_pa(s, mode) for s in enumerate_pa_shapes(args.all_nodes, mode)]
            else:
                raise ValueError("fringe statistics need --targets, --all-keys (mst) or --all-nodes (pa)")
            stats.append(Fringe(tuple(targets), mode, name == "fringe-total"))
        elif name == "protected":
            stats.append(Protected())
        elif name == "degrees":
            stats.append(Degrees(args.kmax))
        else:
            raise ValueError(f"unknown statistic {name!r}")
    return SimPlan(model, args.n, args.reps, tuple(stats), seed=args.seed, workers=args.workers)


def cmd_simulate(args) -> dict:
    plan = _sim_plan(args)
    rep = run_sim(plan)
    out = {"provenance": _provenance(args, seed=args.seed)}
    out.update(rep.to_json())
    return out


def _verify(analysis: dict, sim: dict) -> dict:
    rules = []
    if sim.get("gap_identity") is not None:
        rules.append({"rule": "gap identity in every replicate", "pass": bool(sim["gap_identity"])})
    for name, st in sim["statistics"].items():
        ref = analysis.get("statistics", {}).get(name)
        if ref is None:
            rules.append({"rule": f"{name}: reference present", "pass": False})
            continue
        if list(ref["labels"]) != list(st["labels"]):
            rules.append({"rule": f"{name}: labels match", "pass": False, "detail": [ref["labels"], st["labels"]]})
            continue
        for i, lab in enumerate(st["labels"]):
            mu = float(rat_from_json(ref["mean"][i]))
            se = st["se"][i]
            diff = abs(st["mean"][i] - mu)
            ok = diff <= MEAN_Z_LIMIT * se if se > 0 else diff <= 1e-12
            rules.append(
                {"rule": f"{name}[{lab}]: |mean/n - mu| <= {MEAN_Z_LIMIT} SE", "pass": ok, "value": diff, "limit": MEAN_Z_LIMIT * se}
            )
            if ref.get("cov") is not None:
                var = float(rat_from_json(ref["cov"][i][i]))
                got = st["cov"][i][i]
                if var > 0:
                    rel = abs(got - var) / var
                    ok = rel <= VAR_REL_LIMIT
                else:
                    rel = abs(got)
                    ok = rel <= 1e-12
                rules.append({"rule": f"{name}[{lab}]: variance within {VAR_REL_LIMIT:.0%}", "pass": ok, "value": rel})
            flags = st["flags"][i]
            rules.append({"rule": f"{name}[{lab}]: no skewness/kurtosis flags", "pass": not flags, "value": flags})
    return {"rules": rules, "pass": all(r["pass"] for r in rules)}


def cmd_verify(args) -> dict:
    with open(args.analysis) as fh:
        analysis = json.load(fh)
    with open(args.sim) as fh:
        sim = json.load(fh)
    out = {"provenance": _provenance(args)}
    out.update(_verify(analysis, sim))
    return out


def cmd_urn_dump(args) -> dict:
    mode = IsoMode.coerce(args.mode)
    kind = args.kind
    if kind == "mst-fringe":
        if args.targets:
            targets = [parse_mst(t, args.m) for t in _read_targets(args.targets)]
        else:
            targets = enumerate_mst_shapes(args.m, args.all_keys if args.all_keys is not None else args.m - 2, mode)
        u = build_mst_fringe_urn(args.m, targets, mode)
    elif kind == "pa-fringe":
        w = PaWeights.make(as_rational(args.chi), as_rational(args.rho))
        if args.targets:
            targets = [parse_pa(t) for t in _read_targets(args.targets)]
        else:
            k = args.all_nodes if args.all_nodes is not None else 1
            targets = [s for j in range(1, k + 1) for s in enumerate_pa_shapes(j, mode)]
            if w.max_children is not None:
                targets = [t for t in targets if all(len(v.children) <= w.max_children for v in t.nodes())]
        u = build_pa_fringe_urn(w, targets, mode)
    elif kind == "protected":
        u = build_protected_urn(args.m)
    elif kind == "mst-degree":
        u = build_mst_degree_urn(args.m)
    else:
        if args.kmax is None:
            raise ValueError("pa-degree needs --kmax")
        u = build_pa_degree_urn(PaWeights.make(as_rational(args.chi), as_rational(args.rho)), args.kmax)
    out = {"provenance": _provenance(args)}
    out.update(u.to_json())
    return out


# ---------------------------------------------------------------------------
# argument parsing


def _add_out(p):
    p.add_argument("--out", choices=["json", "csv", "pretty"], default="json", help="output format")


def _add_sigma(p):
    p.add_argument(
        "--sigma-method", choices=["auto", "kronecker", "blocks"], default="auto", help="Sylvester solver route"
    )
    p.add_argument("--urn", help="analyze a urn saved by urn-dump instead of building one")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urnlab", description="Exact urn asymptotics for random trees.")
    parser.add_argument("--version", action="version", version=f"urnlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-mst-fringe", help="fringe subtrees of m-ary search trees")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--targets", help="file with one tree per line")
    p.add_argument("--all-keys", type=int, help="use every shape with exactly K keys as targets")
    p.add_argument("--mode", choices=["ordered", "unordered"], default="ordered")
    _add_sigma(p)
    _add_out(p)
    p.set_defaults(func=cmd_analyze_mst_fringe)

    p = sub.add_parser("analyze-pa-fringe", help="fringe subtrees of preferential attachment trees")
    p.add_argument("--chi", default="0")
    p.add_argument("--rho", default="1")
    p.add_argument("--targets", help="file with one tree per line")
    p.add_argument("--all-nodes", type=int, help="use every shape with at most K nodes as targets")
    p.add_argument("--mode", choices=["ordered", "unordered"], default="unordered")
    _add_sigma(p)
    _add_out(p)
    p.set_defaults(func=cmd_analyze_pa_fringe)

    p = sub.add_parser("analyze-protected", help="protected nodes of m-ary search trees")
    p.add_argument("--m", type=int, default=2)
    _add_sigma(p)
    _add_out(p)
    p.set_defaults(func=cmd_analyze_protected)

    p = sub.add_parser("analyze-degrees", help="out-degree counts")
    p.add_argument("--model", choices=["mst", "pa"], default="mst")
    p.add_argument("--m", type=int)
    p.add_argument("--chi", default="0")
    p.add_argument("--rho", default="1")
    p.add_argument("--kmax", type=int)
    _add_sigma(p)
    _add_out(p)
    p.set_defaults(func=cmd_analyze_degrees)

    p = sub.add_parser("gamma", help="normal-regime test for m-ary search trees")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--m-max", type=int, help="report every m up to this value")
    _add_out(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("prob", help="exact probability of a tree shape")
    p.add_argument("--model", choices=["mst", "pa"], required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--chi", default="0")
    p.add_argument("--rho", default="1")
    p.add_argument("--tree", required=True)
    p.add_argument("--mode", choices=["ordered", "unordered"], default="ordered")
    _add_out(p)
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("simulate", help="Monte Carlo replicates")
    p.add_argument("--model", choices=["mst", "pa"], required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--chi", default="0")
    p.add_argument("--rho", default="1")
    p.add_argument("--n", type=int, default=100_000, help="keys (mst) or nodes (pa)")
    p.add_argument("--reps", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, help="worker processes (default: URNLAB_WORKERS or 1)")
    p.add_argument(
        "--stat",
        action="append",
        choices=["fringe", "fringe-total", "protected", "degrees"],
        required=True,
        help="statistic to collect; repeatable",
    )
    p.add_argument("--targets", help="file with one tree per line")
    p.add_argument("--all-keys", type=int, help="mst: every shape with exactly K keys")
    p.add_argument("--all-nodes", type=int, help="pa: every shape with exactly K nodes")
    p.add_argument("--mode", choices=["ordered", "unordered"], default="ordered")
    p.add_argument("--kmax", type=int, help="pa degrees: largest degree reported")
    _add_out(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compare a simulation report with an analysis report")
    p.add_argument("--analysis", required=True)
    p.add_argument("--sim", required=True)
    _add_out(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("urn-dump", help="write a urn as JSON")
    p.add_argument("--kind", choices=["mst-fringe", "pa-fringe", "protected", "mst-degree", "pa-degree"], required=True)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--chi", default="0")
    p.add_argument("--rho", default="1")
    p.add_argument("--targets")
    p.add_argument("--all-keys", type=int)
    p.add_argument("--all-nodes", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--mode", choices=["ordered", "unordered"], default="ordered")
    _add_out(p)
    p.set_defaults(func=cmd_urn_dump)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
    except NotNormalRegime as exc:
        diag = {
            "provenance": _provenance(args),
            "error": "not-normal-regime",
            "message": str(exc),
            "gamma": exc.gamma,
            "lambda1": rat_to_json(exc.lambda1),
            "diagnostic": exc.diagnostic,
        }
        emit(diag, args.out)
        return EXIT_NOT_NORMAL
    except TreeParseError as exc:
        print(f"urnlab: parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError, KeyError) as exc:
        print(f"urnlab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    emit(report, args.out)
    if args.command == "verify" and not report["pass"]:
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
