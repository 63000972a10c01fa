"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 symbol evaluation error,
4 malformed GF01 input, 5 at least one failed check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Callable, Sequence

import numpy as np

from . import checks as ck
from .gridio import GF01Error, read_gf01, write_gf01
from .jumps import (
    JumpModel,
    atom_modulation,
    limiting_symbol,
    project_conditional,
    projected_coefficient,
    simulate_paths,
    transform_terminal_values,
)
from .spectral import (
    GridField,
    GridSpec,
    apply_multiplier,
    beurling_identity_error,
    estimate_lp_ratio,
    gaussian_bump,
    lp_norm,
    standard_ensemble,
    weak_l1_ratio,
)
from .symbols import (
    DEFAULT_LEVEL,
    AngularModulator,
    Beurling,
    Directional,
    Stable,
    relativistic_profile,
    symbol_from_json,
)

EXIT_OK, EXIT_USAGE, EXIT_EVAL, EXIT_GF01, EXIT_CHECK = 0, 2, 3, 4, 5

CHECK_NAMES = ("marcinkiewicz", "hormander", "lagrange", "mikhlin", "mixed", "relativistic",
               "beurling-identity", "lp-ratio", "weak-l1", "subordination", "projection")


class UsageError(Exception):
    """Bad arguments or unreadable inputs (exit 2)."""


def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def _load_json_arg(value: str, what: str) -> dict:
    text = value
    if not value.lstrip().startswith("{"):
        if not os.path.isfile(value):
            raise UsageError(f"{what} file not found: {value}")
        with open(value, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} is not valid JSON: {exc}") from None


def _load_symbol(value: str):
    try:
        return symbol_from_json(_load_json_arg(value, "symbol"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_xi(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse frequency {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"cannot parse frequency {text!r}")
    return vals


def _emit(doc, json_path: str | None, stdout) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default)
    stdout.write(text + "\n")
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj)}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_symbol_eval(args, stdout) -> int:
    if not args.symbol:
        raise UsageError("--symbol is required")
    sym = _load_symbol(args.symbol)
    points = [_parse_xi(x) for x in (args.xi or [])]
    if args.xi_file:
        if not os.path.isfile(args.xi_file):
            raise UsageError(f"frequency file not found: {args.xi_file}")
        with open(args.xi_file, encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if row and not row[0].lstrip().startswith("#"):
                    points.append(_parse_xi(",".join(row)))
    if not points:
        raise UsageError("no frequencies given (use --xi or --xi-file)")
    for xi in points:
        if len(xi) != sym.n:
            raise UsageError(f"frequency {xi} does not have {sym.n} components")
    writer = csv.writer(stdout, lineterminator="\n")
    for xi in points:
        try:
            value = complex(sym(np.asarray(xi)))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ArithmeticError("non-finite value")
        except (ArithmeticError, ValueError) as exc:
            sys.stderr.write(f"evaluation failed at xi={','.join(_fmt(v) for v in xi)}: {exc}\n")
            return EXIT_EVAL
        writer.writerow([_fmt(v) for v in xi] + [_fmt(value.real), _fmt(value.imag)])
    return EXIT_OK


def cmd_apply(args, stdout) -> int:
    if not (args.symbol and args.inp and args.out):
        raise UsageError("apply needs --symbol, --in and --out")
    sym = _load_symbol(args.symbol)
    if not os.path.isfile(args.inp):
        raise UsageError(f"input file not found: {args.inp}")
    try:
        field = read_gf01(args.inp)
    except GF01Error as exc:
        sys.stderr.write(f"{args.inp}: {exc}\n")
        return EXIT_GF01
    try:
        out = apply_multiplier(field, sym)
    except (ArithmeticError, ValueError) as exc:
        sys.stderr.write(f"evaluation failed: {exc}\n")
        return EXIT_EVAL
    write_gf01(args.out, out)
    n_in, n_out = lp_norm(field, 2), lp_norm(out, 2)
    doc = {
        "config": {"command": "apply", "symbol": _symbol_doc(sym), "in": args.inp, "out": args.out},
        "norm_in": n_in, "norm_out": n_out, "ratio": n_out / n_in if n_in > 0 else None, "p": 2,
    }
    _emit(doc, args.json, stdout)
    return EXIT_OK


def _symbol_doc(sym):
    from .symbols import symbol_to_json
    try:
        return symbol_to_json(sym)
    except ValueError:
        return {"family": sym.family, "n": sym.n}


# -- check matrices ----------------------------------------------------------


def _harmonic_stable(r, level=None):
    return Stable(2, r, AngularModulator.harmonic(), level)


def _run_marcinkiewicz(args):
    rs = [args.r] if args.r else [0.5, 2.0, 7.0]
    reports = []
    for n in (2, 3):
        for k in range(1, n + 1):
            for J in ck.index_sets(n, k):
                for r in rs:
                    reports.append(ck.marcinkiewicz_weighted_sup(n, r, J))
    return reports


def _run_hormander(args):
    r0 = args.r or 3.0
    reports = []
    for beta in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
        reports.append(ck.hormander_shell_check(_harmonic_stable(r0, args.level), beta))
        rs = [3.0, 6.0, 12.0, 24.0]
        ks = [math.sqrt(ck.hormander_shell_check(_harmonic_stable(r, args.level), beta).measured)
              for r in rs]
        slope = ck.fitted_exponent(rs, ks)
        limit = sum(beta) + 0.2
        reports.append(ck.CheckReport("hormander-scaling", {"beta": list(beta), "r": rs}, slope, limit, 0.0,
                                      slope <= limit, {"shell_constants": ks}))
    return reports


def _run_lagrange(args):
    rng = np.random.default_rng(args.seed)
    reports = []
    tol = 1e-6
    exact = ck.lagrange1_max(1, 1, 1, 1)
    reports.append(ck.CheckReport("lagrange", {"form": "lagrange1", "params": [1, 1, 1, 1]},
                                  exact, 0.5, 0.0, exact == 0.5, {}))
    for _ in range(20):
        p = [float(v) for v in rng.uniform(0.3, 4.0, size=4)]
        closed = ck.lagrange1_max(*p)
        brute = ck.lagrange_brute_force("lagrange1", p)
        reports.append(ck.CheckReport("lagrange", {"form": "lagrange1", "params": p}, brute, closed, tol,
                                      abs(brute - closed) <= tol * closed, {}))
    for _ in range(20):
        n = int(rng.integers(2, 5))
        k = int(rng.integers(2, n + 1))
        r = float(rng.uniform(0.3, 8.0))
        closed = ck.lagrange2_max(n, k, r)
        brute = ck.lagrange_brute_force("lagrange2", (n, k, r))
        reports.append(ck.CheckReport("lagrange", {"form": "lagrange2", "params": [n, k, r]}, brute, closed,
                                      tol, abs(brute - closed) <= tol * closed, {}))
    return reports


def _run_mikhlin(args):
    r = args.r or 4.0
    return [ck.mikhlin_pointwise_check(_harmonic_stable(r, args.level), 3, seed=args.seed),
            ck.mikhlin_pointwise_check(Directional(2, r, (1.0, 0.0)), 3, seed=args.seed)]


def _run_mixed(args):
    return [ck.mixed_factor_check(a, b, c, t, seed=args.seed)
            for a, b, c, t in ((1.0, 1.0, 1.0, 2.0), (0.5, 2.0, 3.0, 1.5), (2.0, 0.5, 1.0, 3.0))]


def _run_relativistic(args):
    alphas = [args.r] if args.r else [0.5, 1.0, 1.5]
    return [ck.relativistic_L_estimates(a, relativistic_profile(a, 2), n=2) for a in alphas]


def _run_beurling_identity(args):
    spec = GridSpec((128, 128), (16 * math.pi, 16 * math.pi))
    fields = {"bump": gaussian_bump(spec, 2.0),
              "anisotropic": gaussian_bump(spec, 1.5, scales=(1.0, 2.5))}
    rs = [args.r] if args.r else [0.5, 1.0, 2.0, 8.0, 40.0]
    level = args.level or DEFAULT_LEVEL[2]
    out = []
    for name, f in fields.items():
        for r in rs:
            err = beurling_identity_error(r, f, level)
            out.append(ck.CheckReport("beurling-identity", {"r": r, "field": name, "level": level,
                                                            "grid": list(spec.shape)},
                                      err, 1e-3, 0.0, err <= 1e-3, {}))
    return out


def _run_lp_ratio(args):
    spec = GridSpec((128, 128), (1.0, 1.0))
    ps = [args.p] if args.p else [1.5, 3.0, 6.0]
    out = []
    for p in ps:
        ens, meta = standard_ensemble(spec, seed=args.seed, p=p)
        rep = estimate_lp_ratio(Beurling(), p, ens, "beurling", meta=meta)
        out.append(rep)
    return out


def _run_weak_l1(args):
    spec = GridSpec((128, 128), (1.0, 1.0))
    r = args.r or 4.0
    f = gaussian_bump(spec, 0.01)
    ratio = weak_l1_ratio(_harmonic_stable(r, args.level), f)
    return [ck.CheckReport("weak-l1", {"r": r, "grid": list(spec.shape), "width": 0.01}, ratio, None, 0.0,
                           math.isfinite(ratio), {"note": "unknown constant; ratio recorded only"})]


def _projection_setup():
    spec = GridSpec((64, 64), (2 * math.pi, 2 * math.pi))
    model = JumpModel.symmetric([[math.pi / 2, 0.0], [math.pi / 8, math.pi / 8]], [1.0, 1.0])
    xi0 = np.array([2.0, 2.0])
    f = GridField(spec, np.cos(spec.coordinates() @ xi0) + 0j)
    return spec, model, xi0, f


def _run_subordination(args):
    spec, model, xi0, f = _projection_setup()
    batch = simulate_paths(model, 1.2, args.paths or 10_000, args.seed, spec, start="lattice")
    res = transform_terminal_values(batch, f, AngularModulator.harmonic())
    violations = int(np.sum(res.qv_transform > res.qv_base))
    return [ck.CheckReport("subordination", {"paths": len(batch), "seed": args.seed, "T": 1.2},
                           float(violations), 0.0, 0.0, violations == 0,
                           {"max_qv_ratio": float(np.max(res.qv_transform / np.maximum(res.qv_base, 1e-300)))})]


def _run_projection(args):
    spec, model, xi0, f = _projection_setup()
    paths = args.paths or 100_000
    batch = simulate_paths(model, 1.2, paths, args.seed, spec, start="lattice")
    weights = atom_modulation(model, AngularModulator.harmonic())
    res = transform_terminal_values(batch, f, weights)
    coef, se = projected_coefficient(batch, res.transform, xi0)
    target = complex(limiting_symbol(model, weights, xi0)) * 0.5
    z = abs(coef - target) / se
    return [ck.CheckReport("projection", {"paths": paths, "seed": args.seed, "T": 1.2, "xi": xi0.tolist()},
                           z, 3.0, 0.0, z <= 3.0,
                           {"estimate": [coef.real, coef.imag], "target": [target.real, target.imag],
                            "stderr": se, "finite_T_factor": math.exp(1.2 * float(model.exponent(xi0)))})]


CHECK_RUNNERS: dict[str, Callable] = {
    "marcinkiewicz": _run_marcinkiewicz,
    "hormander": _run_hormander,
    "lagrange": _run_lagrange,
    "mikhlin": _run_mikhlin,
    "mixed": _run_mixed,
    "relativistic": _run_relativistic,
    "beurling-identity": _run_beurling_identity,
    "lp-ratio": _run_lp_ratio,
    "weak-l1": _run_weak_l1,
    "subordination": _run_subordination,
    "projection": _run_projection,
}


def _resolved_config(args, command: str) -> dict:
    return {"command": command, "name": getattr(args, "name", None), "r": args.r, "p": args.p,
            "level": args.level, "default_levels": {str(k): v for k, v in DEFAULT_LEVEL.items()},
            "seed": args.seed, "paths": getattr(args, "paths", None)}


def _finish(reports, config, args, stdout) -> int:
    docs = [r.to_json() for r in reports]
    _emit({"config": config, "reports": docs}, args.json, stdout)
    for doc in docs:
        if not doc["pass"]:
            sys.stderr.write(f"check failed: {doc['check']} {json.dumps(doc['params'], default=_json_default)}\n")
            return EXIT_CHECK
    return EXIT_OK


def cmd_check(args, stdout) -> int:
    if args.name not in CHECK_RUNNERS:
        raise UsageError(f"unknown check {args.name!r}; choose from {', '.join(CHECK_NAMES)}")
    reports = CHECK_RUNNERS[args.name](args)
    return _finish(reports, _resolved_config(args, "check"), args, stdout)


def cmd_simulate(args, stdout) -> int:
    if args.model:
        try:
            model = JumpModel.from_json(_load_json_arg(args.model, "model"))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        model = _projection_setup()[1]
    if args.inp:
        if not os.path.isfile(args.inp):
            raise UsageError(f"input file not found: {args.inp}")
        try:
            f = read_gf01(args.inp)
        except GF01Error as exc:
            sys.stderr.write(f"{args.inp}: {exc}\n")
            return EXIT_GF01
    else:
        f = _projection_setup()[3]
    if f.spec.n != model.n:
        raise UsageError("model and field dimensions differ")
    paths = args.paths or 10_000
    batch = simulate_paths(model, args.T, paths, args.seed, f.spec, start="lattice")
    res = transform_terminal_values(batch, f, AngularModulator.harmonic() if model.n == 2 else np.ones(
        len(model.rates)), args.substeps)
    est = project_conditional(batch, res.transform, f.spec, args.min_per_bin)
    if args.out:
        write_gf01(args.out, est.as_field())
    violations = int(np.sum(res.qv_transform > res.qv_base))
    report = ck.CheckReport(
        "subordination", {"paths": paths, "seed": args.seed, "T": args.T, "substeps": args.substeps},
        float(violations), 0.0, 0.0, violations == 0,
        {"mean_jumps": float(batch.counts.mean()), "expected_jumps": model.total_rate * args.T,
         "usable_bins": int(est.usable.sum()), "bins": int(est.usable.size)})
    config = {"command": "simulate", "model": model.to_json(), "T": args.T, "paths": paths,
              "seed": args.seed, "substeps": args.substeps, "in": args.inp, "out": args.out}
    return _finish([report], config, args, stdout)


def cmd_report(args, stdout) -> int:
    if not args.inputs:
        raise UsageError("report needs at least one JSON report file")
    bundle = []
    for path in args.inputs:
        doc = _load_json_arg(path, "report")
        items = doc.get("reports", [doc]) if isinstance(doc, dict) else doc
        for item in items:
            if not isinstance(item, dict) or "check" not in item or "pass" not in item:
                raise UsageError(f"{path}: not a check report")
            bundle.append(dict(item, source=path))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["source", "check", "params", "measured", "reference", "tol", "pass"])
            for item in bundle:
                writer.writerow([item["source"], item["check"], json.dumps(item["params"], sort_keys=True),
                                 item["measured"], item["reference"], item["tol"], item["pass"]])
    summary = {"total": len(bundle), "passed": sum(bool(i["pass"]) for i in bundle)}
    _emit({"config": {"command": "report", "inputs": list(args.inputs), "csv": args.csv},
           "summary": summary, "reports": bundle}, args.json, stdout)
    failing = [i for i in bundle if not i["pass"]]
    if failing:
        sys.stderr.write(f"check failed: {failing[0]['check']} ({failing[0]['source']})\n")
        return EXIT_CHECK
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--r", type=float, help="exponent r (or α for relativistic checks)")
    common.add_argument("--p", type=float, help="Lebesgue exponent")
    common.add_argument("--level", type=int, help="sphere quadrature level")
    common.add_argument("--seed", type=int, default=0, help="random seed (recorded in outputs)")
    common.add_argument("--json", help="also write the JSON output to this path")

    parser = _Parser(prog="levymult", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sym = sub.add_parser("symbol", help="symbol operations")
    symsub = sym.add_subparsers(dest="action", parser_class=_Parser)
    ev = symsub.add_parser("eval", parents=[common], help="evaluate a symbol at frequencies")
    ev.add_argument("--symbol", required=True, help="descriptor JSON or path to it")
    ev.add_argument("--xi", action="append", help="frequency as comma-separated components (repeatable)")
    ev.add_argument("--xi-file", help="CSV file of frequencies")

    ap = sub.add_parser("apply", parents=[common], help="apply a multiplier to a GF01 field")
    ap.add_argument("--symbol", required=True)
    ap.add_argument("--in", dest="inp", required=True)
    ap.add_argument("--out", required=True)

    chk = sub.add_parser("check", parents=[common], help="run a named check matrix")
    chk.add_argument("name", help=f"one of: {', '.join(CHECK_NAMES)}")
    chk.add_argument("--paths", type=int, help="Monte Carlo path count for simulator checks")

    sim = sub.add_parser("simulate", parents=[common], help="simulate the jump martingale transform")
    sim.add_argument("--model", help="model JSON or path to it")
    sim.add_argument("--in", dest="inp", help="GF01 field (default: cos(2x+2y) on 64² grid)")
    sim.add_argument("--out", help="write the binned projection estimate as GF01")
    sim.add_argument("--paths", type=int)
    sim.add_argument("--T", type=float, default=1.2)
    sim.add_argument("--substeps", type=int, default=16)
    sim.add_argument("--min-per-bin", type=int, default=2)

    rep = sub.add_parser("report", parents=[common], help="bundle JSON check reports")
    rep.add_argument("inputs", nargs="*")
    rep.add_argument("--csv", help="write a plot-ready CSV table")
    return parser


def main(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command == "symbol" and getattr(args, "action", None) == "eval":
            return cmd_symbol_eval(args, stdout)
        if args.command == "apply":
            return cmd_apply(args, stdout)
        if args.command == "check":
            return cmd_check(args, stdout)
        if args.command == "simulate":
            return cmd_simulate(args, stdout)
        if args.command == "report":
            return cmd_report(args, stdout)
        raise UsageError("missing subcommand (symbol eval | apply | check | simulate | report)")
    except UsageError as exc:
        sys.stderr.write(f"levymult: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
