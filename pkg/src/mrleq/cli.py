"""Command-line front end.

Every subcommand writes one JSON document (or CSV for tabular outputs) to
``--out`` or stdout. Documents carry ``schema_version`` and echo the fully
resolved configuration under ``config``; ``argv_from_config`` turns that
back into an argument list that reproduces the run.

Exit codes: 0 success, 2 precondition / parse / certificate failure,
3 assertion failure in ``experiment`` or ``counterexample``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import comparative, equilibrium, oracle, orders, reliability
from ._serialize import SCHEMA_VERSION, dumps, write_atomic
from .distributions import from_spec
from .errors import MrleqError, SpecParseError

EXIT_OK, EXIT_PRECONDITION, EXIT_ASSERTION = 0, 2, 3

EXPERIMENTS = ("scale", "convolution", "closure", "variability", "normal", "st-sweep")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_PRECONDITION):
        super().__init__(message)
        self.code = code


def _load_spec(text: str, pointer: str) -> dict:
    """Inline JSON or ``@path``; returns the parsed spec (validated later)."""
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise SpecParseError(f"cannot read {text[1:]}: {e.strerror}", pointer) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"invalid JSON: {e.msg} at char {e.pos}", pointer) from None


def _dist(args, name: str = "dist"):
    raw = getattr(args, name, None)
    if raw is None:
        raise CliError(f"--{name} is required for {args.command}")
    spec = _load_spec(raw, "/" + name)
    return from_spec(spec, "/" + name), spec


# ---------------------------------------------------------------------------
# subcommands: each returns (payload, exit code) and may set args._csv
# ---------------------------------------------------------------------------

def cmd_solve(args, cfg):
    d, cfg["dist"] = _dist(args)
    res = equilibrium.solve_wholesale_price(d, tol=args.tol, grid_spec=args.grid_points)
    cert = reliability.check_property(d, "DGMRL", args.grid_points, "strict")
    return {"result": res.to_dict(), "dgmrl_certificate": cert.to_dict()}, EXIT_OK


def cmd_fundamentals(args, cfg):
    if args.alpha is None:
        raise CliError("--alpha is required for fundamentals")
    if args.r_star is not None:
        r_star = args.r_star
    else:
        d, cfg["dist"] = _dist(args)
        r_star = equilibrium.solve_wholesale_price(d, tol=args.tol).r_star
    out = equilibrium.fundamentals(r_star, args.alpha, args.n)
    return {"result": out.to_dict()}, EXIT_OK


def cmd_profile(args, cfg):
    d, cfg["dist"] = _dist(args)
    prof = reliability.profile(d, args.grid_points)
    if args.format == "csv":
        args._csv = prof.to_csv()
    return {"result": {"r": prof.grid, "mrl": prof.mrl, "gmrl": prof.gmrl,
                       "hazard": prof.hazard, "gfr": prof.gfr}}, EXIT_OK


def cmd_check_property(args, cfg):
    d, cfg["dist"] = _dist(args)
    v = reliability.check_property(d, args.property, args.grid_points, args.strictness, args.tol)
    return {"result": v.to_dict()}, EXIT_OK if v.certified else EXIT_PRECONDITION


def cmd_check_order(args, cfg):
    x1, cfg["dist"] = _dist(args)
    x2, cfg["dist2"] = _dist(args, "dist2")
    names = orders.ORDERS if args.order == "all" else (args.order,)
    verdicts = {o: orders.check_order(o, x1, x2).to_dict() for o in names}
    ok = all(v["holds"] for v in verdicts.values())
    return {"result": verdicts}, EXIT_OK if ok else EXIT_PRECONDITION


def cmd_oracle(args, cfg):
    d, cfg["dist"] = _dist(args)
    grid = oracle.default_price_grid(d, args.grid_points)
    r_hat, report = oracle.argmax_grid(d, args.n, grid)
    res = equilibrium.solve_wholesale_price(d, tol=args.tol)
    report.mc_estimates = oracle.monte_carlo_profits(d, res.r_star, args.n, args.samples, args.seed)
    report.deviation_max = oracle.lattice_audit()["deviation_max"]
    if args.format == "csv":
        args._csv = report.curve_csv()
    agree = abs(r_hat - res.r_star) <= report.grid_step
    payload = {"result": report.to_dict(), "solver_r_star": res.r_star,
               "within_one_grid_step": agree}
    return payload, EXIT_OK if agree and report.mc_estimates["within_4se"] else EXIT_ASSERTION


def _experiment(args, cfg):
    kind = args.name
    if kind == "scale":
        d, cfg["dist"] = _dist(args)
        return comparative.scale_experiment(d, args.c_values)
    if kind == "convolution":
        d, cfg["dist"] = _dist(args)
        z, cfg["dist2"] = _dist(args, "dist2")
        return comparative.convolution_experiment(d, z)
    if kind == "closure":
        x1, cfg["dist"] = _dist(args)
        x2, cfg["dist2"] = _dist(args, "dist2")
        z = from_spec(_load_spec(args.z, "/z"), "/z")
        phi = _load_spec(args.phi, "/phi")
        return comparative.closure_experiments(x1, x2, phi, z, args.p)
    if kind == "variability":
        x1, cfg["dist"] = _dist(args)
        x2, cfg["dist2"] = _dist(args, "dist2")
        return comparative.variability_experiments(x1, x2)
    if kind == "normal":
        if args.normal is None:
            raise CliError("--normal MU1 SIGMA1 MU2 SIGMA2 is required")
        return comparative.normal_family_experiment(*args.normal)
    return comparative.st_price_sweep()


def cmd_experiment(args, cfg):
    report = _experiment(args, cfg)
    return {"result": report.to_dict()}, EXIT_OK if report.ok else EXIT_ASSERTION


def cmd_counterexample(args, cfg):
    report = comparative.counterexample_reproduction(args.out)
    return {"result": report.to_dict()}, EXIT_OK if report.ok else EXIT_ASSERTION


def cmd_poa(args, cfg):
    return {"poa": equilibrium.poa(args.n)}, EXIT_OK


COMMANDS = {
    "solve": cmd_solve, "fundamentals": cmd_fundamentals, "profile": cmd_profile,
    "check-property": cmd_check_property, "check-order": cmd_check_order, "oracle": cmd_oracle,
    "experiment": cmd_experiment, "counterexample": cmd_counterexample, "poa": cmd_poa,
}

# options echoed into the config of each command (besides distribution specs)
ECHO = {
    "solve": ("n", "tol", "grid_points"),
    "fundamentals": ("n", "alpha", "r_star", "tol"),
    "profile": ("grid_points", "format"),
    "check-property": ("property", "strictness", "grid_points", "tol"),
    "check-order": ("order",),
    "oracle": ("n", "grid_points", "tol", "seed", "samples", "format"),
    "experiment": ("name", "c_values", "z", "phi", "p", "normal"),
    "counterexample": ("out",),
    "poa": ("n",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrleq", description="Wholesale price equilibria "
                                     "under mean-residual-life demand conditions.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (directory for counterexample); default stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    dist_help = "distribution spec: inline JSON or @file"
    p = add("solve", "solve r* = m(r*)")
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--tol", type=float, default=equilibrium.DEFAULT_TOL)
    p.add_argument("--grid-points", type=int, default=reliability.DEFAULT_GRID_POINTS)

    p = add("fundamentals", "realized market outcome for a demand level alpha")
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--r-star", type=float, help="use this price instead of solving --dist")
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--tol", type=float, default=equilibrium.DEFAULT_TOL)

    p = add("profile", "m, e, h and g on a grid")
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--grid-points", type=int, default=200)

    p = add("check-property", "DMRL / DGMRL / IFR / IGFR certificate")
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--property", choices=reliability.PROPERTIES, default="DGMRL")
    p.add_argument("--strictness", choices=("weak", "strict"), default="weak")
    p.add_argument("--grid-points", type=int, default=reliability.DEFAULT_GRID_POINTS)
    p.add_argument("--tol", type=float, default=reliability.MONOTONE_TOL)

    p = add("check-order", "stochastic order certificates for X1 = --dist, X2 = --dist2")
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--dist2", help=dist_help)
    p.add_argument("--order", choices=orders.ORDERS + ("all",), default="all")

    p = add("oracle", "grid argmax, Monte Carlo and Cournot audit")
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--grid-points", type=int, default=4000)
    p.add_argument("--tol", type=float, default=equilibrium.DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--samples", type=int, default=1_000_000)

    p = add("experiment", "comparative statics experiment")
    p.add_argument("--name", choices=EXPERIMENTS, required=True)
    p.add_argument("--dist", help=dist_help)
    p.add_argument("--dist2", help=dist_help)
    p.add_argument("--z", default='{"kind": "uniform", "a": 0, "b": 1}', help="Z for closure")
    p.add_argument("--phi", default='{"name": "power", "k": 2}', help="map spec for closure")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--c-values", type=float, nargs="+", default=[1.0, 1.5, 2.0, 5.0])
    p.add_argument("--normal", type=float, nargs=4, metavar=("MU1", "SIGMA1", "MU2", "SIGMA2"))

    add("counterexample", "reproduce the sinusoid-vs-exponential counterexample")

    p = add("poa", "price of anarchy 1 + 1/n")
    p.add_argument("--n", type=int, default=1)
    return parser


def resolved_config(args) -> dict:
    cfg = {"command": args.command}
    for key in ECHO[args.command]:
        val = getattr(args, key, None)
        if key in ("z", "phi") and val is not None:
            val = _load_spec(val, "/" + key)
        cfg[key] = val
    if "format" not in cfg:
        cfg["format"] = args.format
    return cfg


def argv_from_config(cfg: dict) -> list[str]:
    """Argument list reproducing a run from its echoed ``config``."""
    argv = [cfg["command"]]
    for key, val in cfg.items():
        if key == "command" or val is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, (dict, list)) and key in ("dist", "dist2", "z", "phi"):
            argv += [flag, json.dumps(val)]
        elif isinstance(val, list):
            argv += [flag] + [repr(float(v)) for v in val]
        elif isinstance(val, float):
            argv += [flag, repr(val)]
        else:
            argv += [flag, str(val)]
    return argv


def _emit(args, payload: dict) -> None:
    text = getattr(args, "_csv", None) or dumps(payload)
    if args.command == "counterexample":
        if args.out:
            write_atomic(os.path.join(args.out, "counterexample.json"), text)
        else:
            sys.stdout.write(text)
        return
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PRECONDITION if e.code else EXIT_OK
    args._csv = None
    try:
        cfg = resolved_config(args)
        payload, code = COMMANDS[args.command](args, cfg)
    except (CliError, MrleqError, ValueError) as e:
        code = e.code if isinstance(e, CliError) else EXIT_PRECONDITION
        print(f"mrleq {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return code
    doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": cfg}
    doc.update(payload)
    doc["exit_code"] = code
    _emit(args, doc)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
