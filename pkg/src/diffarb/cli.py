"""Command-line front end.

Subcommands:
  analyze   classify a model file, print the report (text or json)
  simulate  Monte Carlo cross-check of the deterministic report
  table1    sweep the built-in elasticity family against its closed-form
            classification rules

Exit codes: 0 fully determined, 1 input/gate error, 2 some consumed verdict
is unknown, 3 a simulation crosscheck flag fired.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

from . import integrability
from .cev import cev_model, cev_rules, table_grid
from .expr import ParseError, parse
from .exponential import classify_Z
from .report import (ClassificationReport, SimSection, build_report,
                     count_unknowns, render_text, report_to_json)
from .scale import DiffusionModel, ModelError, TiltSpec, market_tilt
from .sim import SimConfig, SimulationError, crosscheck, simulate

__all__ = ["main", "load_model_file", "ModelFileError"]


class ModelFileError(ValueError):
    pass


_INF_TOKENS = {"inf": math.inf, "+inf": math.inf, "infinity": math.inf,
               "-inf": -math.inf, "-infinity": -math.inf}


def _parse_interval(text: str, path: str, lineno: int) -> tuple[float, float]:
    raw = text.strip().strip("()[]").replace(",", " ").split()
    if len(raw) != 2:
        raise ModelFileError(f"{path}:{lineno}: interval needs two endpoints, "
                             f"got {text!r}")
    out = []
    for tok in raw:
        t = tok.strip().lower()
        if t in _INF_TOKENS:
            out.append(_INF_TOKENS[t])
        else:
            try:
                out.append(float(t))
            except ValueError:
                raise ModelFileError(f"{path}:{lineno}: bad endpoint {tok!r}") from None
    return out[0], out[1]


def load_model_file(path: str) -> tuple[DiffusionModel, TiltSpec, float | None]:
    """Plain key = value text format; keys mu, sigma, x0 are required,
    interval defaults to (0, inf), tilt defaults to the market tilt."""
    fields: dict[str, tuple[str, int]] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                body = line.split("#", 1)[0].strip()
                if not body:
                    continue
                if "=" not in body:
                    raise ModelFileError(f"{path}:{lineno}: expected 'key = value'")
                key, value = body.split("=", 1)
                key = key.strip().lower()
                if key not in {"mu", "sigma", "x0", "interval", "tilt",
                               "horizon", "label"}:
                    raise ModelFileError(f"{path}:{lineno}: unknown key {key!r}")
                fields[key] = (value.strip(), lineno)
    except OSError as exc:
        raise ModelFileError(f"{path}: {exc}") from None

    for key in ("mu", "sigma", "x0"):
        if key not in fields:
            raise ModelFileError(f"{path}: missing required key {key!r}")

    def expr_field(key):
        text, lineno = fields[key]
        try:
            return parse(text)
        except ParseError as exc:
            raise ModelFileError(f"{path}:{lineno}: {key}: {exc}") from None

    mu = expr_field("mu")
    sigma = expr_field("sigma")
    try:
        x0 = float(fields["x0"][0])
    except ValueError:
        raise ModelFileError(f"{path}:{fields['x0'][1]}: bad x0") from None
    interval = (0.0, math.inf)
    if "interval" in fields:
        text, lineno = fields["interval"]
        interval = _parse_interval(text, path, lineno)
    horizon = None
    if "horizon" in fields:
        try:
            horizon = float(fields["horizon"][0])
        except ValueError:
            raise ModelFileError(f"{path}:{fields['horizon'][1]}: bad horizon") from None
        if horizon <= 0:
            raise ModelFileError(f"{path}: horizon must be positive")
    label = fields.get("label", ("", 0))[0]

    try:
        model = DiffusionModel(mu, sigma, x0, interval, label=label)
    except ModelError as exc:
        raise ModelFileError(f"{path}: {exc}") from None

    tilt_text = fields.get("tilt", ("market", 0))[0]
    if tilt_text.strip().lower() == "market":
        tilt = market_tilt(model)
    else:
        b = expr_field("tilt")
        tilt = TiltSpec(b, label="custom")
        try:
            tilt.validate_for(model)
        except ModelError as exc:
            raise ModelFileError(f"{path}: {exc}") from None
    return model, tilt, horizon


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _emit(report: ClassificationReport, fmt: str):
    if fmt == "json":
        print(report_to_json(report))
    else:
        print(render_text(report))


def cmd_analyze(args) -> int:
    if args.tolerance is not None:
        integrability.CAUCHY_REL_TOL = args.tolerance
    try:
        model, tilt, horizon = load_model_file(args.model)
        report = build_report(model, tilt, anchor=args.anchor, horizon=horizon)
    except (ModelFileError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(report, args.format)
    return 2 if count_unknowns(report) else 0


def cmd_simulate(args) -> int:
    try:
        model, tilt, horizon = load_model_file(args.model)
        report = build_report(model, tilt, anchor=None, horizon=args.horizon or horizon)
    except (ModelFileError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    horizon = args.horizon or horizon or 1.0
    config = SimConfig(n_paths=args.paths, dt=args.dt, horizon=horizon,
                       seed=args.seed, boundary_eps=args.eps,
                       upper_cap=args.cap, antithetic=args.antithetic)
    try:
        est = simulate(model, tilt, config, backend=args.backend)
        alt = dataclasses.replace(
            config, boundary_eps=10.0 * config.resolved_eps(model.x0))
        est_alt = simulate(model, tilt, alt, backend=args.backend)
    except (SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    flags = crosscheck(report, est, z_level=args.z_level)
    report = dataclasses.replace(
        report, sim=SimSection(estimates=est, eps_sensitivity=est_alt,
                               flags=tuple(flags)))
    _emit(report, args.format)
    if flags:
        return 3
    return 2 if count_unknowns(report) else 0


def cmd_table1(args) -> int:
    rows = []
    all_match = True
    for alpha, beta, mu0, sigma0 in table_grid():
        model = cev_model(alpha, beta, mu0, sigma0)
        z = classify_Z(model, market_tilt(model))
        rules = cev_rules(alpha, beta, mu0, sigma0)
        got = {
            "z_positive": z.strictly_positive_finite_T.value,
            "z_limit_positive": z.positive_at_infinity.value,
            "z_limit_zero": z.vanishes_at_infinity.value,
        }
        want = {
            "z_positive": "holds" if rules.z_positive else "fails",
            "z_limit_positive": "holds" if rules.z_limit_positive else "fails",
            "z_limit_zero": "holds" if rules.z_limit_zero else "fails",
        }
        match = got == want
        all_match &= match
        rows.append({"alpha": alpha, "beta": beta, "mu0": mu0, "sigma0": sigma0,
                     "engine": got, "rule": want, "match": match})
    if args.format == "json":
        print(json.dumps({"cells": rows, "all_match": all_match},
                         indent=2, sort_keys=True))
    else:
        print(f"{'alpha':>6} {'beta':>6} {'mu0':>6} {'sigma0':>7}   "
              f"{'Z>0':>12} {'Z_inf>0':>12} {'Z_inf=0':>12}  ok")
        for r in rows:
            def cell(key):
                mark = "" if r["engine"][key] == r["rule"][key] else "*"
                return f"{r['engine'][key]}{mark}"
            print(f"{r['alpha']:>6g} {r['beta']:>6g} {r['mu0']:>6g} "
                  f"{r['sigma0']:>7g}   {cell('z_positive'):>12} "
                  f"{cell('z_limit_positive'):>12} {cell('z_limit_zero'):>12}  "
                  f"{'yes' if r['match'] else 'NO'}")
        print(f"\n{len(rows)} cells, all match: {'yes' if all_match else 'NO'}")
    return 0 if all_match else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="diffarb",
        description="No-arbitrage classification of one-dimensional "
                    "diffusion price models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify a model file")
    p.add_argument("model", help="path to the model file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--anchor", type=float, default=None,
                   help="scale anchor (default: x0)")
    p.add_argument("--tolerance", type=float, default=None,
                   help="relative Cauchy tolerance of the numeric route")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo cross-check")
    p.add_argument("model")
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--eps", type=float, default=None,
                   help="absorption proxy distance (default x0*1e-4)")
    p.add_argument("--cap", type=float, default=None,
                   help="upper absorption level standing in for infinity")
    p.add_argument("--backend", choices=("numba", "numpy"), default=None)
    p.add_argument("--z-level", type=float, default=3.0)
    p.add_argument("--antithetic", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("table1",
                       help="sweep the built-in elasticity family against "
                            "its closed-form classification rules")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_table1)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
