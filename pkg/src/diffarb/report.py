"""Classification report: one structured record of everything the engine
concluded about a model, serialisable to JSON and back without loss."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

from . import __version__
from .arbitrage import (ArbitrageReport, ComparisonFact, MarketAssumptions,
                        RiskConditions, analyze_market)
from .exponential import ZClassification, classify_Z
from .integrability import CAUCHY_REL_TOL, DEAD_ZONE, DIVERGENCE_CAP, MAX_LEVELS
from .expr import to_source
from .scale import (LOWER, UPPER, BoundaryReport, DiffusionModel, TiltSpec,
                    auxiliary_model, boundary_report, endpoint_good,
                    feller_explodes, market_tilt)
from .sim import CrosscheckFlag, EstimateSE, SimEstimates
from .verdict import Verdict

__all__ = ["ClassificationReport", "build_report", "report_to_dict",
           "report_from_dict", "report_to_json", "report_from_json",
           "render_text", "count_unknowns"]

MARKET_INTERVAL = (0.0, math.inf)


@dataclass(frozen=True)
class SimSection:
    estimates: SimEstimates
    eps_sensitivity: SimEstimates
    flags: tuple[CrosscheckFlag, ...]


@dataclass(frozen=True)
class ClassificationReport:
    model: dict
    boundaries_model: dict          # side -> BoundaryReport
    boundaries_companion: dict      # side -> BoundaryReport of the tilted companion
    z_classification: ZClassification
    arbitrage: ArbitrageReport | None
    assumptions: MarketAssumptions | None
    engine: dict
    sim: SimSection | None = None


def build_report(model: DiffusionModel, tilt: TiltSpec | None = None,
                 anchor: float | None = None, horizon: float | None = None,
                 form: str = "auto") -> ClassificationReport:
    """Run the full deterministic pipeline.  Market-level verdicts are
    attached when the state interval is (0, inf); finite-horizon verdicts
    never depend on the horizon, which is echoed for labelling only."""
    tilt = tilt if tilt is not None else market_tilt(model)
    aux = auxiliary_model(model, tilt)
    boundaries = {side: boundary_report(model, tilt, side, form, anchor)
                  for side in (LOWER, UPPER)}
    aux_boundaries = {}
    for side in (LOWER, UPPER):
        limit = aux.scale(anchor).s_limit(side)
        rep = BoundaryReport(
            endpoint=side,
            explodes=feller_explodes(aux, side, anchor),
            good=endpoint_good(model, tilt, side, form, anchor),
            s_finite=limit.finite,
            details={"s_limit": limit.value, "anchor": aux.scale(anchor).anchor},
        )
        rep.check_invariants()
        aux_boundaries[side] = rep
    market = tuple(model.interval) == MARKET_INTERVAL
    arb = analyze_market(model, anchor) if market else None
    model_echo = model.describe()
    model_echo["tilt"] = to_source(tilt.b)
    model_echo["tilt_label"] = tilt.label
    model_echo["horizon"] = horizon
    return ClassificationReport(
        model=model_echo,
        boundaries_model=boundaries,
        boundaries_companion=aux_boundaries,
        z_classification=classify_Z(model, tilt, anchor, form),
        arbitrage=arb,
        assumptions=arb.assumptions if arb else None,
        engine={
            "version": __version__,
            "anchor": model.scale(anchor).anchor,
            "form": form,
            "cauchy_rel_tol": CAUCHY_REL_TOL,
            "divergence_cap": DIVERGENCE_CAP,
            "max_levels": MAX_LEVELS,
            "dead_zone": DEAD_ZONE,
            "horizon_note": "finite-horizon verdicts do not depend on the horizon",
        },
        sim=None,
    )


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------

def report_to_dict(report: ClassificationReport) -> dict:
    return dataclasses.asdict(report)


def _verdict(d: dict) -> Verdict:
    return Verdict(**d)


def _boundary(d: dict) -> BoundaryReport:
    return BoundaryReport(endpoint=d["endpoint"], explodes=_verdict(d["explodes"]),
                          good=_verdict(d["good"]), s_finite=_verdict(d["s_finite"]),
                          details=dict(d["details"]))


def _estimate(d: dict) -> EstimateSE:
    return EstimateSE(**d)


def _sim_estimates(d: dict) -> SimEstimates:
    return SimEstimates(
        p_Z_positive=_estimate(d["p_Z_positive"]),
        mean_Z=_estimate(d["mean_Z"]),
        mean_ZY=_estimate(d["mean_ZY"]),
        p_explode_by_T=_estimate(d["p_explode_by_T"]),
        n_effective=d["n_effective"],
        boundary_eps=d["boundary_eps"],
        backend=d["backend"],
    )


def report_from_dict(d: dict) -> ClassificationReport:
    z = d["z_classification"]
    zc = ZClassification(**{k: _verdict(v) for k, v in z.items()})
    arb = None
    assumptions = None
    if d["arbitrage"] is not None:
        a = d["arbitrage"]
        assumptions = MarketAssumptions(**{k: _verdict(v)
                                           for k, v in a["assumptions"].items()})
        arb = ArbitrageReport(
            nflvr_finite_T=_verdict(a["nflvr_finite_T"]),
            nflvr_infinite=_verdict(a["nflvr_infinite"]),
            nga_finite_T=_verdict(a["nga_finite_T"]),
            nga_infinite=_verdict(a["nga_infinite"]),
            nra_finite_T=_verdict(a["nra_finite_T"]),
            conditions=RiskConditions(**{k: _verdict(v)
                                         for k, v in a["conditions"].items()}),
            assumptions=assumptions,
            comparison=tuple(ComparisonFact(f["name"], _verdict(f["lhs"]),
                                            _verdict(f["rhs"]))
                             for f in a["comparison"]),
        )
    sim = None
    if d.get("sim") is not None:
        s = d["sim"]
        sim = SimSection(
            estimates=_sim_estimates(s["estimates"]),
            eps_sensitivity=_sim_estimates(s["eps_sensitivity"]),
            flags=tuple(CrosscheckFlag(**f) for f in s["flags"]),
        )
    return ClassificationReport(
        model=dict(d["model"]),
        boundaries_model={k: _boundary(v) for k, v in d["boundaries_model"].items()},
        boundaries_companion={k: _boundary(v)
                              for k, v in d["boundaries_companion"].items()},
        z_classification=zc,
        arbitrage=arb,
        assumptions=assumptions,
        engine=dict(d["engine"]),
        sim=sim,
    )


def report_to_json(report: ClassificationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True)


def report_from_json(text: str) -> ClassificationReport:
    return report_from_dict(json.loads(text))


def count_unknowns(report: ClassificationReport) -> int:
    n = 0

    def walk(obj):
        nonlocal n
        if isinstance(obj, dict):
            if obj.get("value") == "unknown" and "method" in obj:
                n += 1
            for v in obj.values():
                walk(v)
        elif isinstance(obj, (list, tuple)):
            for v in obj:
                walk(v)

    walk(report_to_dict(report))
    return n


# --------------------------------------------------------------------------
# human-readable rendering
# --------------------------------------------------------------------------

def _fmt_verdict(v: Verdict | dict) -> str:
    if isinstance(v, dict):
        v = _verdict(v)
    return str(v)


def render_text(report: ClassificationReport) -> str:
    lines: list[str] = []
    m = report.model
    lines.append(f"model: dY = ({m['mu']}) dt + ({m['sigma']}) dW, "
                 f"Y0 = {m['x0']:g}, J = ({m['interval'][0]:g}, {m['interval'][1]:g})")
    if m.get("label"):
        lines.append(f"label: {m['label']}")
    lines.append(f"tilt b = {m['tilt']} [{m.get('tilt_label') or 'custom'}]")
    if m.get("horizon") is not None:
        lines.append(f"horizon: [0, {m['horizon']:g}]  "
                     "(all finite-horizon verdicts are horizon-free)")
    lines.append("")
    for title, reps in (("price diffusion", report.boundaries_model),
                        ("tilted companion", report.boundaries_companion)):
        lines.append(f"endpoints ({title}):")
        for side in (LOWER, UPPER):
            rep = reps[side]
            lines.append(f"  {side:5s}  scale limit {rep.details['s_limit']:g}; "
                         f"s finite: {rep.s_finite.value}")
            lines.append(f"         explodes: {_fmt_verdict(rep.explodes)}")
            lines.append(f"         good:     {_fmt_verdict(rep.good)}")
    lines.append("")
    zc = report.z_classification
    lines.append("density exponential Z:")
    lines.append(f"  strictly positive (any finite horizon): {_fmt_verdict(zc.strictly_positive_finite_T)}")
    lines.append(f"  limit positive:  {_fmt_verdict(zc.positive_at_infinity)}")
    lines.append(f"  limit zero:      {_fmt_verdict(zc.vanishes_at_infinity)}")
    lines.append(f"  martingale:      {_fmt_verdict(zc.martingale)}")
    lines.append(f"  tilt vanishes:   {_fmt_verdict(zc.b_is_null)}")
    if report.arbitrage is not None:
        arb = report.arbitrage
        lines.append("")
        lines.append("assumptions:")
        for name in ("A", "B", "C", "C_prime", "D", "D_prime"):
            lines.append(f"  {name:8s} {_fmt_verdict(getattr(arb.assumptions, name))}")
        lines.append("standing conditions:")
        rc = arb.conditions
        lines.append(f"  risk-sq-local      {_fmt_verdict(rc.risk_sq_local)}")
        lines.append(f"  weighted-risk-at-0 {_fmt_verdict(rc.risk_sq_weighted_0)}")
        lines.append(f"  origin-escape      {_fmt_verdict(rc.origin_escape)}")
        lines.append("no-arbitrage verdicts:")
        lines.append(f"  NFLVR [0,T]   {_fmt_verdict(arb.nflvr_finite_T)}")
        lines.append(f"  NFLVR [0,inf) {_fmt_verdict(arb.nflvr_infinite)}")
        lines.append(f"  NGA   [0,T]   {_fmt_verdict(arb.nga_finite_T)}")
        lines.append(f"  NGA   [0,inf) {_fmt_verdict(arb.nga_infinite)}")
        lines.append(f"  NRA   [0,T]   {_fmt_verdict(arb.nra_finite_T)}")
        if arb.comparison:
            lines.append("comparison facts:")
            for f in arb.comparison:
                status = {True: "consistent", False: "INCONSISTENT", None: "undecided"}[f.consistent]
                lines.append(f"  {f.name}: {status} "
                             f"(lhs {f.lhs.value}, rhs {f.rhs.value})")
    if report.sim is not None:
        s = report.sim
        lines.append("")
        lines.append(f"simulation ({s.estimates.backend}, eps={s.estimates.boundary_eps:g}):")
        e = s.estimates
        lines.append(f"  P(Z_T > 0)   = {e.p_Z_positive.value:.6f} +- {e.p_Z_positive.se:.2e}")
        lines.append(f"  E[Z_T]       = {e.mean_Z.value:.6f} +- {e.mean_Z.se:.2e}")
        lines.append(f"  E[Z_T Y_T]   = {e.mean_ZY.value:.6f} +- {e.mean_ZY.se:.2e}")
        lines.append(f"  P(exit <= T) = {e.p_explode_by_T.value:.6f} +- {e.p_explode_by_T.se:.2e}")
        a = s.eps_sensitivity
        lines.append(f"  eps sensitivity (eps={a.boundary_eps:g}): "
                     f"P(Z_T>0)={a.p_Z_positive.value:.6f}, E[Z_T]={a.mean_Z.value:.6f}, "
                     f"P(exit<=T)={a.p_explode_by_T.value:.6f}")
        if s.flags:
            lines.append("  crosscheck flags:")
            for f in s.flags:
                lines.append(f"    !! {f.describe()}")
        else:
            lines.append("  crosscheck: no disagreements")
    lines.append("")
    lines.append(f"engine {report.engine['version']}, anchor {report.engine['anchor']:g}")
    return "\n".join(lines)
