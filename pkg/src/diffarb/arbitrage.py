"""Market-level no-arbitrage verdicts for diffusions on (0, inf).

Three notions are decided from the coefficients alone: NFLVR (equivalent
local martingale measure exists), NGA (equivalent measure making the price
a true, on the unbounded horizon uniformly integrable, martingale), and NRA
(no wealth process beating the stock itself).  Every verdict names the
assumptions it used; verdicts whose assumptions are not established are
reported as unknown rather than silently computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .expr import Div, Expr, Mul, Pow, Var, asymptotics_at, compile_numpy
from .integrability import IntegrandSpec, loc_integrable_at_boundary, loc_integrable_on_J
from .scale import LOWER, UPPER, DiffusionModel, ModelError, feller_explodes
from .verdict import Verdict, all_of, fails, holds, negate, unknown

__all__ = [
    "MarketAssumptions", "RiskConditions", "ArbitrageReport",
    "market_assumptions", "risk_conditions",
    "nflvr_finite_horizon", "nflvr_infinite_horizon",
    "nra_finite_horizon", "nga_finite_horizon", "nga_infinite_horizon",
    "nra_martingale_route", "explosion_dichotomy_check", "analyze_market",
]

MARKET_INTERVAL = (0.0, math.inf)


def _require_market(model: DiffusionModel):
    if tuple(model.interval) != MARKET_INTERVAL:
        raise ModelError("market-level verdicts are defined on the state "
                         f"interval (0, inf); got {model.interval}")


def _boundary_integrable(model: DiffusionModel, f: Expr, side: str,
                         anchor: float | None = None) -> Verdict:
    b = model.boundary(side)
    spec = IntegrandSpec(compile_numpy(f), b, asymptotics_at(f, b),
                         anchor_x=model.x0 if anchor is None else anchor)
    return loc_integrable_at_boundary(spec)


def _risk_sq_expr(model: DiffusionModel) -> Expr:
    return Div(Pow(model.mu, 2.0), Pow(model.sigma, 4.0))


def _time_ratio_expr(model: DiffusionModel) -> Expr:
    return Div(Var(), Pow(model.sigma, 2.0))


# --------------------------------------------------------------------------
# Assumptions and standing conditions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MarketAssumptions:
    """Standing assumptions: the well-posedness gate (A)-(C), the stronger
    square-integrability (C'), and the non-explosion requirements (D)/(D')."""

    A: Verdict        # sigma nonzero on J
    B: Verdict        # 1/sigma^2 locally integrable on J
    C: Verdict        # mu/sigma^2 locally integrable on J
    C_prime: Verdict  # mu^2/sigma^4 locally integrable on J
    D: Verdict        # no explosion at infinity
    D_prime: Verdict  # no explosion at either endpoint

    def first_failure(self, names) -> str | None:
        for name in names:
            if not getattr(self, name).is_holds:
                return name
        return None


@dataclass(frozen=True)
class RiskConditions:
    """The three integrability conditions the arbitrage criteria consume."""

    risk_sq_local: Verdict       # mu^2/sigma^4 in L1_loc(J)
    risk_sq_weighted_0: Verdict  # x*mu^2/sigma^4 integrable at 0+
    origin_escape: Verdict       # x/sigma^2 NOT integrable at 0+


def market_assumptions(model: DiffusionModel,
                       anchor: float | None = None) -> MarketAssumptions:
    _require_market(model)
    a, b, c = model.gate_verdicts
    c_prime = loc_integrable_on_J(compile_numpy(_risk_sq_expr(model)),
                                  model.interval, model.x_scale)
    no_up = negate(feller_explodes(model, UPPER, anchor))
    no_lo = negate(feller_explodes(model, LOWER, anchor))
    return MarketAssumptions(
        A=a.cited("assume:vol-nonzero"),
        B=b.cited("assume:inv-var-local"),
        C=c.cited("assume:drift-ratio-local"),
        C_prime=c_prime.cited("assume:risk-sq-local"),
        D=no_up.cited("assume:no-explosion-up"),
        D_prime=all_of(no_lo, no_up).cited("assume:no-explosion"),
    )


def risk_conditions(model: DiffusionModel,
                    anchor: float | None = None) -> RiskConditions:
    """Verdicts for the three standing integrability conditions."""
    _require_market(model)
    risk_sq = _risk_sq_expr(model)
    weighted = Mul(Var(), risk_sq)
    time_ratio = _time_ratio_expr(model)
    return RiskConditions(
        risk_sq_local=loc_integrable_on_J(
            compile_numpy(risk_sq), model.interval,
            model.x_scale).cited("cond:risk-sq-local"),
        risk_sq_weighted_0=_boundary_integrable(
            model, weighted, LOWER, anchor).cited("cond:weighted-risk-at-0"),
        origin_escape=negate(_boundary_integrable(
            model, time_ratio, LOWER, anchor)).cited("cond:origin-escape"),
    )


def _gated_unknown(which: str, cite: str) -> Verdict:
    return unknown(f"assumption ({which}) not established; "
                   "criterion not applicable", cite=cite)


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------

def nflvr_finite_horizon(model: DiffusionModel, anchor: float | None = None,
                         assumptions: MarketAssumptions | None = None,
                         conditions: RiskConditions | None = None) -> Verdict:
    """No free lunch with vanishing risk on a finite horizon.  The criterion
    is horizon-free: either the risk conditions hold down to the origin, or
    the origin-escape condition holds and the price never reaches zero."""
    cite = "nflvr-finite"
    am = assumptions or market_assumptions(model, anchor)
    failed = am.first_failure(("A", "B", "C", "D"))
    if failed:
        return _gated_unknown(failed, cite)
    rc = conditions or risk_conditions(model, anchor)
    no_explosion_0 = negate(feller_explodes(model, LOWER, anchor))
    route_a = all_of(rc.risk_sq_local, rc.risk_sq_weighted_0)
    route_b = all_of(rc.risk_sq_local, rc.origin_escape, no_explosion_0)
    if route_a.is_holds:
        return holds("route (a): risk conditions hold down to the origin",
                     method=route_a.method, cite=cite)
    if route_b.is_holds:
        return holds("route (b): origin-escape holds and the price never "
                     "reaches zero", method=route_b.method, cite=cite)
    if route_a.is_unknown or route_b.is_unknown:
        return unknown("neither route decided", cite=cite)
    return fails("both routes fail", method=route_a.method, cite=cite)


def nflvr_infinite_horizon(model: DiffusionModel, anchor: float | None = None,
                           assumptions: MarketAssumptions | None = None,
                           conditions: RiskConditions | None = None) -> Verdict:
    """NFLVR on the unbounded horizon: risk conditions plus an infinite
    scale limit toward infinity."""
    cite = "nflvr-infinite"
    am = assumptions or market_assumptions(model, anchor)
    failed = am.first_failure(("A", "B", "C", "D"))
    if failed:
        return _gated_unknown(failed, cite)
    rc = conditions or risk_conditions(model, anchor)
    s_inf_infinite = negate(model.scale(anchor).s_limit_finite(UPPER))
    return all_of(rc.risk_sq_local, rc.risk_sq_weighted_0,
                  s_inf_infinite).cited(cite)


def nra_finite_horizon(model: DiffusionModel, anchor: float | None = None,
                       assumptions: MarketAssumptions | None = None) -> Verdict:
    """No relative arbitrage on a finite horizon: x/sigma^2 must fail to be
    integrable toward infinity."""
    cite = "nra-finite"
    am = assumptions or market_assumptions(model, anchor)
    failed = am.first_failure(("A", "B", "C_prime", "D_prime"))
    if failed:
        return _gated_unknown(failed, cite)
    return negate(_boundary_integrable(model, _time_ratio_expr(model),
                                       UPPER, anchor)).cited(cite)


def nga_finite_horizon(model: DiffusionModel, anchor: float | None = None,
                       assumptions: MarketAssumptions | None = None,
                       conditions: RiskConditions | None = None) -> Verdict:
    """No generalised arbitrage on a finite horizon: NFLVR together with
    the non-integrability of x/sigma^2 toward infinity.

    When the NFLVR verdict is unknown the result stays unknown even if the
    second conjunct fails: the criterion presupposes the NFLVR
    characterisation, so nothing is concluded from the tail condition alone.
    """
    cite = "nga-finite"
    am = assumptions or market_assumptions(model, anchor)
    failed = am.first_failure(("A", "B", "C", "D"))
    if failed:
        return _gated_unknown(failed, cite)
    nflvr = nflvr_finite_horizon(model, anchor, am, conditions)
    if nflvr.is_unknown:
        return unknown("NFLVR undetermined", cite=cite)
    tail = negate(_boundary_integrable(model, _time_ratio_expr(model),
                                       UPPER, anchor))
    return all_of(nflvr, tail).cited(cite)


def nga_infinite_horizon(model: DiffusionModel, anchor: float | None = None,
                         assumptions: MarketAssumptions | None = None) -> Verdict:
    """Generalised arbitrage always exists on the unbounded horizon: the
    driftless companion can never be a uniformly integrable martingale."""
    cite = "nga-infinite"
    am = assumptions or market_assumptions(model, anchor)
    failed = am.first_failure(("A", "B", "C", "D"))
    if failed:
        return _gated_unknown(failed, cite)
    return fails("no equivalent measure makes the price uniformly "
                 "integrable on [0, inf)", cite=cite)


def nra_martingale_route(model: DiffusionModel,
                         anchor: float | None = None) -> Verdict:
    """Internal cross-check for the NRA verdict: the relative-arbitrage
    quantity is itself the exponential of the relative tilt, and NRA holds
    exactly when that exponential is a true martingale.  Must agree with
    the direct tail criterion on any model where both are decided."""
    from .exponential import classify_Z_martingale
    from .scale import relative_tilt
    _require_market(model)
    return classify_Z_martingale(model, relative_tilt(model),
                                 anchor).cited("nra-martingale-route")


def explosion_dichotomy_check(model: DiffusionModel,
                              anchor: float | None = None,
                              conditions: RiskConditions | None = None) -> Verdict:
    """Diagnostic consistency check: whenever both risk conditions hold,
    exactly one of {origin-escape with no explosion at 0, its negation with
    explosion at 0} must hold.  A Fails here signals an engine bug."""
    cite = "dichotomy-check"
    rc = conditions or risk_conditions(model, anchor)
    hypothesis = all_of(rc.risk_sq_local, rc.risk_sq_weighted_0)
    if not hypothesis.is_holds:
        return unknown("hypothesis not met", cite=cite)
    explode_0 = feller_explodes(model, LOWER, anchor)
    branch_i = all_of(rc.origin_escape, negate(explode_0))
    branch_ii = all_of(negate(rc.origin_escape), explode_0)
    if branch_i.is_unknown or branch_ii.is_unknown:
        return unknown("one branch undecided", cite=cite)
    if branch_i.is_holds != branch_ii.is_holds:
        return holds("dichotomy confirmed", cite=cite)
    return fails("dichotomy violated: engine inconsistency", cite=cite)


# --------------------------------------------------------------------------
# Assembled report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonFact:
    name: str
    lhs: Verdict
    rhs: Verdict

    @property
    def consistent(self) -> bool | None:
        if self.lhs.is_unknown or self.rhs.is_unknown:
            return None
        return self.lhs.value == self.rhs.value


@dataclass(frozen=True)
class ArbitrageReport:
    nflvr_finite_T: Verdict
    nflvr_infinite: Verdict
    nga_finite_T: Verdict
    nga_infinite: Verdict
    nra_finite_T: Verdict
    conditions: RiskConditions
    assumptions: MarketAssumptions
    comparison: tuple[ComparisonFact, ...]


def analyze_market(model: DiffusionModel, anchor: float | None = None) -> ArbitrageReport:
    """All market verdicts plus the cross-notion comparison facts that hold
    under the stronger assumptions (C') and (D')."""
    am = market_assumptions(model, anchor)
    rc = risk_conditions(model, anchor)
    nflvr = nflvr_finite_horizon(model, anchor, am, rc)
    nra = nra_finite_horizon(model, anchor, am)
    nga = nga_finite_horizon(model, anchor, am, rc)
    comparison = ()
    if am.C_prime.is_holds and am.D_prime.is_holds:
        tail = negate(_boundary_integrable(model, _time_ratio_expr(model),
                                           UPPER, anchor))
        comparison = (
            ComparisonFact("nflvr-iff-origin-escape", nflvr, rc.origin_escape),
            ComparisonFact("nra-iff-tail-escape", nra, tail),
            ComparisonFact("nga-iff-nflvr-and-nra", nga, all_of(nflvr, nra)),
        )
    return ArbitrageReport(
        nflvr_finite_T=nflvr,
        nflvr_infinite=nflvr_infinite_horizon(model, anchor, am, rc),
        nga_finite_T=nga,
        nga_infinite=nga_infinite_horizon(model, anchor, am),
        nra_finite_T=nra,
        conditions=rc,
        assumptions=am,
        comparison=comparison,
    )
