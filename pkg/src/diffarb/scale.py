"""Scale density/function machinery and endpoint classification.

For a diffusion dY = mu(Y) dt + sigma(Y) dW on an open interval J = (l, r)
this module builds the scale density rho = exp(-int 2 mu / sigma^2) and the
scale function s = int rho, decides finiteness of s at the endpoints, runs
the explosion test at each endpoint, and classifies endpoints as good or bad
for a given exponential tilt b.

All verdicts prefer an exact route built on endpoint exponent arithmetic:
near an endpoint every quantity the tests need behaves like
coef * u**p * exp(theta * u**q), and products/quotients of such forms stay
in the family.  When the coefficients fall outside the representable family
the tests fall back to numeric quadrature of the actual scale data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .expr import (Add, Boundary, Div, EXACT, Expr, Mul, Neg, Num, Pow, Sub,
                   Var, asymptotics_at, compile_numpy, is_zero_expr, to_source)
from .integrability import (DEAD_ZONE, IntegrandSpec,
                            improper_integral_finite, loc_integrable_at_boundary,
                            loc_integrable_on_J, power_rule)
from .verdict import (NUMERIC, SYMBOLIC, Verdict, all_of, fails, holds, unknown)

__all__ = [
    "ModelError", "DiffusionModel", "TiltSpec", "market_tilt", "relative_tilt",
    "ScaleData", "build_scale", "auxiliary_model",
    "feller_explodes", "endpoint_good", "endpoint_bad_shortcut",
    "BoundaryReport", "boundary_report", "LOWER", "UPPER",
]

LOWER = ex.LOWER
UPPER = ex.UPPER

_GL8_NODES, _GL8_WEIGHTS = np.polynomial.legendre.leggauss(8)
_N_SEGMENTS = 512
_REL_TARGET = 1e-8   # relative closeness to finite endpoints
_ABS_TARGET = 1e8    # reach of the grid toward infinite endpoints


class ModelError(ValueError):
    """Model rejected by the construction gate."""


# --------------------------------------------------------------------------
# Diffusion model
# --------------------------------------------------------------------------

def _sigma_nonvanishing(sigma_fn, interval, x_scale) -> Verdict:
    from .integrability import _interior_grid
    grid = _interior_grid(interval[0], interval[1], x_scale)
    with np.errstate(all="ignore"):
        vals = np.asarray(sigma_fn(grid), dtype=np.float64)
    bad = ~np.isfinite(vals)
    if bad.any():
        x = float(grid[np.nonzero(bad)[0][0]])
        return fails(f"volatility not evaluable at x={x:.6g}", method=NUMERIC)
    if (vals == 0.0).any():
        x = float(grid[np.nonzero(vals == 0.0)[0][0]])
        return fails(f"volatility vanishes at x={x:.6g}", method=NUMERIC)
    sign = np.sign(vals)
    if (sign[1:] * sign[:-1] < 0).any():
        i = int(np.nonzero(sign[1:] * sign[:-1] < 0)[0][0])
        return fails(f"volatility changes sign between x={grid[i]:.6g} "
                     f"and x={grid[i + 1]:.6g}", method=NUMERIC)
    return holds("volatility nonzero on the scan grid", method=NUMERIC)


@dataclass(frozen=True)
class DiffusionModel:
    """Coefficients and state interval of the price diffusion.

    Construction enforces the well-posedness gate: sigma nonzero on J, and
    1/sigma^2, mu/sigma^2 locally integrable on J.  Models failing the gate
    are rejected with a diagnostic.
    """

    mu: Expr
    sigma: Expr
    x0: float
    interval: tuple[float, float] = (0.0, math.inf)
    label: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        l, r = self.interval
        if not (l < self.x0 < r):
            raise ModelError(f"x0={self.x0!r} outside the state interval ({l}, {r})")
        sigma_fn = compile_numpy(self.sigma)
        nonzero = _sigma_nonvanishing(sigma_fn, self.interval, self.x_scale)
        if nonzero.is_fails:
            raise ModelError(f"gate: {nonzero.note}")
        inv_var = compile_numpy(Div(Num(1.0), Pow(self.sigma, 2.0)))
        drift_ratio = compile_numpy(Div(self.mu, Pow(self.sigma, 2.0)))
        v1 = loc_integrable_on_J(inv_var, self.interval, self.x_scale)
        if v1.is_fails:
            raise ModelError(f"gate: 1/sigma^2 not locally integrable ({v1.note})")
        v2 = loc_integrable_on_J(drift_ratio, self.interval, self.x_scale)
        if v2.is_fails:
            raise ModelError(f"gate: mu/sigma^2 not locally integrable ({v2.note})")
        self._cache["gate"] = (nonzero, v1, v2)

    @property
    def x_scale(self) -> float:
        return max(abs(self.x0), 1.0)

    @property
    def gate_verdicts(self) -> tuple[Verdict, Verdict, Verdict]:
        """(sigma nonzero, 1/sigma^2 in L1_loc(J), mu/sigma^2 in L1_loc(J))."""
        return self._cache["gate"]

    def boundary(self, side: str) -> Boundary:
        l, r = self.interval
        return Boundary.lower_of(l, r) if side == LOWER else Boundary.upper_of(l, r)

    def drift_ratio_expr(self) -> Expr:
        """2*mu/sigma^2, the log-derivative of 1/rho."""
        return Mul(Num(2.0), Div(self.mu, Pow(self.sigma, 2.0)))

    def scale(self, anchor: float | None = None) -> "ScaleData":
        c = self.x0 if anchor is None else float(anchor)
        key = ("scale", c)
        if key not in self._cache:
            self._cache[key] = ScaleData(self, c)
        return self._cache[key]

    def describe(self) -> dict:
        return {
            "mu": to_source(self.mu),
            "sigma": to_source(self.sigma),
            "x0": self.x0,
            "interval": list(self.interval),
            "label": self.label,
        }


# --------------------------------------------------------------------------
# Exponential tilt
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TiltSpec:
    """The integrand b of the candidate density exponential.

    ``aux_drift`` optionally carries a pre-simplified drift mu + b*sigma for
    the companion diffusion; the market tilt sets it to the zero literal,
    because the cancellation mu + (-mu/sigma)*sigma = 0 is structural and
    not derivable from leading-order asymptotics alone.
    """

    b: Expr
    aux_drift: Expr | None = None
    label: str = ""

    def validate_for(self, model: DiffusionModel) -> Verdict:
        ratio = compile_numpy(Div(Pow(self.b, 2.0), Pow(model.sigma, 2.0)))
        v = loc_integrable_on_J(ratio, model.interval, model.x_scale)
        if v.is_fails:
            raise ModelError(f"tilt gate: b^2/sigma^2 not locally integrable ({v.note})")
        return v

    def b_squared_fn(self):
        return compile_numpy(Mul(self.b, self.b))


def market_tilt(model: DiffusionModel) -> TiltSpec:
    """Market-price-of-risk tilt b = -mu/sigma; companion diffusion is driftless."""
    t = TiltSpec(Neg(Div(model.mu, model.sigma)), aux_drift=Num(0.0), label="market")
    t.validate_for(model)
    return t


def relative_tilt(model: DiffusionModel) -> TiltSpec:
    """Tilt b = sigma/x - mu/sigma whose exponential is the wealth-ratio
    process times 1/x0; companion drift simplifies to sigma^2/x."""
    b = Sub(Div(model.sigma, Var()), Div(model.mu, model.sigma))
    aux = Div(Pow(model.sigma, 2.0), Var())
    t = TiltSpec(b, aux_drift=aux, label="relative")
    t.validate_for(model)
    return t


def auxiliary_model(model: DiffusionModel, tilt: TiltSpec) -> DiffusionModel:
    """Companion diffusion with drift mu + b*sigma and the same volatility."""
    drift = tilt.aux_drift if tilt.aux_drift is not None \
        else Add(model.mu, Mul(tilt.b, model.sigma))
    return DiffusionModel(drift, model.sigma, model.x0, model.interval,
                          label=f"{model.label or 'model'}~aux[{tilt.label or 'tilt'}]")


# --------------------------------------------------------------------------
# Endpoint behaviour algebra: coef * u**p * exp(theta * u**q)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerExp:
    coef: float          # may be nan when only the shape is known
    p: float
    theta: float = 0.0
    q: float = 0.0
    exact: bool = True

    def inv(self) -> "PowerExp":
        c = 1.0 / self.coef if self.coef and math.isfinite(self.coef) else math.nan
        return PowerExp(c, -self.p, -self.theta, self.q, self.exact)


_PE_ZERO = "pe-zero"


def _pe_mul(a, b, infinite: bool):
    if a is None or b is None:
        return None
    if a is _PE_ZERO or b is _PE_ZERO:
        return _PE_ZERO
    coef = a.coef * b.coef
    p = a.p + b.p
    exact = a.exact and b.exact
    if a.theta == 0.0:
        return PowerExp(coef, p, b.theta, b.q, exact)
    if b.theta == 0.0:
        return PowerExp(coef, p, a.theta, a.q, exact)
    if a.q == b.q:
        th = a.theta + b.theta
        if th == 0.0:
            return PowerExp(coef, p, 0.0, 0.0, exact)
        return PowerExp(coef, p, th, a.q, exact)
    # different exponential scales: the steeper one wins
    a_dominates = (a.q < b.q) if not infinite else (a.q > b.q)
    keep = a if a_dominates else b
    return PowerExp(coef, p, keep.theta, keep.q, exact)


def _pe_from_asym(asym) -> "PowerExp | str | None":
    if asym is None or not asym.usable:
        return None
    return PowerExp(asym.coefficient, asym.exponent, exact=asym.confidence == EXACT)


def _pe_square(pe):
    if pe is None or pe is _PE_ZERO:
        return pe
    return PowerExp(pe.coef * pe.coef, 2.0 * pe.p, 2.0 * pe.theta, pe.q, pe.exact)


def _pe_integrable(pe, infinite: bool) -> Verdict | None:
    """Convergence of the integral of the form toward its endpoint."""
    if pe is None:
        return None
    if pe is _PE_ZERO:
        return holds("integrand vanishes identically")
    active_exp = pe.theta != 0.0 and ((pe.q < 0.0) if not infinite else (pe.q > 0.0))
    if active_exp:
        if not pe.exact and abs(pe.theta) < 1e-9:
            return unknown("estimated exponential rate too close to zero")
        note = f"super-polynomial factor exp({pe.theta:.6g}*u^{pe.q:.6g})"
        method = SYMBOLIC if pe.exact else NUMERIC
        return holds(note, method=method) if pe.theta < 0 \
            else fails(note, method=method)
    return power_rule(pe.p, infinite, pe.exact)


# --------------------------------------------------------------------------
# Scale data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SLimit:
    value: float        # extended real: the limit of s at the endpoint
    finite: Verdict


class ScaleData:
    """rho and s on a geometric grid around the anchor, with endpoint limits.

    rho' = -(2 mu / sigma^2) rho and s' = rho are propagated outward from
    the anchor segment by segment (Gauss-Legendre within each segment), so
    the work is linear in the number of nodes.  The chain extends lazily
    when a caller asks for points beyond the initial reach.
    """

    def __init__(self, model: DiffusionModel, anchor: float):
        l, r = model.interval
        if not (l < anchor < r):
            raise ModelError(f"anchor {anchor!r} outside the state interval")
        self.model = model
        self.anchor = float(anchor)
        self._g = compile_numpy(model.drift_ratio_expr())
        self._g_is_zero = is_zero_expr(model.mu)
        self._sides: dict[str, dict] = {}
        self._limits: dict[str, SLimit] = {}

    # ---- grid construction ------------------------------------------------

    def _initial_nodes(self, side: str) -> np.ndarray:
        l, r = self.model.interval
        c = self.anchor
        endpoint = l if side == LOWER else r
        if math.isinf(endpoint):
            scale = max(abs(c), self.model.x_scale)
            d = np.geomspace(_REL_TARGET * scale, _ABS_TARGET * scale,
                             _N_SEGMENTS)
            nodes = c + d if endpoint > 0 else c - d
            return np.concatenate([[c], nodes])
        t = np.geomspace(1.0, _REL_TARGET, _N_SEGMENTS + 1)
        return endpoint - (endpoint - c) * t

    def _ensure_side(self, side: str) -> dict:
        if side not in self._sides:
            nodes = self._initial_nodes(side)
            h, s = self._propagate(nodes, 0.0, 0.0)
            self._sides[side] = {"nodes": nodes, "h": h, "s": s}
        return self._sides[side]

    def _propagate(self, nodes: np.ndarray, h0: float, s0: float):
        """Cumulative h = int g and s = int exp(-h) along a node chain."""
        a = nodes[:-1]
        b = nodes[1:]
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        outer = mid[:, None] + half[:, None] * _GL8_NODES[None, :]
        g_outer = self._eval_g(outer)
        dh = half * (g_outer @ _GL8_WEIGHTS)
        h = h0 + np.concatenate([[0.0], np.cumsum(dh)])
        # inner pass: h at the outer nodes themselves
        inner_half = 0.5 * (outer - a[:, None])
        inner_mid = 0.5 * (outer + a[:, None])
        inner = inner_mid[:, :, None] + inner_half[:, :, None] * _GL8_NODES[None, None, :]
        g_inner = self._eval_g(inner)
        h_at_outer = h[:-1, None] + inner_half * (g_inner @ _GL8_WEIGHTS)
        with np.errstate(over="ignore"):
            rho_outer = np.exp(-h_at_outer)
        ds = half * (rho_outer @ _GL8_WEIGHTS)
        s = s0 + np.concatenate([[0.0], np.cumsum(ds)])
        return h, s

    def _eval_g(self, pts: np.ndarray) -> np.ndarray:
        if self._g_is_zero:
            return np.zeros_like(pts)
        return self._g(pts)

    def _extend(self, side: str):
        data = self._ensure_side(side)
        nodes = data["nodes"]
        last = nodes[-1]
        endpoint = self.model.interval[0 if side == LOWER else 1]
        if math.isinf(endpoint):
            step = abs(last - self.anchor)
            new = last + np.sign(endpoint) * step * np.linspace(0.25, 1.0, 8)
        else:
            gap = endpoint - last
            new = last + gap * (1.0 - np.geomspace(1.0, 0.25, 9)[1:])
        h, s = self._propagate(np.concatenate([[last], new]),
                               data["h"][-1], data["s"][-1])
        data["nodes"] = np.concatenate([nodes, new])
        data["h"] = np.concatenate([data["h"], h[1:]])
        data["s"] = np.concatenate([data["s"], s[1:]])

    def _locate(self, x: np.ndarray):
        """Base node index, base h, base s for each query point."""
        lo = self._ensure_side(LOWER)
        hi = self._ensure_side(UPPER)
        xmin, xmax = float(np.min(x)), float(np.max(x))
        guard = 0
        while xmax > hi["nodes"][-1] and guard < 64:
            self._extend(UPPER)
            guard += 1
        guard = 0
        while xmin < lo["nodes"][-1] and guard < 64:
            self._extend(LOWER)
            guard += 1
        nodes = np.concatenate([lo["nodes"][::-1], hi["nodes"][1:]])
        h = np.concatenate([lo["h"][::-1], hi["h"][1:]])
        s = np.concatenate([lo["s"][::-1], hi["s"][1:]])
        idx = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, len(nodes) - 2)
        return nodes[idx], h[idx], s[idx]

    # ---- evaluation -------------------------------------------------------

    def log_rho(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        base_x, base_h, _ = self._locate(x)
        mid = 0.5 * (base_x + x)
        half = 0.5 * (x - base_x)
        pts = mid[:, None] + half[:, None] * _GL8_NODES[None, :]
        h = base_h + half * (self._eval_g(pts) @ _GL8_WEIGHTS)
        return -h

    def rho(self, x):
        """Scale density; strictly positive, rho(anchor) = 1."""
        with np.errstate(over="ignore"):
            out = np.exp(self.log_rho(x))
        return out if np.ndim(x) else float(out[0])

    def s(self, x):
        """Scale function, increasing, s(anchor) = 0."""
        xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
        base_x, base_h, base_s = self._locate(xa)
        mid = 0.5 * (base_x + xa)
        half = 0.5 * (xa - base_x)
        outer = mid[:, None] + half[:, None] * _GL8_NODES[None, :]
        inner_half = 0.5 * (outer - base_x[:, None])
        inner_mid = 0.5 * (outer + base_x[:, None])
        inner = inner_mid[:, :, None] + inner_half[:, :, None] * _GL8_NODES[None, None, :]
        h_at_outer = base_h[:, None] + inner_half * (self._eval_g(inner) @ _GL8_WEIGHTS)
        with np.errstate(over="ignore"):
            rho_outer = np.exp(-h_at_outer)
        out = base_s + half * (rho_outer @ _GL8_WEIGHTS)
        return out if np.ndim(x) else float(out[0])

    # ---- endpoint asymptotics --------------------------------------------

    def g_asym(self, side: str):
        """Leading power law of 2 mu / sigma^2 at the endpoint, or the zero
        marker for driftless models."""
        if self._g_is_zero:
            return _PE_ZERO
        asym = asymptotics_at(self.model.drift_ratio_expr(),
                              self.model.boundary(side))
        return _pe_from_asym(asym)

    def _orientation(self, side: str) -> float:
        """Sign of dh/du in the local endpoint variable."""
        b = self.model.boundary(side)
        if b.infinite:
            return 1.0 if (side == UPPER) else -1.0
        return 1.0 if side == LOWER else -1.0

    def rho_powexp(self, side: str):
        """Endpoint form of rho; None when outside the representable family."""
        g = self.g_asym(side)
        if g is _PE_ZERO:
            return PowerExp(1.0, 0.0)
        if g is None:
            return None
        sgn = self._orientation(side)
        infinite = self.model.boundary(side).infinite
        p1 = g.p + 1.0
        if not g.exact and abs(p1) < DEAD_ZONE:
            return None
        diverging = (p1 < 0.0) if not infinite else (p1 > 0.0)
        if p1 == 0.0:
            return PowerExp(math.nan, -sgn * g.coef, exact=g.exact)
        if diverging:
            return PowerExp(math.nan, 0.0, -sgn * g.coef / p1, p1, g.exact)
        return PowerExp(math.nan, 0.0, exact=g.exact)

    def _tail_spec(self, side: str) -> IntegrandSpec:
        """Integrand spec for the remaining mass of rho beyond the current
        chain end; records the chain end and its s value first, because the
        quadrature itself may extend the chain."""
        anchor_x = self._value_anchor(side)
        data = self._ensure_side(side)
        self._limits.setdefault(("s_base", side), float(data["s"][-1]))
        return IntegrandSpec(self.rho, self.model.boundary(side),
                             anchor_x=anchor_x)

    def s_limit_finite(self, side: str) -> Verdict:
        """Finiteness of the scale limit at the endpoint, without forcing
        the (more expensive) numeric value."""
        key = ("finite", side)
        if key not in self._limits:
            verdict = self._s_limit_symbolic(side)
            if verdict is None or verdict.is_unknown:
                numeric = improper_integral_finite(self._tail_spec(side))
                verdict = numeric.verdict
                self._limits[("tail", side)] = numeric.value
            self._limits[key] = verdict.cited(f"scale-limit({side})")
        return self._limits[key]

    def s_limit(self, side: str) -> SLimit:
        """Extended-real scale limit with its finiteness verdict."""
        key = ("limit", side)
        if key not in self._limits:
            verdict = self.s_limit_finite(side)
            tail = self._limits.get(("tail", side))
            if tail is None:
                if verdict.is_holds:
                    tail = improper_integral_finite(self._tail_spec(side)).value
                elif verdict.is_fails:
                    tail = math.inf
                else:
                    tail = math.nan
            self._limits[key] = SLimit(self._limit_value(side, tail), verdict)
        return self._limits[key]

    def _value_anchor(self, side: str) -> float:
        data = self._ensure_side(side)
        return float(data["nodes"][-1])

    def _limit_value(self, side: str, tail: float) -> float:
        sign = 1.0 if side == UPPER else -1.0
        if math.isinf(tail):
            return sign * math.inf
        if math.isnan(tail):
            return math.nan
        base = self._limits.get(("s_base", side))
        if base is None:
            base = float(self._ensure_side(side)["s"][-1])
        return base + sign * tail

    def _s_limit_symbolic(self, side: str) -> Verdict | None:
        pe = self.rho_powexp(side)
        v = _pe_integrable(pe, self.model.boundary(side).infinite)
        return v

    def s_tail_powexp(self, side: str):
        """Endpoint form of the gap between s and its (finite) limit:
        s(r) - s(x) at the upper endpoint, s(x) - s(l) at the lower one."""
        pe = self.rho_powexp(side)
        infinite = self.model.boundary(side).infinite
        v = _pe_integrable(pe, infinite)
        if pe is None or v is None or not v.is_holds:
            return None
        if pe.theta != 0.0 and ((pe.q < 0.0) if not infinite else (pe.q > 0.0)):
            coef = pe.coef / abs(pe.theta * pe.q)
            return PowerExp(coef, pe.p - pe.q + 1.0, pe.theta, pe.q, pe.exact)
        denom = abs(pe.p + 1.0)
        return PowerExp(pe.coef / denom if denom else math.nan,
                        pe.p + 1.0, exact=pe.exact)


def build_scale(model: DiffusionModel, anchor: float | None = None) -> ScaleData:
    """Scale data with both endpoint limits materialised."""
    sd = model.scale(anchor)
    sd.s_limit(LOWER)
    sd.s_limit(UPPER)
    return sd


# --------------------------------------------------------------------------
# Endpoint criteria
# --------------------------------------------------------------------------

def _sigma_sq_powexp(model: DiffusionModel, side: str):
    asym = asymptotics_at(model.sigma, model.boundary(side))
    return _pe_square(_pe_from_asym(asym))


def _b_sq_powexp(model: DiffusionModel, tilt: TiltSpec, side: str):
    if is_zero_expr(tilt.b):
        return _PE_ZERO
    return _pe_square(_pe_from_asym(asymptotics_at(tilt.b, model.boundary(side))))


def _weighted_tail_integrable(host: DiffusionModel, sd: ScaleData, side: str,
                              weight_pe, weight_fn) -> Verdict:
    """Integrability at the endpoint of  (gap of s) * weight / (rho sigma^2),
    where the gap is taken against the finite s-limit on that side."""
    boundary = host.boundary(side)
    if weight_pe is _PE_ZERO:
        return holds("tilt vanishes: weighted tail integrand is zero")
    tail_pe = sd.s_tail_powexp(side)
    rho_pe = sd.rho_powexp(side)
    sig_pe = _sigma_sq_powexp(host, side)
    if tail_pe is not None and rho_pe is not None and sig_pe is not None \
            and weight_pe is not None:
        combo = _pe_mul(tail_pe, rho_pe.inv(), boundary.infinite)
        combo = _pe_mul(combo, sig_pe.inv(), boundary.infinite)
        combo = _pe_mul(combo, weight_pe, boundary.infinite)
        v = _pe_integrable(combo, boundary.infinite)
        if v is not None and not v.is_unknown:
            return v
    # numeric fallback against the materialised scale data
    limit = sd.s_limit(side)
    if not limit.finite.is_holds or not math.isfinite(limit.value):
        return unknown("no usable endpoint form and no finite scale limit value")
    sigma_fn = compile_numpy(host.sigma)

    def integrand(x):
        with np.errstate(all="ignore"):
            gap = np.abs(limit.value - sd.s(x))
            return gap * weight_fn(x) / (sd.rho(x) * sigma_fn(x) ** 2)

    spec = IntegrandSpec(integrand, boundary, anchor_x=sd._value_anchor(side))
    return loc_integrable_at_boundary(spec)


def feller_explodes(model: DiffusionModel, side: str,
                    anchor: float | None = None) -> Verdict:
    """Does the diffusion reach this endpoint in finite time with positive
    probability?  Holds means it does."""
    sd = model.scale(anchor)
    cite = f"explosion-test({side})"
    finite = sd.s_limit_finite(side)
    if finite.is_fails:
        return fails(f"scale limit infinite toward {side} endpoint",
                     method=finite.method).cited(cite)
    one = PowerExp(1.0, 0.0)
    tail_ok = _weighted_tail_integrable(model, sd, side, one, lambda x: 1.0)
    return all_of(finite, tail_ok).cited(cite)


def endpoint_good(model: DiffusionModel, tilt: TiltSpec, side: str,
                  form: str = "auto", anchor: float | None = None) -> Verdict:
    """Good/bad endpoint classification for the tilt b.

    ``form`` selects which diffusion carries the scale data in the test:
    "direct" uses the model itself, "aux" the companion diffusion with
    drift mu + b*sigma, and "auto" prefers the companion whenever the tilt
    provides a simplified companion drift.
    """
    if form == "auto":
        form = "aux" if tilt.aux_drift is not None else "direct"
    if form == "aux":
        host = auxiliary_model(model, tilt)
    elif form == "direct":
        host = model
    else:
        raise ValueError(f"unknown form {form!r}")
    sd = host.scale(anchor)
    cite = f"good-endpoint({side},{form})"
    finite = sd.s_limit_finite(side)
    if finite.is_fails:
        return fails(f"scale limit infinite toward {side} endpoint",
                     method=finite.method).cited(cite)
    b_pe = _b_sq_powexp(model, tilt, side)
    b_sq = tilt.b_squared_fn()
    tail_ok = _weighted_tail_integrable(host, sd, side, b_pe, b_sq)
    return all_of(finite, tail_ok).cited(cite)


def endpoint_bad_shortcut(model: DiffusionModel, tilt: TiltSpec, side: str,
                          anchor: float | None = None) -> Verdict:
    """Holds when the endpoint is certainly bad because exactly one of the
    model and its companion diffusion explodes there.  Unknown otherwise;
    this shortcut has no converse."""
    own = feller_explodes(model, side, anchor)
    aux = feller_explodes(auxiliary_model(model, tilt), side, anchor)
    cite = f"bad-endpoint-shortcut({side})"
    if own.is_unknown or aux.is_unknown:
        return unknown("explosion behaviour not decided on both diffusions").cited(cite)
    if own.value != aux.value:
        return holds(f"exactly one diffusion explodes at the {side} endpoint "
                     f"(model: {own.value}, companion: {aux.value})").cited(cite)
    return unknown("both diffusions agree; shortcut is silent").cited(cite)


# --------------------------------------------------------------------------
# Per-endpoint report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryReport:
    endpoint: str
    explodes: Verdict
    good: Verdict
    s_finite: Verdict
    details: dict

    def check_invariants(self):
        if self.good.is_holds:
            assert self.s_finite.is_holds, "good endpoint without finite scale limit"
        if self.explodes.is_holds:
            assert self.s_finite.is_holds, "explosion without finite scale limit"


def boundary_report(model: DiffusionModel, tilt: TiltSpec, side: str,
                    form: str = "auto", anchor: float | None = None) -> BoundaryReport:
    sd = model.scale(anchor)
    limit = sd.s_limit(side)
    rep = BoundaryReport(
        endpoint=side,
        explodes=feller_explodes(model, side, anchor),
        good=endpoint_good(model, tilt, side, form, anchor),
        s_finite=limit.finite,
        details={
            "s_limit": limit.value,
            "anchor": sd.anchor,
        },
    )
    rep.check_invariants()
    return rep
