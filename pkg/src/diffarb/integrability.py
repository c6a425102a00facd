"""Local integrability of nonnegative integrands near an interval endpoint.

This is the primitive every classification criterion reduces to: membership
in L1_loc near one boundary, membership in L1_loc of the whole open interval
(no interior non-integrable singularities), and finiteness of the improper
integral up to a boundary together with its value.

Decision routes:
  * symbolic, when an exact power-law exponent at the endpoint is known
    (exponent strictly above/below -1 decides; exactly -1 diverges);
  * numeric, via dyadic shell sums toward the endpoint with a Cauchy test,
    a divergence cap, and a geometric-tail fit.  The numeric route refuses
    to decide inside a dead zone around exponent -1 (|p+1| < 0.02), where
    logarithmic divergence cannot be told from slow convergence in double
    precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import Asymptotics, Boundary, EXACT, Expr, compile_numpy
from .verdict import (NUMERIC, SYMBOLIC, Verdict, fails, holds, unknown)

__all__ = [
    "CAUCHY_REL_TOL", "DIVERGENCE_CAP", "MAX_LEVELS", "DEAD_ZONE",
    "IntegrandSpec", "ImproperIntegral", "power_rule",
    "loc_integrable_at_boundary", "improper_integral_finite",
    "loc_integrable_on_J",
]

CAUCHY_REL_TOL = 1e-9
DIVERGENCE_CAP = 1e12
MAX_LEVELS = 60
DEAD_ZONE = 0.02          # undecidable band around exponent -1, numeric route
_FIT_WINDOW = 24
_FIT_RESIDUAL = 0.05      # max log-residual for the geometric-tail fit

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class IntegrandSpec:
    """A nonnegative function on a one-sided neighbourhood of an endpoint.

    ``function`` consumes x values (vectorised, nan-tolerant); ``anchor_x``
    is where the integration toward the boundary starts (defaults to the
    boundary's sampling scale).
    """

    function: object
    boundary: Boundary
    known_asymptotics: Asymptotics | None = None
    anchor_x: float | None = None

    def start_distance(self) -> float:
        if self.anchor_x is None:
            return self.boundary.scale
        if self.boundary.infinite:
            return max(abs(self.anchor_x), 1e-300)
        return max(abs(self.anchor_x - self.boundary.value), 1e-300)


@dataclass(frozen=True)
class ImproperIntegral:
    verdict: Verdict
    value: float  # finite when verdict holds, +inf on divergence, nan otherwise


def power_rule(exponent: float, at_infinite: bool, exact: bool,
               cauchy_tol: float = CAUCHY_REL_TOL) -> Verdict:
    """Convergence of the integral of u**exponent toward the endpoint.

    Finite endpoint (u -> 0+): converges iff exponent > -1.
    Infinite endpoint (u -> inf): converges iff exponent < -1.
    The borderline -1 is decided (divergent) only with an exact exponent.
    """
    method = SYMBOLIC if exact else NUMERIC
    p1 = exponent + 1.0
    if not exact and abs(p1) < DEAD_ZONE:
        return unknown(f"exponent {exponent:.6g} inside the +-{DEAD_ZONE} dead zone around -1")
    if p1 == 0.0:
        if exact:
            return fails("exponent exactly -1: logarithmic divergence", method=method)
        return unknown("estimated exponent -1: cannot separate from slow convergence")
    converges = (p1 > 0.0) if not at_infinite else (p1 < 0.0)
    note = f"power rule, exponent {exponent:.6g}"
    return holds(note, method=method) if converges else fails(note, method=method)


# --------------------------------------------------------------------------
# Dyadic shell machinery (numeric route)
# --------------------------------------------------------------------------

def _shell_mass(f, boundary: Boundary, u_lo: float, u_hi: float) -> float:
    mid = 0.5 * (u_lo + u_hi)
    half = 0.5 * (u_hi - u_lo)
    u = mid + half * _GL_NODES
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(f(boundary.to_x(u)), dtype=np.float64))
    if not np.all(np.isfinite(vals)):
        if np.any(np.isnan(vals)):
            return math.nan
        return math.inf
    return float(half * np.dot(_GL_WEIGHTS, vals))


def _numeric_improper(f, boundary: Boundary, a: float,
                      cauchy_tol: float = CAUCHY_REL_TOL) -> ImproperIntegral:
    masses = []
    total = 0.0
    quiet = 0
    for k in range(MAX_LEVELS):
        if boundary.infinite:
            u_lo, u_hi = a * 2.0 ** k, a * 2.0 ** (k + 1)
        else:
            u_lo, u_hi = a * 2.0 ** (-k - 1), a * 2.0 ** (-k)
        m = _shell_mass(f, boundary, u_lo, u_hi)
        if math.isnan(m):
            return ImproperIntegral(
                unknown(f"integrand not evaluable on shell {k}"), math.nan)
        if math.isinf(m):
            return ImproperIntegral(
                fails(f"integrand overflows on shell {k}", method=NUMERIC), math.inf)
        masses.append(m)
        total += m
        if total > DIVERGENCE_CAP:
            return ImproperIntegral(
                fails(f"partial sums exceed divergence cap {DIVERGENCE_CAP:.0e}",
                      method=NUMERIC), math.inf)
        if total > 0.0 and m <= cauchy_tol * total:
            quiet += 1
            if quiet >= 3:
                total += _leftover_tail(masses)
                return ImproperIntegral(
                    holds(f"Cauchy tail test passed after {k + 1} shells",
                          method=NUMERIC), total)
        else:
            quiet = 0
    if total == 0.0:
        return ImproperIntegral(holds("integrand vanishes on all shells",
                                      method=NUMERIC), 0.0)
    return _tail_fit_decision(masses, total)


def _leftover_tail(masses: list[float]) -> float:
    """Geometric estimate of the mass beyond the last computed shell."""
    tail = [m for m in masses if m > 0.0][-2:]
    if len(tail) < 2 or tail[1] >= tail[0]:
        return 0.0
    r = tail[1] / tail[0]
    return tail[1] * r / (1.0 - r)


def _tail_fit_decision(masses: list[float], total: float) -> ImproperIntegral:
    """Budget exhausted: fit the shell masses to a geometric tail.  For a
    power-law integrand the masses are exactly geometric, so the fitted
    ratio recovers the exponent; growth means divergence, decay means a
    finite extrapolated tail."""
    window = [m for m in masses[-_FIT_WINDOW:] if m > 0.0]
    if len(window) < _FIT_WINDOW // 2:
        return ImproperIntegral(
            unknown("tail shells vanish irregularly; no geometric fit"), math.nan)
    y = np.log(np.array(window))
    k = np.arange(len(window), dtype=np.float64)
    design = np.column_stack([k, np.ones_like(k)])
    (lam, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.max(np.abs(design @ np.array([lam, intercept]) - y)))
    if resid > _FIT_RESIDUAL:
        return ImproperIntegral(
            unknown(f"shell masses are not geometric (residual {resid:.2g})"),
            math.nan)
    threshold = DEAD_ZONE * math.log(2.0)
    if lam <= -threshold:
        r = math.exp(float(lam))
        tail = masses[-1] * r / (1.0 - r)
        return ImproperIntegral(
            holds(f"geometric tail, shell ratio {r:.6g}", method=NUMERIC),
            total + tail)
    if lam >= threshold and window[-1] >= window[0]:
        return ImproperIntegral(
            fails(f"shell masses grow geometrically (ratio {math.exp(float(lam)):.6g})",
                  method=NUMERIC), math.inf)
    return ImproperIntegral(
        unknown(f"shell ratio {math.exp(float(lam)):.6g} inside the dead zone"),
        math.nan)


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def improper_integral_finite(spec: IntegrandSpec,
                             cauchy_tol: float = CAUCHY_REL_TOL) -> ImproperIntegral:
    """Finiteness of the integral from the anchor to the boundary, with the
    numeric value attached whenever it is finite."""
    asym = spec.known_asymptotics
    if asym is not None and asym.confidence == EXACT:
        verdict = power_rule(asym.exponent, spec.boundary.infinite, exact=True)
        if verdict.is_fails:
            return ImproperIntegral(verdict, math.inf)
        numeric = _numeric_improper(spec.function, spec.boundary,
                                    spec.start_distance(), cauchy_tol)
        value = numeric.value if math.isfinite(numeric.value) else math.nan
        return ImproperIntegral(verdict, value)
    return _numeric_improper(spec.function, spec.boundary,
                             spec.start_distance(), cauchy_tol)


def loc_integrable_at_boundary(spec: IntegrandSpec,
                               cauchy_tol: float = CAUCHY_REL_TOL) -> Verdict:
    """Membership in L1_loc at the endpoint under test."""
    return improper_integral_finite(spec, cauchy_tol).verdict


# --------------------------------------------------------------------------
# Whole-interval local integrability
# --------------------------------------------------------------------------

_SCAN_POINTS = 4096
_PROMINENCE = 10.0  # local max must beat the nearby background by this factor


def _interior_grid(l: float, r: float, x_scale: float) -> np.ndarray:
    span = max(x_scale, 1.0)
    if math.isinf(l) and math.isinf(r):
        right = span * np.logspace(-8, 8, _SCAN_POINTS // 2)
        return np.concatenate([-right[::-1], right])
    if math.isinf(r):
        return l + span * np.logspace(-8, 8, _SCAN_POINTS)
    if math.isinf(l):
        return r - span * np.logspace(-8, 8, _SCAN_POINTS)[::-1]
    inner = (r - l) * np.concatenate([
        np.logspace(-10, -1, _SCAN_POINTS // 4),
        np.linspace(0.1, 0.9, _SCAN_POINTS // 2),
        1.0 - np.logspace(-10, -1, _SCAN_POINTS // 4)[::-1],
    ])
    return l + inner


def _local_exponent(f, x_star: float, d0: float) -> float | None:
    """Growth exponent of |f| approaching x_star, from both sides."""
    j = np.arange(20, dtype=np.float64)
    d = d0 * 2.0 ** (-j)
    slopes = []
    for side in (+1.0, -1.0):
        with np.errstate(all="ignore"):
            vals = np.abs(np.asarray(f(x_star + side * d), dtype=np.float64))
        ok = np.isfinite(vals) & (vals > 0.0)
        if np.count_nonzero(ok) < 10:
            continue
        t = np.log(d[ok])
        y = np.log(vals[ok])
        design = np.column_stack([t, np.ones_like(t)])
        (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = float(np.max(np.abs(design @ np.array([slope, intercept]) - y)))
        if resid < 0.2:
            slopes.append(float(slope))
    if not slopes:
        return None
    return min(slopes)


def loc_integrable_on_J(f, interval: tuple[float, float],
                        x_scale: float = 1.0) -> Verdict:
    """Integrability on every compact subinterval of the open interval:
    scans a dense interior grid for non-integrable singularities.  Boundary
    singularities are irrelevant here and are ignored.

    ``f`` is a vectorised nan-tolerant callable or an Expr.
    """
    if isinstance(f, Expr):
        f = compile_numpy(f)
    l, r = interval
    grid = _interior_grid(l, r, x_scale)
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(f(grid), dtype=np.float64))
    finite = np.isfinite(vals)
    if not finite.any():
        return unknown("integrand not evaluable anywhere on the scan grid")

    candidates: list[int] = []
    bad = ~finite
    if bad.any():
        candidates.extend(np.nonzero(bad)[0].tolist())
    # a genuine pole shows as a prominent local maximum: the sampled peak
    # dwarfs the background a handful of grid points away on both sides
    w = 8
    v = np.where(finite, vals, np.inf) + 1e-300
    peaks = (v[w:-w] > v[w - 1:-w - 1]) & (v[w:-w] >= v[w + 1:-w + 1])
    background = np.maximum(v[: -2 * w], v[2 * w:])
    prominent = peaks & (v[w:-w] > _PROMINENCE * background)
    candidates.extend((np.nonzero(prominent)[0] + w).tolist())

    edge = max(2, _SCAN_POINTS // 50)
    interior = [i for i in sorted(set(candidates)) if edge <= i < len(grid) - edge]
    if not interior:
        return holds("no interior singularity detected on the scan grid",
                     method=NUMERIC)

    # merge neighbouring candidate indices into single suspect locations
    groups: list[int] = []
    for i in interior:
        if not groups or i - groups[-1] > 3:
            groups.append(i)
    for i in groups:
        x_star = _refine_singularity(f, grid[i - 1], grid[i + 1])
        d0 = (grid[i + 1] - grid[i - 1]) / 4.0
        q = _local_exponent(f, x_star, d0)
        if q is None:
            return unknown(f"suspect singularity near x={x_star:.6g}: "
                           "growth rate not identifiable")
        if q <= -1.0 + 1e-9:
            return fails(f"non-integrable interior singularity near x={x_star:.6g} "
                         f"(local exponent {q:.3g})", method=NUMERIC)
    return holds("interior spikes all locally integrable", method=NUMERIC)


def _refine_singularity(f, lo: float, hi: float) -> float:
    """Ternary search for the local maximiser of |f| (nan counts as +inf)."""
    def probe(x: float) -> float:
        with np.errstate(all="ignore"):
            v = float(np.abs(np.asarray(f(np.array([x])), dtype=np.float64))[0])
        return math.inf if math.isnan(v) else v

    for _ in range(80):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if probe(m1) < probe(m2):
            lo = m1
        else:
            hi = m2
    return 0.5 * (lo + hi)
