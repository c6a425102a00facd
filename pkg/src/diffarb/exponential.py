"""Classification of the candidate density exponential Z.

Z is the stochastic exponential of int b(Y) dW; the engine decides four
properties from deterministic endpoint data alone: strict positivity on
finite horizons, positivity of the limit Z_inf, a.s. vanishing of Z_inf,
and the martingale property.  None of the criteria involve the horizon,
which is why the API takes no time parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import compile_numpy, fold_constant
from .scale import (LOWER, UPPER, DiffusionModel, TiltSpec, auxiliary_model,
                    endpoint_good, feller_explodes)
from .verdict import NUMERIC, Verdict, all_of, any_of, fails, holds, negate

__all__ = [
    "ZClassification", "b_is_null",
    "classify_Z_positive_T", "classify_Z_positive_infinity",
    "classify_Z_vanishes_infinity", "classify_Z_martingale", "classify_Z",
]

_NULL_GRID_POINTS = 1024
_NULL_TOL = 1e-15


@dataclass(frozen=True)
class ZClassification:
    strictly_positive_finite_T: Verdict
    positive_at_infinity: Verdict
    vanishes_at_infinity: Verdict
    martingale: Verdict
    b_is_null: Verdict


def b_is_null(model: DiffusionModel, tilt: TiltSpec) -> Verdict:
    """Is b zero (a.e.)?  Decided structurally when the tree folds to the
    zero constant; otherwise provisionally on a dense grid, and flagged as
    such, since almost-everywhere vanishing of a black box is undecidable."""
    cite = "tilt-null"
    c = fold_constant(tilt.b)
    if c is not None:
        if c == 0.0:
            return holds("tilt folds to the zero constant").cited(cite)
        return fails(f"tilt folds to the nonzero constant {c!r}").cited(cite)
    from .integrability import _interior_grid
    grid = _interior_grid(*model.interval, model.x_scale)[:: max(1, 4096 // _NULL_GRID_POINTS)]
    with np.errstate(all="ignore"):
        vals = np.asarray(compile_numpy(tilt.b)(grid), dtype=np.float64)
    finite = np.isfinite(vals)
    if not finite.any():
        return Verdict("unknown", NUMERIC, "tilt not evaluable on the grid", cite)
    if np.all(np.abs(vals[finite]) < _NULL_TOL):
        return holds(f"provisional: |b| < {_NULL_TOL:g} on a "
                     f"{_NULL_GRID_POINTS}-point grid", method=NUMERIC).cited(cite)
    x = float(grid[finite][int(np.argmax(np.abs(vals[finite])))])
    return fails(f"b nonzero, e.g. at x={x:.6g}", method=NUMERIC).cited(cite)


def classify_Z_positive_T(model: DiffusionModel, tilt: TiltSpec,
                          anchor: float | None = None,
                          form: str = "auto") -> Verdict:
    """Z stays strictly positive on [0, T] (any finite T, and on [0, inf)):
    at each endpoint, either the diffusion does not reach it or the
    endpoint is good."""
    upper = any_of(negate(feller_explodes(model, UPPER, anchor)),
                   endpoint_good(model, tilt, UPPER, form, anchor))
    lower = any_of(negate(feller_explodes(model, LOWER, anchor)),
                   endpoint_good(model, tilt, LOWER, form, anchor))
    return all_of(upper, lower).cited("z-never-zero")


def classify_Z_positive_infinity(model: DiffusionModel, tilt: TiltSpec,
                                 anchor: float | None = None,
                                 form: str = "auto") -> Verdict:
    """The limit Z_inf is a.s. strictly positive: b vanishes, or a good
    endpoint pairs with an infinite scale limit on the other side, or both
    endpoints are good."""
    sd = model.scale(anchor)
    null = b_is_null(model, tilt)
    good_l = endpoint_good(model, tilt, LOWER, form, anchor)
    good_r = endpoint_good(model, tilt, UPPER, form, anchor)
    s_l_infinite = negate(sd.s_limit_finite(LOWER))
    s_r_infinite = negate(sd.s_limit_finite(UPPER))
    return any_of(
        null,
        all_of(good_r, s_l_infinite),
        all_of(good_l, s_r_infinite),
        all_of(good_l, good_r),
    ).cited("z-limit-positive")


def classify_Z_vanishes_infinity(model: DiffusionModel, tilt: TiltSpec,
                                 anchor: float | None = None,
                                 form: str = "auto") -> Verdict:
    """The limit Z_inf is a.s. zero: b does not vanish and both endpoints
    are bad."""
    return all_of(
        negate(b_is_null(model, tilt)),
        negate(endpoint_good(model, tilt, LOWER, form, anchor)),
        negate(endpoint_good(model, tilt, UPPER, form, anchor)),
    ).cited("z-limit-zero")


def classify_Z_martingale(model: DiffusionModel, tilt: TiltSpec,
                          anchor: float | None = None,
                          form: str = "auto") -> Verdict:
    """Z is a true martingale: at each endpoint, either the companion
    diffusion does not reach it or the endpoint is good."""
    aux = auxiliary_model(model, tilt)
    upper = any_of(negate(feller_explodes(aux, UPPER, anchor)),
                   endpoint_good(model, tilt, UPPER, form, anchor))
    lower = any_of(negate(feller_explodes(aux, LOWER, anchor)),
                   endpoint_good(model, tilt, LOWER, form, anchor))
    return all_of(upper, lower).cited("z-martingale")


def classify_Z(model: DiffusionModel, tilt: TiltSpec,
               anchor: float | None = None, form: str = "auto") -> ZClassification:
    return ZClassification(
        strictly_positive_finite_T=classify_Z_positive_T(model, tilt, anchor, form),
        positive_at_infinity=classify_Z_positive_infinity(model, tilt, anchor, form),
        vanishes_at_infinity=classify_Z_vanishes_infinity(model, tilt, anchor, form),
        martingale=classify_Z_martingale(model, tilt, anchor, form),
        b_is_null=b_is_null(model, tilt),
    )
