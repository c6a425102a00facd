"""Monte Carlo cross-check for the deterministic classifier.

Paths of the price diffusion are simulated with an Euler scheme and
absorbed at a configurable proxy distance from each endpoint (in discrete
time the true exit is unreachable, so absorption stands in for it).  Along each
path two log-exponentials accumulate: the density candidate Z for the
requested tilt, and the wealth-ratio process Z*Y/x0 for the market tilt,
whose mean at the horizon is the relative-arbitrage quantity.

Determinism contract: fixed (model, tilt, config) gives bit-identical
estimates regardless of backend thread count, because every path owns a
counter-based stream and writes into its own output slot; the final
reductions run in fixed order.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .expr import EvalError, Div, Var, compile_numpy, evaluate, numba_source
from .scale import DiffusionModel, TiltSpec, relative_tilt
from .simrng import B2_CAP, GAMMA, inv_norm, mix64, path_keys, uniform_from_bits
from .verdict import Verdict

__all__ = ["SimConfig", "EstimateSE", "SimEstimates", "SimulationError",
           "CrosscheckFlag", "simulate", "crosscheck", "active_backend"]

_UPPER_CAP_FACTOR = 1e8
_DEFAULT_EPS_FACTOR = 1e-4


class SimulationError(RuntimeError):
    def __init__(self, message: str, x: float):
        super().__init__(f"{message} (offending x={x!r})")
        self.x = x


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    dt: float
    horizon: float
    seed: int
    boundary_eps: float | None = None   # default x0 * 1e-4
    upper_cap: float | None = None      # default 1e8 * x0, proxy for infinity
    scheme: str = "euler-maruyama"
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 2:
            raise ValueError("need at least two paths")
        if not (0.0 < self.dt < self.horizon):
            raise ValueError("require 0 < dt < horizon")
        if self.scheme != "euler-maruyama":
            raise ValueError(f"unsupported scheme {self.scheme!r}")

    def resolved_eps(self, x0: float) -> float:
        eps = self.boundary_eps if self.boundary_eps is not None \
            else abs(x0) * _DEFAULT_EPS_FACTOR
        if eps <= 0:
            raise ValueError("boundary_eps must be positive")
        if eps >= abs(x0) / 100.0:
            raise ValueError("boundary_eps must be below x0/100")
        return eps

    def resolved_cap(self, x0: float) -> float:
        return self.upper_cap if self.upper_cap is not None \
            else _UPPER_CAP_FACTOR * max(abs(x0), 1.0)


@dataclass(frozen=True)
class EstimateSE:
    value: float
    se: float


@dataclass(frozen=True)
class SimEstimates:
    p_Z_positive: EstimateSE
    mean_Z: EstimateSE
    mean_ZY: EstimateSE          # nan outside the market interval (0, inf)
    p_explode_by_T: EstimateSE
    n_effective: int
    boundary_eps: float
    backend: str


def active_backend(name: str | None = None) -> str:
    """Backend selection: explicit argument, then the DIFFARB_BACKEND
    environment flag, then jit when importable, else the numpy fallback."""
    choice = (name or os.environ.get("DIFFARB_BACKEND", "")).strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        from . import _simnumba  # noqa: F401  (raises if unavailable)
        return "numba"
    if choice:
        raise ValueError(f"unknown backend {choice!r}")
    try:
        from . import _simnumba  # noqa: F401
        return "numba"
    except ImportError:
        return "numpy"


# --------------------------------------------------------------------------
# shared setup
# --------------------------------------------------------------------------

def _steps(config: SimConfig) -> tuple[int, float, float]:
    n = max(1, math.ceil(config.horizon / config.dt - 1e-12))
    last = config.horizon - (n - 1) * config.dt
    return n, config.dt, last


def _boundary_eval_ok(e, x: float) -> bool:
    try:
        evaluate(e, x)
        return True
    except (EvalError, OverflowError, ZeroDivisionError):
        return False


@dataclass(frozen=True)
class _Setup:
    x0: float
    lo_level: float
    hi_level: float
    lo_point: float
    hi_point: float
    n_steps: int
    dt: float
    last_dt: float
    keys: np.ndarray
    signs: np.ndarray
    has_zy: bool
    b_lo_ok: bool
    b_hi_ok: bool
    bz_lo_ok: bool
    bz_hi_ok: bool
    bz_expr: object


def _prepare(model: DiffusionModel, tilt: TiltSpec, config: SimConfig) -> _Setup:
    l, r = model.interval
    x0 = model.x0
    eps = config.resolved_eps(x0)
    cap = config.resolved_cap(x0)
    lo_level = l + eps if math.isfinite(l) else -cap
    hi_level = r - eps if math.isfinite(r) else cap
    lo_point = l if math.isfinite(l) else -cap
    hi_point = r if math.isfinite(r) else cap
    if not (lo_level < x0 < hi_level):
        raise ValueError("absorption levels do not bracket x0")
    n_steps, dt, last_dt = _steps(config)
    if config.antithetic:
        half = (config.n_paths + 1) // 2
        base = path_keys(config.seed, half)
        keys = base[np.arange(config.n_paths) // 2]
        signs = np.where(np.arange(config.n_paths) % 2 == 0, 1.0, -1.0)
    else:
        keys = path_keys(config.seed, config.n_paths)
        signs = np.ones(config.n_paths)
    has_zy = tuple(model.interval) == (0.0, math.inf)
    bz_expr = relative_tilt(model).b if has_zy else Div(Var(), Var())
    return _Setup(
        x0=x0, lo_level=lo_level, hi_level=hi_level,
        lo_point=lo_point, hi_point=hi_point,
        n_steps=n_steps, dt=dt, last_dt=last_dt,
        keys=keys, signs=signs, has_zy=has_zy,
        b_lo_ok=_boundary_eval_ok(tilt.b, lo_point),
        b_hi_ok=_boundary_eval_ok(tilt.b, hi_point),
        bz_lo_ok=has_zy and _boundary_eval_ok(bz_expr, lo_point),
        bz_hi_ok=has_zy and _boundary_eval_ok(bz_expr, hi_point),
        bz_expr=bz_expr,
    )


# --------------------------------------------------------------------------
# numpy reference kernel
# --------------------------------------------------------------------------

def _run_numpy(model, tilt, s: _Setup):
    n = s.keys.shape[0]
    mu_f = compile_numpy(model.mu)
    sg_f = compile_numpy(model.sigma)
    b_f = compile_numpy(tilt.b)
    bz_f = compile_numpy(s.bz_expr)

    y = np.full(n, s.x0)
    logz = np.zeros(n)
    ib2 = np.zeros(n)
    logzy = np.zeros(n)
    izy2 = np.zeros(n)
    status = np.zeros(n, dtype=np.int8)
    alive = np.arange(n)

    for step in range(s.n_steps):
        if alive.size == 0:
            break
        h = s.dt if step + 1 < s.n_steps else s.last_dt
        ya = y[alive]
        mu_v = mu_f(ya)
        sg_v = sg_f(ya)
        b_v = b_f(ya)
        ok = np.isfinite(mu_v) & np.isfinite(sg_v) & np.isfinite(b_v)
        if s.has_zy:
            bz_v = bz_f(ya)
            ok &= np.isfinite(bz_v)
        if not ok.all():
            bad = int(np.nonzero(~ok)[0][0])
            raise SimulationError(f"coefficient not finite at step {step}",
                                  float(ya[bad]))
        counter = np.uint64(((step + 1) * int(GAMMA)) & 0xFFFFFFFFFFFFFFFF)
        v = mix64(s.keys[alive] + counter)
        xi = s.signs[alive] * inv_norm(uniform_from_bits(v))
        dw = np.sqrt(h) * xi
        logz[alive] = logz[alive] + (b_v * dw - 0.5 * b_v * b_v * h)
        ib2[alive] = ib2[alive] + b_v * b_v * h
        if s.has_zy:
            logzy[alive] = logzy[alive] + (bz_v * dw - 0.5 * bz_v * bz_v * h)
            izy2[alive] = izy2[alive] + bz_v * bz_v * h
        y_new = ya + mu_v * h + sg_v * dw
        y[alive] = y_new
        lo = y_new <= s.lo_level
        hi = y_new >= s.hi_level
        status[alive[lo]] = 1
        status[alive[hi]] = 2
        alive = alive[~(lo | hi)]

    # the tilt integral is declared divergent (Z := 0) when its running sum
    # passes the cap, or when the path exits at an endpoint where the tilt
    # itself blows up; a running sum of exactly zero means the tilt vanished
    # along the whole path and the exponential is genuinely frozen at 1
    zero_z = (ib2 > B2_CAP) | ((ib2 > 0.0) & (
        ((status == 1) & (not s.b_lo_ok)) | ((status == 2) & (not s.b_hi_ok))))
    with np.errstate(over="ignore"):
        z = np.where(zero_z, 0.0, np.exp(logz))
        if s.has_zy:
            zero_zy = (izy2 > B2_CAP) | ((izy2 > 0.0) & (
                ((status == 1) & (not s.bz_lo_ok))
                | ((status == 2) & (not s.bz_hi_ok))))
            zy = np.where(zero_zy, 0.0, s.x0 * np.exp(logzy))
        else:
            zy = np.full(n, np.nan)
    return z, zy, status


# --------------------------------------------------------------------------
# jit kernel driver
# --------------------------------------------------------------------------

def _run_numba(model, tilt, s: _Setup):
    from ._simnumba import compile_coefficient, run_paths
    n = s.keys.shape[0]
    mu_f = compile_coefficient(numba_source(model.mu))
    sg_f = compile_coefficient(numba_source(model.sigma))
    b_f = compile_coefficient(numba_source(tilt.b))
    bz_f = compile_coefficient(numba_source(s.bz_expr)) if s.has_zy else b_f
    out_z = np.empty(n)
    out_zy = np.empty(n)
    out_status = np.empty(n, dtype=np.int8)
    out_err = np.empty(n, dtype=np.int8)
    out_errx = np.empty(n)
    run_paths(mu_f, sg_f, b_f, bz_f, s.has_zy,
              s.x0, s.lo_level, s.hi_level, s.n_steps, s.dt, s.last_dt,
              s.keys, s.signs, B2_CAP,
              s.b_lo_ok, s.b_hi_ok, s.bz_lo_ok, s.bz_hi_ok,
              out_z, out_zy, out_status, out_err, out_errx)
    if out_err.any():
        bad = int(np.nonzero(out_err)[0][0])
        raise SimulationError("coefficient not finite", float(out_errx[bad]))
    return out_z, out_zy, out_status


# --------------------------------------------------------------------------
# public entry points
# --------------------------------------------------------------------------

def _mean_se(x: np.ndarray) -> EstimateSE:
    n = x.shape[0]
    return EstimateSE(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(n)))


def _prop_se(flags: np.ndarray) -> EstimateSE:
    n = flags.shape[0]
    p = float(np.mean(flags))
    return EstimateSE(p, math.sqrt(max(p * (1.0 - p), 0.0) / n))


def simulate(model: DiffusionModel, tilt: TiltSpec, config: SimConfig,
             backend: str | None = None) -> SimEstimates:
    """Path estimates of the positivity probability of Z, the martingale
    defect of Z, the relative-arbitrage quantity, and the exit frequency."""
    chosen = active_backend(backend)
    s = _prepare(model, tilt, config)
    runner = _run_numba if chosen == "numba" else _run_numpy
    z, zy, status = runner(model, tilt, s)
    exploded = (status != 0).astype(np.float64)
    if s.has_zy:
        mean_zy = _mean_se(zy)
    else:
        mean_zy = EstimateSE(math.nan, math.nan)
    return SimEstimates(
        p_Z_positive=_prop_se((z > 0.0).astype(np.float64)),
        mean_Z=_mean_se(z),
        mean_ZY=mean_zy,
        p_explode_by_T=_prop_se(exploded),
        n_effective=int(z.shape[0]),
        boundary_eps=config.resolved_eps(model.x0),
        backend=chosen,
    )


@dataclass(frozen=True)
class CrosscheckFlag:
    name: str
    expected: str
    observed: float
    tolerance: float

    def describe(self) -> str:
        return (f"{self.name}: expected {self.expected}, observed "
                f"{self.observed:.6g} (tolerance {self.tolerance:.3g})")


def crosscheck(report, est: SimEstimates, z_level: float = 3.0) -> list[CrosscheckFlag]:
    """Disagreements between the deterministic report and the Monte Carlo
    estimates; an empty list means every linked quantity is consistent.

    Proxy-absorbed paths are excused in the positivity check through the
    explosion frequency: zeroing them is a discretisation convention, not a
    statement about the continuous model.
    """
    flags: list[CrosscheckFlag] = []
    zc = report.z_classification
    if zc.martingale.is_holds and math.isfinite(est.mean_Z.value):
        tol = z_level * est.mean_Z.se + 1e-12
        if abs(est.mean_Z.value - 1.0) > tol:
            flags.append(CrosscheckFlag("martingale-defect",
                                        "E[Z_T] = 1", est.mean_Z.value, tol))
    if zc.strictly_positive_finite_T.is_holds:
        tol = z_level * (est.p_Z_positive.se + est.p_explode_by_T.se) + 1e-12
        shortfall = 1.0 - (est.p_Z_positive.value + est.p_explode_by_T.value)
        if shortfall > tol:
            flags.append(CrosscheckFlag(
                "strict-positivity",
                "P(Z_T > 0) = 1 up to proxy-absorbed paths",
                est.p_Z_positive.value, tol))
    nra = report.arbitrage.nra_finite_T
    x0 = report.model["x0"]
    if nra.is_holds and math.isfinite(est.mean_ZY.value):
        tol = z_level * est.mean_ZY.se + 1e-12
        if x0 - est.mean_ZY.value > tol:
            flags.append(CrosscheckFlag("relative-arbitrage-quantity",
                                        f"E[Z_T Y_T] = {x0:g}",
                                        est.mean_ZY.value, tol))
    return flags
