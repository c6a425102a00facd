"""Jit-compiled path kernel.  Mirrors the numpy reference arithmetic in
scalar form; per-path output slots keep results independent of the thread
schedule."""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .simrng import (A_COEF, B_COEF, C_COEF, D_COEF, GAMMA, MIX1, MIX2,
                     P_LOW, SALT)

_U53 = 2.0 ** -53
_U54 = 2.0 ** -54


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _inv_norm(p):
    a1, a2, a3, a4, a5, a6 = A_COEF
    b1, b2, b3, b4, b5 = B_COEF
    c1, c2, c3, c4, c5, c6 = C_COEF
    d1, d2, d3, d4 = D_COEF
    if p < P_LOW:
        q = np.sqrt(-2.0 * np.log(p))
        return (((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) / \
            ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0)
    if p > 1.0 - P_LOW:
        q = np.sqrt(-2.0 * np.log(1.0 - p))
        return -(((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) / \
            ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0)
    q = p - 0.5
    r = q * q
    num = (((((a1 * r + a2) * r + a3) * r + a4) * r + a5) * r + a6) * q
    den = ((((b1 * r + b2) * r + b3) * r + b4) * r + b5) * r + 1.0
    return num / den


def compile_coefficient(source: str):
    """njit a scalar coefficient function from generated source (IEEE
    semantics: domain errors surface as nan/inf, checked by the kernel)."""
    code = f"def _coef(x):\n    return {source}"
    ns = {"np": np, "abs": abs}
    exec(code, ns)
    return njit(ns["_coef"])


@njit(parallel=True)
def run_paths(mu_f, sg_f, b_f, bz_f, has_zy,
              x0, lo_level, hi_level, n_steps, dt, last_dt,
              keys, signs, b2_cap,
              b_lo_ok, b_hi_ok, bz_lo_ok, bz_hi_ok,
              out_z, out_zy, out_status, out_err, out_errx):
    n_paths = keys.shape[0]
    for p in prange(n_paths):
        key = keys[p]
        sign = signs[p]
        y = x0
        logz = 0.0
        ib2 = 0.0
        logzy = 0.0
        izy2 = 0.0
        status = np.int8(0)
        err = np.int8(0)
        errx = np.nan
        for n in range(n_steps):
            h = dt if n + 1 < n_steps else last_dt
            mu_v = mu_f(y)
            sg_v = sg_f(y)
            b_v = b_f(y)
            bz_v = bz_f(y) if has_zy else 0.0
            if not (np.isfinite(mu_v) and np.isfinite(sg_v)
                    and np.isfinite(b_v) and np.isfinite(bz_v)):
                err = np.int8(1)
                errx = y
                break
            v = _mix64(key + np.uint64(n + 1) * GAMMA)
            u = (v >> np.uint64(11)) * _U53 + _U54
            xi = sign * _inv_norm(u)
            dw = np.sqrt(h) * xi
            logz += b_v * dw - 0.5 * b_v * b_v * h
            ib2 += b_v * b_v * h
            if has_zy:
                logzy += bz_v * dw - 0.5 * bz_v * bz_v * h
                izy2 += bz_v * bz_v * h
            y = y + mu_v * h + sg_v * dw
            if y <= lo_level:
                status = np.int8(1)
                break
            if y >= hi_level:
                status = np.int8(2)
                break
        out_status[p] = status
        out_err[p] = err
        out_errx[p] = errx
        if err:
            out_z[p] = np.nan
            out_zy[p] = np.nan
        else:
            zero_z = ib2 > b2_cap or (ib2 > 0.0 and (
                (status == 1 and not b_lo_ok) or (status == 2 and not b_hi_ok)))
            out_z[p] = 0.0 if zero_z else np.exp(logz)
            if has_zy:
                zero_zy = izy2 > b2_cap or (izy2 > 0.0 and (
                    (status == 1 and not bz_lo_ok)
                    or (status == 2 and not bz_hi_ok)))
                out_zy[p] = 0.0 if zero_zy else x0 * np.exp(logzy)
            else:
                out_zy[p] = np.nan
