"""Benchmark the jit path kernel against the pure-numpy fallback.

Usage:  python -m diffarb.bench [--paths N] [--dt D] [--horizon T] [--seed S]
"""

from __future__ import annotations

import argparse
import time

from .expr import parse
from .scale import DiffusionModel, market_tilt
from .sim import SimConfig, simulate


def _time(fn, repeats: int = 1) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=50_000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--horizon", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)

    model = DiffusionModel(parse("0.05*x"), parse("0.2*x"), 1.0, label="gbm")
    tilt = market_tilt(model)
    config = SimConfig(n_paths=args.paths, dt=args.dt, horizon=args.horizon,
                       seed=args.seed)
    steps = args.paths * round(args.horizon / args.dt)
    print(f"reference model {model.label}, {args.paths} paths x "
          f"{round(args.horizon / args.dt)} steps ({steps:.2e} path-steps)")

    t_np, est_np = _time(lambda: simulate(model, tilt, config, backend="numpy"))
    print(f"numpy fallback : {t_np:8.2f} s   mean_Z={est_np.mean_Z.value:.6f}")

    try:
        t_warm, est_nb = _time(lambda: simulate(model, tilt, config, backend="numba"))
        t_nb, est_nb2 = _time(lambda: simulate(model, tilt, config, backend="numba"))
        match = "identical" if est_nb == est_np else \
            f"|diff|={abs(est_nb.mean_Z.value - est_np.mean_Z.value):.2e}"
        print(f"jit (compile)  : {t_warm:8.2f} s")
        print(f"jit (warm)     : {t_nb:8.2f} s   mean_Z={est_nb.mean_Z.value:.6f}"
              f"   vs numpy: {match}")
        print(f"warm speedup   : {t_np / t_nb:8.2f} x")
        assert est_nb == est_nb2
    except ImportError:
        print("jit backend unavailable; fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
