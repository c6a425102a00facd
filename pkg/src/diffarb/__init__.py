"""Deterministic no-arbitrage classification for one-dimensional diffusion
price models, with a Monte Carlo cross-check simulator."""

__version__ = "0.1.0"

from .expr import Expr, ParseError, EvalError, parse, evaluate, to_source  # noqa: F401
from .verdict import Verdict, HOLDS, FAILS, UNKNOWN  # noqa: F401
from .scale import (DiffusionModel, TiltSpec, ModelError, market_tilt,  # noqa: F401
                    relative_tilt, build_scale, auxiliary_model,
                    feller_explodes, endpoint_good, endpoint_bad_shortcut)
from .exponential import ZClassification, classify_Z  # noqa: F401
from .arbitrage import (ArbitrageReport, analyze_market, nflvr_finite_horizon,  # noqa: F401
                        nflvr_infinite_horizon, nra_finite_horizon,
                        nga_finite_horizon, nga_infinite_horizon)
from .sim import SimConfig, SimEstimates, simulate, crosscheck  # noqa: F401
from .report import ClassificationReport, build_report  # noqa: F401
