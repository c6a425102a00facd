"""Generalised constant-elasticity-of-variance family.

Price dynamics dY = mu0 Y**alpha dt + sigma0 Y**beta dW on (0, inf).  The
closed-form classification of the density exponential for this family is
known in all three exponent regimes; the rules here serve as the reference
the engine is checked against, cell by cell.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Mul, Num, Pow, Var
from .scale import DiffusionModel

__all__ = ["cev_model", "cev_case", "CevRules", "cev_rules", "table_grid",
           "random_cev_params"]


def cev_model(alpha: float, beta: float, mu0: float, sigma0: float,
              x0: float = 1.0) -> DiffusionModel:
    mu = Num(0.0) if mu0 == 0.0 else Mul(Num(float(mu0)), Pow(Var(), float(alpha)))
    sigma = Mul(Num(float(sigma0)), Pow(Var(), float(beta)))
    label = f"cev(alpha={alpha:g}, beta={beta:g}, mu0={mu0:g}, sigma0={sigma0:g})"
    return DiffusionModel(mu, sigma, float(x0), (0.0, float("inf")), label=label)


def cev_case(alpha: float, beta: float) -> int:
    """Sign of alpha + 1 - 2*beta: the regime that drives the classification."""
    d = alpha + 1.0 - 2.0 * beta
    return (d > 0) - (d < 0)


@dataclass(frozen=True)
class CevRules:
    """Reference truth values for a CEV cell (requires mu0 != 0)."""

    z_positive: bool        # Z strictly positive on [0, inf)
    z_limit_positive: bool  # Z_inf > 0 a.s.
    z_limit_zero: bool      # Z_inf = 0 a.s.


def cev_rules(alpha: float, beta: float, mu0: float, sigma0: float) -> CevRules:
    if mu0 == 0.0:
        raise ValueError("closed-form rules assume a nonzero drift scale")
    case = cev_case(alpha, beta)
    if case < 0:
        positive = (mu0 > 0) or (alpha >= 1)
    elif case == 0:
        positive = (alpha - 1.0) * (sigma0 ** 2 - 2.0 * mu0) >= 0.0
    else:
        positive = (mu0 < 0) or (alpha <= 1)
    limit_positive = case > 0 and mu0 < 0
    limit_zero = case <= 0
    return CevRules(positive, limit_positive, limit_zero)


_CASE_PAIRS = {
    -1: [(0.0, 1.0), (1.0, 1.5), (-1.0, 0.5), (0.5, 1.0)],
    0: [(0.0, 0.5), (1.0, 1.0), (-1.0, 0.0), (2.0, 1.5)],
    1: [(0.0, 0.0), (1.0, 0.5), (-1.0, -0.5), (2.0, 1.0)],
}
_MU0_VALUES = (-1.0, 0.5, 1.0, 2.0)
_SIGMA0_VALUES = (0.5, 1.0)


def table_grid() -> list[tuple[float, float, float, float]]:
    """The built-in sweep: every exponent regime, several (alpha, beta)
    pairs each, crossed with the drift/volatility scales."""
    cells = []
    for case in (-1, 0, 1):
        for alpha, beta in _CASE_PAIRS[case]:
            for mu0 in _MU0_VALUES:
                for sigma0 in _SIGMA0_VALUES:
                    cells.append((alpha, beta, mu0, sigma0))
    return cells


def random_cev_params(rng, case: int | None = None):
    """One random (alpha, beta, mu0, sigma0) draw, optionally constrained
    to a regime; stays away from the degenerate mu0 = 0 line."""
    beta = float(rng.uniform(-1.0, 1.5))
    if case is None:
        alpha = float(rng.uniform(2.0 * beta - 2.5, 2.0 * beta + 1.5))
    elif case > 0:
        alpha = float(rng.uniform(2.0 * beta - 1.0 + 0.05, 2.0 * beta + 1.5))
    elif case < 0:
        alpha = float(rng.uniform(2.0 * beta - 2.5, 2.0 * beta - 1.0 - 0.05))
    else:
        alpha = 2.0 * beta - 1.0
    mu0 = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 2.0))
    sigma0 = float(rng.uniform(0.3, 2.0))
    return alpha, beta, mu0, sigma0
