import os

# must happen before anything imports numba: the thread-count determinism
# test needs an 8-thread pool even on smaller CI boxes
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

import math  # noqa: E402

import pytest  # noqa: E402

from diffarb.expr import parse  # noqa: E402
from diffarb.scale import DiffusionModel  # noqa: E402


def make_model(mu: str, sigma: str, x0: float = 1.0,
               interval=(0.0, math.inf), label: str = "") -> DiffusionModel:
    return DiffusionModel(parse(mu), parse(sigma), x0, interval, label=label)


@pytest.fixture
def gbm():
    return make_model("0.05*x", "0.2*x", 1.0, label="gbm")


@pytest.fixture
def bessel3():
    return make_model("1/x", "1", 1.0, label="bessel3")


# the cross-notion example family: (mu, sigma, NFLVR, NRA)
COMPARISON_SUITE = [
    ("x", "x", "holds", "holds"),
    ("x", "x^2", "holds", "fails"),
    ("2", "2*sqrt(x)", "fails", "holds"),
    ("1/x", "1", "fails", "holds"),
    ("2", "sqrt(x)+x^2", "fails", "fails"),
]
