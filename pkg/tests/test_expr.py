import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diffarb.expr import (
    Abs, Add, Boundary, Div, ESTIMATED, EXACT, EvalError, Exp, Log, Mul, Neg,
    Num, ParseError, Pow, Sqrt, Sub, UNAVAILABLE, Var, asymptotics_at,
    compile_numpy, evaluate, fold_constant, parse, to_source,
)

B0 = Boundary.lower_of(0.0, math.inf)
BINF = Boundary.upper_of(0.0, math.inf)


class TestParser:
    def test_single_production(self):
        assert parse("x^2") == Pow(Var(), 2.0)

    def test_coefficient_examples(self):
        assert parse("2*sqrt(x)") == Mul(Num(2.0), Sqrt(Var()))
        assert parse("1/x") == Div(Num(1.0), Var())

    def test_precedence(self):
        # ^ binds tighter than unary minus, which binds tighter than * and /
        assert parse("-x^2") == Neg(Pow(Var(), 2.0))
        assert parse("2*-x") == Mul(Num(2.0), Neg(Var()))
        assert parse("1+2*x") == Add(Num(1.0), Mul(Num(2.0), Var()))
        assert parse("1-2-x") == Sub(Sub(Num(1.0), Num(2.0)), Var())

    def test_power_right_associative_constant_folded(self):
        assert parse("x^2^3") == Pow(Var(), 8.0)
        assert parse("x^-2") == Pow(Var(), -2.0)
        assert parse("x^(1/2)") == Pow(Var(), 0.5)

    def test_scientific_notation(self):
        assert parse("1e-6*x") == Mul(Num(1e-6), Var())
        assert parse("2.5E+2") == Num(250.0)

    def test_syntax_error_carries_offset(self):
        with pytest.raises(ParseError) as err:
            parse("x + * 2")
        assert err.value.offset == 4

    def test_unknown_identifier(self):
        with pytest.raises(ParseError, match="unknown identifier 'y'"):
            parse("y + 1")

    def test_arity_error(self):
        with pytest.raises(ParseError, match="exactly one argument"):
            parse("exp(x, 2)")
        with pytest.raises(ParseError, match="parenthesised argument"):
            parse("sqrt + 1")

    def test_non_constant_exponent_rejected(self):
        with pytest.raises(ParseError, match="constant"):
            parse("x^x")


_leaf = st.one_of(
    st.just(Var()),
    st.builds(Num, st.floats(min_value=-10, max_value=10,
                             allow_nan=False, allow_infinity=False)),
)


def _tree(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Div, children, children),
        st.builds(Exp, children),
        st.builds(Log, children),
        st.builds(Sqrt, children),
        st.builds(Abs, children),
        st.builds(Pow, children,
                  st.floats(min_value=-4, max_value=4,
                            allow_nan=False, allow_infinity=False)),
    )


@given(st.recursive(_leaf, _tree, max_leaves=12))
def test_print_parse_round_trip(tree):
    assert parse(to_source(tree)) == tree


class TestEvaluate:
    def test_basics(self):
        assert evaluate(parse("x^2"), 3.0) == 9.0
        assert evaluate(parse("1/x"), 0.25) == 4.0
        assert evaluate(parse("exp(log(x))"), 5.0) == pytest.approx(5.0, rel=1e-15)

    def test_pure(self):
        e = parse("exp(-x) + sqrt(x)*abs(x-2)")
        assert evaluate(e, 1.5) == evaluate(e, 1.5)

    def test_domain_errors(self):
        with pytest.raises(EvalError):
            evaluate(parse("log(x-2)"), 1.0)
        with pytest.raises(EvalError):
            evaluate(parse("sqrt(x-2)"), 1.0)
        with pytest.raises(EvalError):
            evaluate(parse("1/(x-1)"), 1.0)

    def test_overflow_is_an_error_not_inf(self):
        with pytest.raises(EvalError):
            evaluate(parse("exp(x)"), 1e6)
        with pytest.raises(EvalError):
            evaluate(parse("x^200"), 1e300)

    def test_compile_numpy_is_nan_tolerant(self):
        f = compile_numpy(parse("log(x-2)"))
        out = f(np.array([1.0, 3.0]))
        assert math.isnan(out[0]) and out[1] == pytest.approx(math.log(1.0))


class TestFolding:
    def test_constants_fold(self):
        assert fold_constant(parse("2*3 + 1")) == 7.0
        assert fold_constant(parse("exp(0)")) == 1.0
        assert fold_constant(parse("x")) is None
        assert fold_constant(parse("0*1")) == 0.0


class TestAsymptotics:
    def test_cev_style_quotient_near_zero(self):
        # x / sigma(x)^2 for sigma = sigma0 * x^beta: exponent 1 - 2 beta,
        # coefficient 1/sigma0^2
        sigma0, beta = 0.5, 0.7
        e = parse(f"x/({sigma0}*x^{beta})^2")
        a = asymptotics_at(e, B0)
        assert a.confidence == EXACT
        assert a.exponent == pytest.approx(1 - 2 * beta)
        assert a.coefficient == pytest.approx(1 / sigma0 ** 2)

    def test_constant_near_infinity(self):
        a = asymptotics_at(parse("7"), BINF)
        assert (a.confidence, a.exponent, a.coefficient) == (EXACT, 0.0, 7.0)

    def test_exponential_decay_is_out_of_model(self):
        a = asymptotics_at(parse("exp(-x)"), BINF)
        assert a.confidence == UNAVAILABLE

    def test_exponential_decay_regression_residual_explodes(self):
        # independent check of the fallback's refusal: a straight-line fit of
        # log f against log x on the geometric grid x = 2^k leaves a residual
        # orders of magnitude above the acceptance threshold
        k = np.arange(1, 21, dtype=float)
        x = 2.0 ** k
        y = -x  # log of exp(-x)
        t = np.log(x)
        design = np.column_stack([t, np.ones_like(t)])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = np.max(np.abs(design @ coef - y))
        assert resid > 1e3  # versus the 1e-3 acceptance threshold

    def test_sum_takes_dominant_term(self):
        a0 = asymptotics_at(parse("sqrt(x)+x^2"), B0)
        ainf = asymptotics_at(parse("sqrt(x)+x^2"), BINF)
        assert (a0.exponent, a0.coefficient) == (0.5, 1.0)
        assert (ainf.exponent, ainf.coefficient) == (2.0, 1.0)

    def test_estimated_when_symbolic_cannot_see_it(self):
        # exp(log(x)) is x exactly, but not by leading-order rules
        a = asymptotics_at(parse("exp(log(x))"), B0)
        assert a.confidence == ESTIMATED
        assert a.exponent == pytest.approx(1.0, abs=1e-6)
        assert a.coefficient == pytest.approx(1.0, rel=1e-3)

    def test_finite_endpoint_uses_distance_variable(self):
        # near the lower endpoint 2, f(x) = x - 2 is u^1
        b = Boundary.lower_of(2.0, 5.0)
        a = asymptotics_at(parse("x-2"), b)
        assert (a.confidence, a.exponent, a.coefficient) == (EXACT, 1.0, 1.0)

    @pytest.mark.parametrize("source", [
        "x^2", "3*x^-1.5", "x/(2*x^0.5)^2", "(4*x^3)/(x^0.25*2)",
        "1/x", "x^0.5*x^-2*5",
    ])
    @pytest.mark.parametrize("boundary", [B0, BINF])
    def test_monomial_family_is_exact_and_tight(self, source, boundary):
        # on products/quotients/powers of monomials the symbolic route must
        # fire, and its (k, p) must match the function at the extreme points
        # of the fallback grid to 1e-6
        e = parse(source)
        a = asymptotics_at(e, boundary)
        assert a.confidence == EXACT
        f = compile_numpy(e)
        for j in (0, 23):
            u = boundary.scale * (2.0 ** j if boundary.infinite else 2.0 ** (-j - 1))
            x = boundary.to_x(u)
            ratio = float(f(np.array([x]))[0]) / (a.coefficient * u ** a.exponent)
            assert abs(ratio - 1.0) < 1e-6
