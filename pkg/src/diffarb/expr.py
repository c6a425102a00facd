"""Closed-form expression language for drift/volatility coefficients.

A small AST (literals, the variable x, +, -, *, /, powers with constant
exponent, exp, log, sqrt, abs) with a strict scalar evaluator, a vectorised
non-strict evaluator for numpy arrays, and leading power-law asymptotics at
interval endpoints.  The grammar is deliberately tiny so that the symbolic
asymptotics cover every coefficient family the classifier needs; anything
fancier falls back to a conservative log-log regression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow",
    "Exp", "Log", "Sqrt", "Abs",
    "ParseError", "EvalError",
    "parse", "evaluate", "to_source", "fold_constant", "is_zero_expr",
    "compile_numpy", "math_source", "numba_source",
    "Boundary", "Asymptotics", "EXACT", "ESTIMATED", "UNAVAILABLE",
    "asymptotics_at",
]


class ParseError(ValueError):
    """Raised on malformed source; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ArithmeticError):
    """Domain error or overflow while evaluating an expression."""

    def __init__(self, message: str, x: float):
        super().__init__(f"{message} at x={x!r}")
        self.x = x


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float  # constant, enforced by the parser


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class Log(Expr):
    arg: Expr


@dataclass(frozen=True)
class Sqrt(Expr):
    arg: Expr


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr


_FUNCTIONS = {"exp": Exp, "log": Log, "sqrt": Sqrt, "abs": Abs}


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class _Tokenizer:
    def __init__(self, source: str):
        self.src = source
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.src):
            return None, self.pos
        return self.src[self.pos], self.pos

    def take_number(self):
        start = self.pos
        src = self.src
        i = start
        while i < len(src) and (src[i].isdigit() or src[i] == "."):
            i += 1
        if i < len(src) and src[i] in "eE":
            j = i + 1
            if j < len(src) and src[j] in "+-":
                j += 1
            if j < len(src) and src[j].isdigit():
                while j < len(src) and src[j].isdigit():
                    j += 1
                i = j
        text = src[start:i]
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"invalid number {text!r}", start) from None
        self.pos = i
        return value

    def take_ident(self):
        start = self.pos
        src = self.src
        i = start
        while i < len(src) and (src[i].isalnum() or src[i] == "_"):
            i += 1
        self.pos = i
        return src[start:i], start


class _Parser:
    def __init__(self, source: str):
        self.tok = _Tokenizer(source)

    def parse(self) -> Expr:
        e = self.expr()
        ch, off = self.tok.peek()
        if ch is not None:
            raise ParseError(f"unexpected {ch!r}", off)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            ch, _ = self.tok.peek()
            if ch == "+":
                self.tok.pos += 1
                left = Add(left, self.term())
            elif ch == "-":
                self.tok.pos += 1
                left = Sub(left, self.term())
            else:
                return left

    def term(self) -> Expr:
        left = self.unary()
        while True:
            ch, _ = self.tok.peek()
            if ch == "*":
                self.tok.pos += 1
                left = Mul(left, self.unary())
            elif ch == "/":
                self.tok.pos += 1
                left = Div(left, self.unary())
            else:
                return left

    def unary(self) -> Expr:
        ch, _ = self.tok.peek()
        if ch == "-":
            self.tok.pos += 1
            return Neg(self.unary())
        if ch == "+":
            self.tok.pos += 1
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        ch, off = self.tok.peek()
        if ch == "^":
            self.tok.pos += 1
            exponent = self.unary()  # right-associative, binds tighter than unary minus
            c = fold_constant(exponent)
            if c is None:
                raise ParseError("power exponent must be a real constant", off)
            return Pow(base, c)
        return base

    def atom(self) -> Expr:
        ch, off = self.tok.peek()
        if ch is None:
            raise ParseError("unexpected end of input", off)
        if ch.isdigit() or ch == ".":
            return Num(self.tok.take_number())
        if ch.isalpha() or ch == "_":
            name, start = self.tok.take_ident()
            if name == "x":
                return Var()
            if name in _FUNCTIONS:
                ch2, off2 = self.tok.peek()
                if ch2 != "(":
                    raise ParseError(f"{name} expects one parenthesised argument", off2)
                self.tok.pos += 1
                arg = self.expr()
                ch3, off3 = self.tok.peek()
                if ch3 == ",":
                    raise ParseError(f"{name} takes exactly one argument", off3)
                if ch3 != ")":
                    raise ParseError("expected ')'", off3)
                self.tok.pos += 1
                return _FUNCTIONS[name](arg)
            raise ParseError(f"unknown identifier {name!r}", start)
        if ch == "(":
            self.tok.pos += 1
            e = self.expr()
            ch2, off2 = self.tok.peek()
            if ch2 != ")":
                raise ParseError("expected ')'", off2)
            self.tok.pos += 1
            return e
        raise ParseError(f"unexpected {ch!r}", off)


def parse(source: str) -> Expr:
    """Parse expression text.  Precedence: ^  >  unary -  >  * /  >  + -."""
    return _Parser(source).parse()


# --------------------------------------------------------------------------
# Printing and folding
# --------------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def to_source(e: Expr) -> str:
    """Render to text that reparses to a structurally identical tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        if _prec(e.arg) < 4:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, (Add, Sub, Mul, Div)):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
        lhs = to_source(e.left)
        rhs = to_source(e.right)
        if _prec(e.left) < _prec(e):
            lhs = f"({lhs})"
        # right operand needs parens at equal precedence: a - (b + c), a / (b*c)
        if _prec(e.right) <= _prec(e):
            rhs = f"({rhs})"
        return f"{lhs} {op} {rhs}"
    if isinstance(e, Pow):
        base = to_source(e.base)
        if _prec(e.base) <= 4:
            base = f"({base})"
        exp = repr(e.exponent)
        return f"{base}^{exp}" if e.exponent >= 0 else f"{base}^({exp})"
    if isinstance(e, (Exp, Log, Sqrt, Abs)):
        name = type(e).__name__.lower()
        return f"{name}({to_source(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


def fold_constant(e: Expr) -> float | None:
    """Value of a constant subtree, or None if it depends on x."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return None
    if isinstance(e, Neg):
        v = fold_constant(e.arg)
        return None if v is None else -v
    if isinstance(e, (Add, Sub, Mul, Div)):
        a = fold_constant(e.left)
        b = fold_constant(e.right)
        if a is None or b is None:
            return None
        try:
            return {Add: lambda: a + b, Sub: lambda: a - b,
                    Mul: lambda: a * b, Div: lambda: a / b}[type(e)]()
        except ZeroDivisionError:
            return None
    if isinstance(e, Pow):
        a = fold_constant(e.base)
        if a is None:
            return None
        try:
            return math.pow(a, e.exponent)
        except (ValueError, OverflowError):
            return None
    if isinstance(e, (Exp, Log, Sqrt, Abs)):
        a = fold_constant(e.arg)
        if a is None:
            return None
        try:
            return {Exp: math.exp, Log: math.log, Sqrt: math.sqrt, Abs: abs}[type(e)](a)
        except (ValueError, OverflowError):
            return None
    raise TypeError(f"unknown node {e!r}")


def is_zero_expr(e: Expr) -> bool:
    """True when the tree folds to the constant zero."""
    v = fold_constant(e)
    return v is not None and v == 0.0


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def evaluate(e: Expr, x: float) -> float:
    """Strict scalar evaluation; raises EvalError on any domain problem
    or overflow rather than returning a silent infinity."""
    try:
        v = _eval(e, float(x))
    except ZeroDivisionError:
        raise EvalError("division by zero", x) from None
    except ValueError as exc:
        raise EvalError(str(exc) or "math domain error", x) from None
    except OverflowError:
        raise EvalError("overflow", x) from None
    if not math.isfinite(v):
        raise EvalError("non-finite result", x)
    return v


def _eval(e: Expr, x: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, Add):
        return _eval(e.left, x) + _eval(e.right, x)
    if isinstance(e, Sub):
        return _eval(e.left, x) - _eval(e.right, x)
    if isinstance(e, Mul):
        return _eval(e.left, x) * _eval(e.right, x)
    if isinstance(e, Div):
        return _eval(e.left, x) / _eval(e.right, x)
    if isinstance(e, Pow):
        return math.pow(_eval(e.base, x), e.exponent)
    if isinstance(e, Exp):
        return math.exp(_eval(e.arg, x))
    if isinstance(e, Log):
        return math.log(_eval(e.arg, x))
    if isinstance(e, Sqrt):
        return math.sqrt(_eval(e.arg, x))
    if isinstance(e, Abs):
        return abs(_eval(e.arg, x))
    raise TypeError(f"unknown node {e!r}")


def _py_source(e: Expr, ns: str, ieee_div: bool = False) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{_py_source(e.arg, ns, ieee_div)})"
    if isinstance(e, Div) and ieee_div:
        return (f"{ns}.divide({_py_source(e.left, ns, ieee_div)}, "
                f"{_py_source(e.right, ns, ieee_div)})")
    if isinstance(e, (Add, Sub, Mul, Div)):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
        return (f"({_py_source(e.left, ns, ieee_div)} {op} "
                f"{_py_source(e.right, ns, ieee_div)})")
    if isinstance(e, Pow):
        return f"({_py_source(e.base, ns, ieee_div)} ** {repr(e.exponent)})"
    if isinstance(e, (Exp, Log, Sqrt)):
        fn = type(e).__name__.lower()
        return f"{ns}.{fn}({_py_source(e.arg, ns, ieee_div)})"
    if isinstance(e, Abs):
        return f"abs({_py_source(e.arg, ns, ieee_div)})"
    raise TypeError(f"unknown node {e!r}")


def math_source(e: Expr) -> str:
    """Scalar python source for the expression, using the math module.
    No error handling; callers own the domain checks."""
    return _py_source(e, "math")


def numba_source(e: Expr) -> str:
    """Scalar source with IEEE semantics under a jit compiler: division via
    np.divide so domain problems surface as nan/inf instead of raising."""
    return _py_source(e, "np", ieee_div=True)


def compile_numpy(e: Expr):
    """Vectorised non-strict evaluator: maps float arrays to float arrays,
    domain errors flow through as nan/inf."""
    src = _py_source(e, "np")
    code = compile(f"lambda x: ({src}) + 0.0*x", "<expr>", "eval")
    raw = eval(code, {"np": np, "abs": np.abs})

    def f(x):
        arr = np.asarray(x, dtype=np.float64)
        with np.errstate(all="ignore"):
            return np.asarray(raw(arr), dtype=np.float64)

    return f


# --------------------------------------------------------------------------
# Endpoint asymptotics
# --------------------------------------------------------------------------

EXACT = "exact"
ESTIMATED = "estimated"
UNAVAILABLE = "unavailable"

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class Boundary:
    """One endpoint of an open interval, with a safe sampling scale for
    numeric probes (largest distance-to-endpoint that stays inside J)."""

    side: str           # "lower" | "upper"
    value: float        # may be -inf / +inf
    scale: float        # sampling scale in the local variable

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    @staticmethod
    def lower_of(l: float, r: float) -> "Boundary":
        return Boundary(LOWER, l, _local_scale(l, r))

    @staticmethod
    def upper_of(l: float, r: float) -> "Boundary":
        return Boundary(UPPER, r, _local_scale(r, l))

    def to_x(self, u):
        """Map the local variable (u -> 0+ at finite endpoints, u -> +inf at
        infinite ones) back to the x coordinate."""
        if self.infinite:
            return u if self.value > 0 else -u
        return self.value + u if self.side == LOWER else self.value - u


def _local_scale(endpoint: float, other: float) -> float:
    if math.isinf(endpoint):
        base = 1.0 if math.isinf(other) else max(1.0, 2.0 * abs(other))
        return base
    if math.isinf(other):
        return max(abs(endpoint), 1.0) / 4.0
    return abs(other - endpoint) / 4.0


@dataclass(frozen=True)
class Asymptotics:
    """Leading behaviour f ~ coefficient * u**exponent in the local variable
    u of the endpoint (distance to a finite endpoint, |x| at an infinite one)."""

    boundary: Boundary
    exponent: float
    coefficient: float
    confidence: str  # EXACT | ESTIMATED | UNAVAILABLE

    @property
    def usable(self) -> bool:
        return self.confidence != UNAVAILABLE


class _PL:
    """Internal power-law value for the symbolic walk: k * u**p with k != 0."""

    __slots__ = ("k", "p")

    def __init__(self, k: float, p: float):
        self.k = k
        self.p = p


_ZERO = "zero"  # marker for the identically-vanishing leading term


def _sym(e: Expr, b: Boundary):
    """Returns _PL, _ZERO, or None (not representable as a power law)."""
    if isinstance(e, Num):
        return _ZERO if e.value == 0.0 else _PL(e.value, 0.0)
    if isinstance(e, Var):
        if b.infinite:
            return _PL(1.0 if b.value > 0 else -1.0, 1.0)
        if b.value == 0.0:
            return _PL(1.0 if b.side == LOWER else -1.0, 1.0)
        return _PL(b.value, 0.0)
    if isinstance(e, Neg):
        a = _sym(e.arg, b)
        if a is None or a is _ZERO:
            return a
        return _PL(-a.k, a.p)
    if isinstance(e, Abs):
        a = _sym(e.arg, b)
        if a is None or a is _ZERO:
            return a
        return _PL(abs(a.k), a.p)
    if isinstance(e, (Add, Sub)):
        a = _sym(e.left, b)
        r = _sym(e.right, b)
        if a is None or r is None:
            return None
        if isinstance(e, Sub):
            r = _ZERO if r is _ZERO else _PL(-r.k, r.p)
        if a is _ZERO:
            return r
        if r is _ZERO:
            return a
        if a.p == r.p:
            k = a.k + r.k
            return _PL(k, a.p) if k != 0.0 else None  # leading terms cancel
        dominant_is_a = (a.p < r.p) if not b.infinite else (a.p > r.p)
        return a if dominant_is_a else r
    if isinstance(e, Mul):
        a = _sym(e.left, b)
        r = _sym(e.right, b)
        if a is None or r is None:
            return None
        if a is _ZERO or r is _ZERO:
            return _ZERO
        return _PL(a.k * r.k, a.p + r.p)
    if isinstance(e, Div):
        a = _sym(e.left, b)
        r = _sym(e.right, b)
        if a is None or r is None or r is _ZERO:
            return None
        if a is _ZERO:
            return _ZERO
        return _PL(a.k / r.k, a.p - r.p)
    if isinstance(e, Pow):
        a = _sym(e.base, b)
        if a is None:
            return None
        c = e.exponent
        if a is _ZERO:
            return _ZERO if c > 0 else None
        if a.k > 0:
            return _PL(math.pow(a.k, c), a.p * c)
        if c == int(c):
            return _PL(math.pow(abs(a.k), c) * (-1.0) ** int(c), a.p * c)
        return None
    if isinstance(e, Sqrt):
        a = _sym(e.arg, b)
        if a is None or a is _ZERO:
            return a
        if a.k <= 0:
            return None
        return _PL(math.sqrt(a.k), a.p / 2.0)
    if isinstance(e, Exp):
        a = _sym(e.arg, b)
        if a is None:
            return None
        if a is _ZERO:
            return _PL(1.0, 0.0)
        vanishes = (a.p > 0) if not b.infinite else (a.p < 0)
        if vanishes:
            return _PL(1.0, 0.0)
        if a.p == 0.0:
            try:
                return _PL(math.exp(a.k), 0.0)
            except OverflowError:
                return None
        return None  # argument diverges: not a power law
    if isinstance(e, Log):
        a = _sym(e.arg, b)
        if a is None or a is _ZERO:
            return None
        if a.p == 0.0 and a.k > 0 and a.k != 1.0:
            return _PL(math.log(a.k), 0.0)
        return None  # log-divergence, or a limit of 1 reached at unknown rate
    raise TypeError(f"unknown node {e!r}")


# Numeric fallback configuration: 24 geometric points with ratio 2, fit
# accepted when the max log-residual stays below 1e-3.  Conservative on
# purpose: anything non-power-law must land in UNAVAILABLE.
_FALLBACK_POINTS = 24
_FALLBACK_RESIDUAL = 1e-3


def _fallback_grid(b: Boundary) -> np.ndarray:
    j = np.arange(_FALLBACK_POINTS, dtype=np.float64)
    if b.infinite:
        return b.scale * 2.0 ** j
    return b.scale * 2.0 ** (-j - 1)


def _estimate(e: Expr, b: Boundary) -> Asymptotics:
    u = _fallback_grid(b)
    x = b.to_x(u)
    f = compile_numpy(e)
    vals = f(x)
    if not np.all(np.isfinite(vals)):
        return Asymptotics(b, math.nan, math.nan, UNAVAILABLE)
    if np.all(vals == 0.0):
        return Asymptotics(b, math.nan, math.nan, UNAVAILABLE)
    sign = np.sign(vals)
    if np.any(sign == 0.0) or not (np.all(sign > 0) or np.all(sign < 0)):
        return Asymptotics(b, math.nan, math.nan, UNAVAILABLE)
    y = np.log(np.abs(vals))
    t = np.log(u)
    design = np.column_stack([t, np.ones_like(t)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = np.max(np.abs(design @ np.array([slope, intercept]) - y))
    if not math.isfinite(resid) or resid > _FALLBACK_RESIDUAL:
        return Asymptotics(b, math.nan, math.nan, UNAVAILABLE)
    coeff = float(sign[0]) * math.exp(float(intercept))
    return Asymptotics(b, float(slope), coeff, ESTIMATED)


def asymptotics_at(e: Expr, boundary: Boundary) -> Asymptotics:
    """Leading power-law behaviour of the expression at an endpoint.

    Exact when the tree is a product/quotient/power of monomial-equivalent
    pieces near the endpoint; otherwise estimated from a geometric sample
    grid, or unavailable when no clean power law fits.
    """
    pl = _sym(e, boundary)
    if isinstance(pl, _PL) and math.isfinite(pl.p) and math.isfinite(pl.k) and pl.k != 0.0:
        return Asymptotics(boundary, pl.p, pl.k, EXACT)
    return _estimate(e, boundary)
