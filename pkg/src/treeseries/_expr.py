"""Shared tokenizer, expression AST, and rational-function arithmetic for
the small text DSLs (dynamical systems, recurrences, differential equations,
species right-hand sides).

Expressions are parsed into a tiny AST; ``to_ratfunc`` lowers an AST to an
exact P/Q pair of multivariate polynomials over a caller-chosen variable
order.  Derivative markers (``y'``) become ``DVar`` nodes, which stay
symbolic so callers can solve for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NonlinearInDerivatives, ParseError
from .exactmath import MultiPolynomial


# ---------------------------------------------------------------------------
# tokens

_SYMBOLS = ("(", ")", "+", "-", "*", "/", "^", "=", ",", ";", ">=", "<=", ">", "<")


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "number" | "prime" | symbol itself | "end"
    text: str
    line: int
    column: int


def tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            tokens.append(Token("newline", "\n", line, col))
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < len(text) and text[i].isdigit():
                i += 1
            tokens.append(Token("number", text[start:i], line, col))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < len(text) and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(Token("name", text[start:i], line, col))
            col += i - start
            continue
        if ch == "'":
            tokens.append(Token("prime", "'", line, col))
            i += 1
            col += 1
            continue
        two = text[i : i + 2]
        if two in _SYMBOLS:
            tokens.append(Token(two, two, line, col))
            i += 2
            col += 2
            continue
        if ch in _SYMBOLS:
            tokens.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("end", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                tok.line,
                tok.column,
            )
        return self.next()

    def accept(self, kind: str):
        if self.peek().kind == kind:
            return self.next()
        return None

    def skip_newlines(self):
        while self.peek().kind == "newline":
            self.next()


# ---------------------------------------------------------------------------
# expression AST


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class DVar:
    """First derivative of a named power-series variable."""

    name: str


@dataclass(frozen=True)
class Call:
    """Application name(args); meaning is decided by the surrounding DSL."""

    name: str
    args: tuple


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class DivE:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Neg:
    arg: object


def parse_expression(ts: TokenStream, allow_calls=False):
    """Parse + - * / ^ with the usual precedence; primes bind to names."""

    def atom():
        tok = ts.peek()
        if tok.kind == "number":
            ts.next()
            return Const(Fraction(int(tok.text)))
        if tok.kind == "name":
            ts.next()
            if allow_calls and ts.peek().kind == "(":
                ts.next()
                args = []
                if ts.peek().kind != ")":
                    args.append(expr())
                    while ts.accept(","):
                        args.append(expr())
                ts.expect(")")
                node = Call(tok.text, tuple(args))
            else:
                node = Var(tok.text)
            primes = 0
            while ts.peek().kind == "prime":
                ts.next()
                primes += 1
            if primes:
                if not isinstance(node, Var):
                    raise ParseError("cannot differentiate this", tok.line, tok.column)
                if primes == 1:
                    node = DVar(node.name)
                else:
                    node = Var(node.name + "'" * primes)
            return node
        if tok.kind == "(":
            ts.next()
            inner = expr()
            ts.expect(")")
            primes = 0
            while ts.peek().kind == "prime":
                ts.next()
                primes += 1
            if primes:
                if isinstance(inner, Var) and primes == 1:
                    return DVar(inner.name)
                if isinstance(inner, Var):
                    return Var(inner.name + "'" * primes)
                raise ParseError("cannot differentiate this", tok.line, tok.column)
            return inner
        raise ParseError(
            f"expected an expression, found {tok.text or 'end of input'!r}",
            tok.line,
            tok.column,
        )

    def power():
        base = atom()
        if ts.peek().kind == "^":
            tok = ts.next()
            sign = 1
            if ts.accept("-"):
                sign = -1
            exp_tok = ts.expect("number")
            e = sign * int(exp_tok.text)
            if e < 0:
                raise ParseError("negative exponents not supported", tok.line, tok.column)
            return Pow(base, e)
        return base

    def unary():
        if ts.accept("-"):
            return Neg(unary())
        if ts.accept("+"):
            return unary()
        return power()

    def term():
        node = unary()
        while True:
            if ts.accept("*"):
                node = Mul(node, unary())
            elif ts.accept("/"):
                node = DivE(node, unary())
            else:
                return node

    def expr():
        node = term()
        while True:
            if ts.accept("+"):
                node = Add(node, term())
            elif ts.peek().kind == "-":
                ts.next()
                node = Add(node, Neg(term()))
            else:
                return node

    return expr()


def parse_expression_text(text: str, allow_calls=False):
    ts = TokenStream(tokenize(text))
    ts.skip_newlines()
    node = parse_expression(ts, allow_calls=allow_calls)
    ts.skip_newlines()
    tok = ts.peek()
    if tok.kind != "end":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.column)
    return node


# ---------------------------------------------------------------------------
# rational functions over a fixed variable order


class RatFunc:
    """P/Q with multivariate numerator and denominator, no reduction beyond
    normalizing the denominator's leading coefficient to 1."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPolynomial, den: MultiPolynomial = None):
        if den is None:
            den = MultiPolynomial.const(num.nvars, 1)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            den = MultiPolynomial.const(num.nvars, 1)
        else:
            lead = den.sorted_terms()[0][1]
            if lead != 1:
                num = num.scale(1 / lead)
                den = den.scale(1 / lead)
            if num.terms == den.terms:
                num = MultiPolynomial.const(num.nvars, 1)
                den = MultiPolynomial.const(num.nvars, 1)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, nvars: int, c) -> "RatFunc":
        return cls(MultiPolynomial.const(nvars, c))

    @classmethod
    def var(cls, nvars: int, i: int) -> "RatFunc":
        return cls(MultiPolynomial.var(nvars, i))

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def is_polynomial(self) -> bool:
        return self.den.constant_value() is not None

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.den.terms == other.den.terms:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def pow(self, e: int) -> "RatFunc":
        acc = RatFunc.const(self.num.nvars, 1)
        for _ in range(e):
            acc = acc * self
        return acc

    def __eq__(self, other):
        return isinstance(other, RatFunc) and (
            (self.num * other.den) == (other.num * self.den)
        )

    def __call__(self, point) -> Fraction:
        d = self.den(point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        return self.num(point) / d


def to_ratfunc(expr, var_index: dict, nvars: int) -> RatFunc:
    """Lower an AST to P/Q over the given variable order.  DVar and Call
    nodes are rejected; map them away before lowering."""
    if isinstance(expr, Const):
        return RatFunc.const(nvars, expr.value)
    if isinstance(expr, Var):
        if expr.name not in var_index:
            raise ParseError(f"unknown variable {expr.name!r}")
        return RatFunc.var(nvars, var_index[expr.name])
    if isinstance(expr, DVar):
        raise ParseError(f"derivative {expr.name}' not allowed here")
    if isinstance(expr, Call):
        raise ParseError(f"call {expr.name}(...) not allowed here")
    if isinstance(expr, Add):
        return to_ratfunc(expr.left, var_index, nvars) + to_ratfunc(
            expr.right, var_index, nvars
        )
    if isinstance(expr, Mul):
        return to_ratfunc(expr.left, var_index, nvars) * to_ratfunc(
            expr.right, var_index, nvars
        )
    if isinstance(expr, DivE):
        return to_ratfunc(expr.left, var_index, nvars) / to_ratfunc(
            expr.right, var_index, nvars
        )
    if isinstance(expr, Pow):
        return to_ratfunc(expr.base, var_index, nvars).pow(expr.exponent)
    if isinstance(expr, Neg):
        return -to_ratfunc(expr.arg, var_index, nvars)
    raise TypeError(f"not an expression node: {expr!r}")


def to_linear_in_derivatives(expr, var_index: dict, nvars: int):
    """Write an AST as  constant + sum coeff_v * v'  with RatFunc parts.

    Raises NonlinearInDerivatives when a derivative occurs inside a product
    of derivatives, a denominator, or a power.
    """
    if isinstance(expr, DVar):
        if expr.name not in var_index:
            raise ParseError(f"unknown variable {expr.name!r}")
        return RatFunc.const(nvars, 0), {expr.name: RatFunc.const(nvars, 1)}
    if isinstance(expr, (Const, Var)):
        return to_ratfunc(expr, var_index, nvars), {}
    if isinstance(expr, Add):
        c1, l1 = to_linear_in_derivatives(expr.left, var_index, nvars)
        c2, l2 = to_linear_in_derivatives(expr.right, var_index, nvars)
        out = dict(l1)
        for k, v in l2.items():
            out[k] = out[k] + v if k in out else v
        return c1 + c2, out
    if isinstance(expr, Neg):
        c, lin = to_linear_in_derivatives(expr.arg, var_index, nvars)
        return -c, {k: -v for k, v in lin.items()}
    if isinstance(expr, Mul):
        c1, l1 = to_linear_in_derivatives(expr.left, var_index, nvars)
        c2, l2 = to_linear_in_derivatives(expr.right, var_index, nvars)
        if l1 and l2:
            raise NonlinearInDerivatives("product of two derivative terms")
        if l2:
            c1, l1, c2, l2 = c2, l2, c1, l1
        return c1 * c2, {k: v * c2 for k, v in l1.items()}
    if isinstance(expr, DivE):
        c1, l1 = to_linear_in_derivatives(expr.left, var_index, nvars)
        c2, l2 = to_linear_in_derivatives(expr.right, var_index, nvars)
        if l2:
            raise NonlinearInDerivatives("derivative inside a denominator")
        return c1 / c2, {k: v / c2 for k, v in l1.items()}
    if isinstance(expr, Pow):
        c, lin = to_linear_in_derivatives(expr.base, var_index, nvars)
        if lin:
            if expr.exponent == 1:
                return c, lin
            raise NonlinearInDerivatives("derivative inside a power")
        return c.pow(expr.exponent), {}
    raise TypeError(f"not an expression node: {expr!r}")


def differentiate(expr):
    """d/dx of an AST over power-series variables: Var(v) -> DVar(v); the
    distinguished name "x" differentiates to 1."""
    if isinstance(expr, Const):
        return Const(Fraction(0))
    if isinstance(expr, Var):
        if expr.name == "x":
            return Const(Fraction(1))
        return DVar(expr.name)
    if isinstance(expr, DVar):
        raise NonlinearInDerivatives("second derivatives are not supported")
    if isinstance(expr, Add):
        return Add(differentiate(expr.left), differentiate(expr.right))
    if isinstance(expr, Neg):
        return Neg(differentiate(expr.arg))
    if isinstance(expr, Mul):
        return Add(
            Mul(differentiate(expr.left), expr.right),
            Mul(expr.left, differentiate(expr.right)),
        )
    if isinstance(expr, DivE):
        # (a/b)' = a'/b - a b'/b^2
        return Add(
            DivE(differentiate(expr.left), expr.right),
            Neg(
                DivE(
                    Mul(expr.left, differentiate(expr.right)),
                    Pow(expr.right, 2),
                )
            ),
        )
    if isinstance(expr, Pow):
        if expr.exponent == 0:
            return Const(Fraction(0))
        return Mul(
            Mul(Const(Fraction(expr.exponent)), Pow(expr.base, expr.exponent - 1)),
            differentiate(expr.base),
        )
    raise TypeError(f"not an expression node: {expr!r}")


def expr_variables(expr, out=None):
    if out is None:
        out = set()
    if isinstance(expr, (Var, DVar)):
        out.add(expr.name)
    elif isinstance(expr, Add) or isinstance(expr, Mul) or isinstance(expr, DivE):
        expr_variables(expr.left, out)
        expr_variables(expr.right, out)
    elif isinstance(expr, Neg):
        expr_variables(expr.arg, out)
    elif isinstance(expr, Pow):
        expr_variables(expr.base, out)
    elif isinstance(expr, Call):
        for a in expr.args:
            expr_variables(a, out)
    return out
