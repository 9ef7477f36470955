"""Symbolic recipes for meromorphic modular forms and their tiny DSL.

A recipe is an expression tree over the atoms

    E<k>          Eisenstein series E_k(tau)          (k even, >= 2)
    E<k>(d t)     E_k at the scaled argument d*tau
    eta(d t)^r    Dedekind eta power eta(d tau)^r
    integers      constants

combined with + - * / ^ and parentheses, plus theta(...) for the operator
(1/2 pi i) d/dtau.  't' denotes tau; every scale d must divide the level
the recipe is attached to.  Examples:

    E4
    E4(2t) + eta(2t)^16 / eta(t)^8
    -theta(E4) / E4
    (E4^3 - E6^2) / 1728
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import qseries as qs


class RecipeError(ValueError):
    """Parse or validation error; carries the offending position when known."""

    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


# -- expression tree ---------------------------------------------------------

@dataclass(frozen=True)
class Eis:
    k: int
    d: int = 1


@dataclass(frozen=True)
class Eta:
    d: int
    r: int


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Theta:
    arg: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


def scales(expr) -> set[int]:
    """All argument scales d appearing in the tree."""
    if isinstance(expr, Eis):
        return {expr.d}
    if isinstance(expr, Eta):
        return {expr.d}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, (Theta, Neg)):
        return scales(expr.arg)
    if isinstance(expr, Pow):
        return scales(expr.base)
    return scales(expr.left) | scales(expr.right)


def weight(expr) -> Fraction | None:
    """Modular weight of the tree, or None when summands disagree.

    theta raises the weight by 2 in the quasimodular bookkeeping sense; a
    constant is weight 0 except that it merges freely into sums (weight of
    f + c is reported as None unless both sides agree).
    """
    if isinstance(expr, Eis):
        return Fraction(expr.k)
    if isinstance(expr, Eta):
        return Fraction(expr.r, 2)
    if isinstance(expr, Const):
        return Fraction(0)
    if isinstance(expr, Neg):
        return weight(expr.arg)
    if isinstance(expr, Theta):
        w = weight(expr.arg)
        return None if w is None else w + 2
    if isinstance(expr, Pow):
        w = weight(expr.base)
        return None if w is None else w * expr.exponent
    wl, wr = weight(expr.left), weight(expr.right)
    if wl is None or wr is None:
        return None
    if expr.op in "+-":
        return wl if wl == wr else None
    if expr.op == "*":
        return wl + wr
    return wl - wr


def build(expr, n_max: int) -> qs.QSeries:
    """Exact q-expansion of the tree to truncation order n_max.

    Multiplicative chains are flattened so that all eta factors expand as a
    single eta quotient: the integrality requirement applies to the total
    q-valuation sum(d * r_d)/24, not to each factor alone.
    """
    if isinstance(expr, BinOp) and expr.op in "+-":
        left = build(expr.left, n_max)
        right = build(expr.right, n_max)
        return left + right if expr.op == "+" else left - right
    if isinstance(expr, Theta):
        return qs.theta(build(expr.arg, n_max))
    if isinstance(expr, Const):
        return qs.constant(expr.value, n_max)
    if isinstance(expr, Eis):
        return qs.eisenstein(expr.k, max(n_max // expr.d, 1)).dilate(expr.d).truncate(n_max)
    return _build_multiplicative(expr, n_max)


def _mult_factors(expr, e: int = 1):
    """Flatten a multiplicative subtree into (node, exponent) factors."""
    if isinstance(expr, BinOp) and expr.op == "*":
        yield from _mult_factors(expr.left, e)
        yield from _mult_factors(expr.right, e)
    elif isinstance(expr, BinOp) and expr.op == "/":
        yield from _mult_factors(expr.left, e)
        yield from _mult_factors(expr.right, -e)
    elif isinstance(expr, Pow):
        yield from _mult_factors(expr.base, e * expr.exponent)
    elif isinstance(expr, Neg):
        yield (Const(Fraction(-1)), e)
        yield from _mult_factors(expr.arg, e)
    else:
        yield (expr, e)


def _build_multiplicative(expr, n_max: int, _retry: bool = True) -> qs.QSeries:
    eta_pairs: dict[int, int] = {}
    scalar = Fraction(1)
    others: list[tuple[object, int]] = []
    for node, e in _mult_factors(expr):
        if isinstance(node, Eta):
            eta_pairs[node.d] = eta_pairs.get(node.d, 0) + node.r * e
        elif isinstance(node, Const):
            scalar *= Fraction(node.value) ** e
        else:
            others.append((node, e))
    out = None
    if any(eta_pairs.values()):
        out = qs.eta_quotient(sorted(eta_pairs.items()), n_max)
    for node, e in others:
        factor = build(node, n_max) ** e
        out = factor if out is None else (out * factor)
    if out is None:
        return qs.constant(scalar, n_max)
    if scalar != 1:
        out = out * scalar
    if out.n_max < n_max and _retry:
        # poles shortened the reliable range; rebuild with the deficit added
        return _build_multiplicative(expr, 2 * n_max - out.n_max, _retry=False).truncate(n_max)
    return out.truncate(n_max)


@dataclass(frozen=True)
class FormRecipe:
    """A symbolic modular form: expression tree plus level and weight.

    Every atom scale must divide the level, and the weight computed from
    the tree must be a (well-defined) even integer.
    """

    expr: object
    level: int
    weight: int

    @classmethod
    def from_expr(cls, expr, level: int) -> "FormRecipe":
        if level < 1:
            raise RecipeError("level must be >= 1")
        for d in scales(expr):
            if level % d:
                raise RecipeError(f"argument scale {d} does not divide level {level}")
        w = weight(expr)
        if w is None:
            raise RecipeError("summands of the recipe have mismatched weights")
        if w.denominator != 1 or w.numerator % 2:
            raise RecipeError(f"recipe weight {w} is not an even integer")
        return cls(expr=expr, level=level, weight=int(w))

    @classmethod
    def parse(cls, text: str, level: int) -> "FormRecipe":
        return cls.from_expr(parse_expr(text), level)

    def series(self, n_max: int) -> qs.QSeries:
        return build(self.expr, n_max)


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(eta|theta|E\d+|t)|([()+\-*/^]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == m.start():
            if text[pos:].strip():
                raise RecipeError(f"unexpected character {text[pos]!r}", pos)
            break
        if m.group(1):
            out.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2):
            out.append(("name", m.group(2), m.start(2)))
        elif m.group(3):
            out.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, v, pos = self.next()
        if kind != "op" or v != op:
            raise RecipeError(f"expected {op!r}", pos)

    def parse(self):
        expr = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise RecipeError("trailing input", pos)
        return expr

    def expr(self):
        kind, v, _ = self.peek()
        negate = False
        if kind == "op" and v in "+-":
            self.next()
            negate = v == "-"
        node = self.term()
        if negate:
            node = Neg(node)
        while True:
            kind, v, _ = self.peek()
            if kind == "op" and v in "+-":
                self.next()
                node = BinOp(v, node, self.term())
            else:
                return node

    def term(self):
        node = self.power()
        while True:
            kind, v, _ = self.peek()
            if kind == "op" and v in "*/":
                self.next()
                node = BinOp(v, node, self.power())
            else:
                return node

    def power(self):
        node = self.atom()
        kind, v, _ = self.peek()
        if kind == "op" and v == "^":
            self.next()
            sign = 1
            kind, v, pos = self.next()
            if kind == "op" and v == "-":
                sign = -1
                kind, v, pos = self.next()
            if kind != "int":
                raise RecipeError("exponent must be an integer", pos)
            node = Pow(node, sign * v)
        return node

    def scaled_argument(self) -> int:
        """Parse '(d t)' or '(t)'; returns d."""
        self.expect_op("(")
        kind, v, pos = self.next()
        d = 1
        if kind == "int":
            d = v
            kind, v, pos = self.next()
        if kind != "name" or v != "t":
            raise RecipeError("expected 't' in scaled argument", pos)
        self.expect_op(")")
        return d

    def atom(self):
        kind, v, pos = self.next()
        if kind == "int":
            return Const(Fraction(v))
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and v == "-":
            return Neg(self.atom())
        if kind == "name":
            if v == "theta":
                self.expect_op("(")
                node = self.expr()
                self.expect_op(")")
                return Theta(node)
            if v == "eta":
                d = self.scaled_argument()
                kind2, v2, _ = self.peek()
                r = 1
                if kind2 == "op" and v2 == "^":
                    self.next()
                    sign = 1
                    kind3, v3, pos3 = self.next()
                    if kind3 == "op" and v3 == "-":
                        sign = -1
                        kind3, v3, pos3 = self.next()
                    if kind3 != "int":
                        raise RecipeError("eta exponent must be an integer", pos3)
                    r = sign * v3
                return Eta(d, r)
            if v.startswith("E"):
                k = int(v[1:])
                kind2, v2, _ = self.peek()
                d = 1
                if kind2 == "op" and v2 == "(":
                    d = self.scaled_argument()
                return Eis(k, d)
            raise RecipeError(f"unexpected name {v!r}", pos)
        raise RecipeError("expected an atom", pos)


def parse_expr(text: str):
    """Parse the recipe DSL into an expression tree."""
    if not text.strip():
        raise RecipeError("empty recipe")
    return _Parser(text).parse()
