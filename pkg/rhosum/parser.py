# -*- coding: utf-8 -*-
"""Recursive-descent parser for the square-bracket sum grammar.

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | NAME | NAME '[' args ']' | '(' expr ')'
    args    := arg (',' arg)*
    arg     := expr | '{' expr (',' expr)* '}'

Calls: ``Sum[body, {k, lo, hi}]``, ``Product[body, {k, lo, hi}]``, ``Binomial[a, b]``,
``Pochhammer[a, b]``, ``Factorial[a]``, ``Power[base, exp]`` and the harmonic sums
``S[r1, ..., rm, {x1, ..., xm}, k]`` (scale list optional).  ``Infinity`` is an upper bound.
"""
import logging
import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

from sympy import QQ

from rhosum.errors import NonLinearBound, ParseError, UnboundVariable
from rhosum.sum_expr import (
    Binomial, BoundVar, Expr, Factorial, HarmonicSum, Infinity, IntConst, Param, Pochhammer, PowerProduct,
    Product, Quantifier, Sum, SumSpec, add, contains, div, free_names, is_integer_linear, linear_form, mul,
    neg, power, sub,
)

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^\[\]{}(),]))")
_INFINITY_NAMES = ("Infinity", "oo")
_CALLS = ("Sum", "Product", "Binomial", "Pochhammer", "Factorial", "Power", "S")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if not match:
            offset = len(text[position:]) - len(text[position:].lstrip())
            raise ParseError(f"unexpected character {text[position + offset]!r}", position + offset)
        kind = match.lastgroup
        tokens.append(Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:

    def __init__(self, text: str, params: Optional[Sequence[str]]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.declared = set(params) if params is not None else None
        self.bound: List[str] = []

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text:
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ParseError(f"expected {text!r} but found {found}", token.position)
        return self.advance()

    # --- grammar rules ---------------------------------------------------------------------

    def parse(self) -> Expr:
        expr = self.expr()
        if self.current.kind != "end":
            raise ParseError(f"unexpected {self.current.text!r}", self.current.position)
        return expr

    def expr(self) -> Expr:
        result = self.term()
        while self.current.text in ("+", "-"):
            op = self.advance().text
            right = self.term()
            result = add(result, right) if op == "+" else sub(result, right)
        return result

    def term(self) -> Expr:
        result = self.unary()
        while self.current.text in ("*", "/"):
            token = self.advance()
            right = self.unary()
            if token.text == "*":
                result = mul(result, right)
            else:
                try:
                    result = div(result, right)
                except ZeroDivisionError as ex:
                    raise ParseError("division by zero", token.position) from ex
        return result

    def unary(self) -> Expr:
        if self.current.text == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.current.text == "^":
            self.advance()
            exponent = self.unary()
            return power(base, exponent)
        return base

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "num":
            self.advance()
            return IntConst(QQ(int(token.text)))
        if token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if token.kind == "name":
            self.advance()
            if self.current.text == "[":
                return self.call(token)
            if token.text in _INFINITY_NAMES:
                return Infinity()
            return self.name(token)
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ParseError(f"unexpected {found}", token.position)

    def name(self, token: Token) -> Expr:
        if token.text in self.bound:
            return BoundVar(token.text)
        if self.declared is not None and token.text not in self.declared:
            raise UnboundVariable(f"unbound variable {token.text!r}", token.position)
        return Param(token.text)

    def call(self, token: Token) -> Expr:
        if token.text not in _CALLS:
            raise ParseError(f"unknown function {token.text!r}", token.position)
        self.expect("[")
        if token.text in ("Sum", "Product"):
            return self.binder(token)
        args = [self.arg()]
        while self.current.text == ",":
            self.advance()
            args.append(self.arg())
        self.expect("]")
        return self.build_call(token, args)

    def arg(self):
        if self.current.text == "{":
            self.advance()
            items = [self.expr()]
            while self.current.text == ",":
                self.advance()
                items.append(self.expr())
            self.expect("}")
            return items
        return self.expr()

    def binder(self, token: Token) -> Expr:
        # the body refers to the index which is only declared afterwards: parse the range first
        body_start = self.pos
        depth = 0
        while True:
            current = self.current
            if current.kind == "end":
                raise ParseError(f"unclosed {token.text}[", token.position)
            if current.text in "[({" and current.kind == "op":
                depth += 1
            elif current.text in "])}" and current.kind == "op":
                if depth == 0:
                    raise ParseError(f"missing range in {token.text}[", current.position)
                depth -= 1
            elif current.text == "," and depth == 0:
                break
            self.advance()
        self.advance()
        range_start = self.current.position
        self.expect("{")
        index_token = self.advance()
        if index_token.kind != "name":
            raise ParseError("expected a summation index", index_token.position)
        index = index_token.text
        self.expect(",")
        lower = self.expr()
        self.expect(",")
        upper = self.expr()
        self.expect("}")
        self.expect("]")
        end = self.pos
        for bound_expr in (lower, upper):
            if index in free_names(bound_expr):
                raise UnboundVariable(f"index {index!r} used in its own range", range_start)
        # parse the body with the index bound
        self.pos = body_start
        self.bound.append(index)
        body = self.expr()
        self.bound.pop()
        if self.current.text != ",":
            raise ParseError("expected ',' after the body", self.current.position)
        self.pos = end
        _check_bound(lower, range_start, allow_infinity=False)
        _check_bound(upper, range_start, allow_infinity=token.text == "Sum")
        if token.text == "Sum":
            return Sum(index, lower, upper, body)
        if _is_rational_in(body, index):
            return PowerProduct(index, lower, upper, body)
        return Product(index, lower, upper, body)

    def build_call(self, token: Token, args) -> Expr:
        name = token.text
        expected = {"Binomial": 2, "Pochhammer": 2, "Factorial": 1, "Power": 2}
        if name in expected and len(args) != expected[name]:
            raise ParseError(f"{name} expects {expected[name]} arguments", token.position)
        if any(isinstance(a, list) for a in args) and name != "S":
            raise ParseError(f"unexpected list argument to {name}", token.position)
        if name == "Binomial":
            return Binomial(args[0], args[1])
        if name == "Pochhammer":
            return Pochhammer(args[0], args[1])
        if name == "Factorial":
            return Factorial(args[0])
        if name == "Power":
            return power(args[0], args[1])
        return self.harmonic(token, args)

    def harmonic(self, token: Token, args) -> Expr:
        if len(args) < 2:
            raise ParseError("S expects weights and an upper argument", token.position)
        upper = args[-1]
        rest = args[:-1]
        scales = None
        if isinstance(rest[-1], list):
            scales = rest[-1]
            rest = rest[:-1]
        weights = []
        for weight in rest:
            if not isinstance(weight, IntConst) or weight.value.denominator != 1 or weight.value < 1:
                raise ParseError("harmonic sum weights must be positive integers", token.position)
            weights.append(int(weight.value))
        if scales is None:
            scales = [IntConst(QQ(1))] * len(weights)
        if len(scales) != len(weights) or not all(isinstance(x, IntConst) and x.value != 0 for x in scales):
            raise ParseError("harmonic sum scales must be nonzero rationals, one per weight", token.position)
        if not weights:
            raise ParseError("S expects at least one weight", token.position)
        if not is_integer_linear(linear_form(upper)):
            raise NonLinearBound("harmonic sum argument must be integer-linear", token.position)
        return HarmonicSum(tuple(weights), tuple(x.value for x in scales), upper)


def _check_bound(expr: Expr, position: int, allow_infinity: bool):
    if isinstance(expr, Infinity):
        if not allow_infinity:
            raise NonLinearBound("infinite bound not allowed here", position)
        return
    if not is_integer_linear(linear_form(expr)):
        raise NonLinearBound("summation bound is not integer-linear", position)


def _is_rational_in(expr: Expr, index: str) -> bool:
    """True if ``expr`` is built from +, -, *, / and integer powers only."""
    for node_type in (Sum, Product, PowerProduct, Binomial, Pochhammer, Factorial, HarmonicSum):
        if contains(expr, node_type):
            return False
    return index in free_names(expr)


def parse_expr(text: str, params: Optional[Sequence[str]] = None) -> Expr:
    """Parse a single expression."""
    return _Parser(text, params).parse()


def parse(text: str, params: Optional[Sequence[str]] = None, distinguished: Optional[str] = None) -> SumSpec:
    """Parse a nested definite sum into a :class:`SumSpec`.

    ``params`` declares the admissible free names; when omitted every free name is a parameter.
    The distinguished parameter defaults to the first free name of the outermost upper bound.
    """
    return spec_of(parse_expr(text, params), distinguished)


def spec_of(expr: Expr, distinguished: Optional[str] = None) -> SumSpec:
    """The :class:`SumSpec` of an already parsed expression."""
    quantifiers, factors = split_layers(expr)
    names = sorted(free_names(expr))
    if distinguished is None:
        candidates = sorted(free_names(quantifiers[0].upper)) if quantifiers else []
        distinguished = candidates[0] if candidates else (names[0] if names else "n")
    elif distinguished not in names:
        raise UnboundVariable(f"distinguished parameter {distinguished!r} does not occur")
    ordered = [distinguished] + [p for p in names if p != distinguished]
    logging.debug("parsed %d quantifiers, parameters %s", len(quantifiers), ordered)
    return SumSpec(expr, tuple(quantifiers), tuple(factors), tuple(ordered), distinguished,
                   {p: 0 for p in ordered})


def split_layers(expr: Expr):
    """Peel nested sums of the shape Sum[h1 * Sum[h2 * ..., ...], ...] into quantifiers and factors."""
    quantifiers: List[Quantifier] = []
    factors: List[Expr] = []
    current = expr
    while isinstance(current, Sum):
        quantifiers.append(Quantifier(current.index, current.lower, current.upper))
        split = _single_sum_factor(current.body)
        if split is None:
            factors.append(current.body)
            break
        rest, current = split
        factors.append(rest)
    if not quantifiers:
        factors.append(expr)
    return quantifiers, factors


def _single_sum_factor(expr: Expr):
    """For a product with exactly one Sum factor return (rest, sum)."""
    if isinstance(expr, Sum):
        return IntConst(QQ(1)), expr
    if not hasattr(expr, "factors"):
        return None
    sums = [f for f in expr.factors if isinstance(f, Sum)]
    if len(sums) != 1:
        return None
    rest = [f for f in expr.factors if f is not sums[0]]
    return mul(*rest), sums[0]
