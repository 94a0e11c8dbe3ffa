# -*- coding: utf-8 -*-
"""Brute-force exact evaluation of sum expressions.

This is the independent oracle every symbolic result is checked against.  It sums
directly, with the conventions: empty sums are 0, empty products are 1,
Binomial[a, b] = a(a-1)...(a-b+1)/b! for integer b >= 0 and 0 for b < 0.
"""
import logging
import math
from threading import Lock
from typing import Dict, List, Mapping, Tuple

from sympy import QQ

from rhosum.errors import InfiniteBound, OracleError, UnboundName
from rhosum.exact_arith import BigRat
from rhosum.sum_expr import (
    Add, Binomial, BoundVar, Div, Expr, Factorial, HarmonicSum, Infinity, IntConst, Mul, Neg, Param,
    Pochhammer, Pow, PowerProduct, Product, Sum, SumSpec, free_names,
)

"""Cached values are dropped once the cache holds this many entries."""
CACHE_LIMIT = 500_000


def as_int(value: BigRat, what: str) -> int:
    if value.denominator != 1:
        raise OracleError(f"{what} must be an integer, got {value}")
    return int(value.numerator)


def binomial(top: BigRat, bottom: int) -> BigRat:
    if bottom < 0:
        return QQ(0)
    if top.denominator == 1 and top >= 0:
        return QQ(math.comb(int(top), bottom)) if bottom <= top else QQ(0)
    result = QQ(1)
    for i in range(bottom):
        result *= top - i
    return result / math.factorial(bottom)


def pochhammer(base: BigRat, length: int) -> BigRat:
    result = QQ(1)
    if length >= 0:
        for i in range(length):
            result *= base + i
        return result
    for i in range(1, -length + 1):
        result *= base - i
    if result == 0:
        raise OracleError(f"Pochhammer[{base}, {length}] is undefined")
    return 1 / result


class _HarmonicTables:
    """Growing tables of nested harmonic sums, keyed by (weights, scales)."""

    def __init__(self):
        self._tables: Dict[Tuple, List[BigRat]] = {}
        self._lock = Lock()

    def value(self, weights: Tuple[int, ...], scales: Tuple[BigRat, ...], upper: int) -> BigRat:
        if upper <= 0:
            return QQ(0)
        with self._lock:
            return self._extend(weights, scales, upper)[upper]

    def _extend(self, weights, scales, upper) -> List[BigRat]:
        key = (weights, scales)
        table = self._tables.setdefault(key, [QQ(0)])
        if len(table) > upper:
            return table
        inner = self._extend(weights[1:], scales[1:], upper) if len(weights) > 1 else None
        weight, scale = weights[0], QQ(scales[0])
        for i in range(len(table), upper + 1):
            term = scale ** i / QQ(i) ** weight
            if inner is not None:
                term *= inner[i]
            table.append(table[-1] + term)
        return table


_HARMONIC = _HarmonicTables()


def harmonic(weights: Tuple[int, ...], scales: Tuple[BigRat, ...], upper: int) -> BigRat:
    """S_{weights}(scales; upper)."""
    return _HARMONIC.value(tuple(weights), tuple(QQ(x) for x in scales), upper)


class Oracle:
    """Memoizing evaluator; safe to share between threads."""

    def __init__(self):
        self._cache: Dict[Tuple, BigRat] = {}

    def eval(self, expr: Expr, bindings: Mapping[str, int]) -> BigRat:
        if isinstance(expr, IntConst):
            return expr.value
        if isinstance(expr, (Param, BoundVar)):
            try:
                return QQ(bindings[expr.name])
            except KeyError as ex:
                raise UnboundName(f"no value bound for {expr.name!r}") from ex
        if isinstance(expr, Add):
            return sum((self.eval(term, bindings) for term in expr.terms), QQ(0))
        if isinstance(expr, Mul):
            result = QQ(1)
            for factor in expr.factors:
                result *= self.eval(factor, bindings)
                if result == 0:
                    break
            return result
        if isinstance(expr, Neg):
            return -self.eval(expr.arg, bindings)
        if isinstance(expr, Div):
            den = self.eval(expr.den, bindings)
            if den == 0:
                raise OracleError("division by zero")
            return self.eval(expr.num, bindings) / den
        if isinstance(expr, Pow):
            base = self.eval(expr.base, bindings)
            exponent = as_int(self.eval(expr.exponent, bindings), "exponent")
            if base == 0 and exponent < 0:
                raise OracleError("zero to a negative power")
            return base ** exponent
        if isinstance(expr, Binomial):
            return binomial(self.eval(expr.top, bindings), as_int(self.eval(expr.bottom, bindings), "binomial bottom"))
        if isinstance(expr, Pochhammer):
            return pochhammer(self.eval(expr.base, bindings), as_int(self.eval(expr.length, bindings), "length"))
        if isinstance(expr, Factorial):
            arg = as_int(self.eval(expr.arg, bindings), "factorial argument")
            if arg < 0:
                raise OracleError("factorial of a negative integer")
            return QQ(math.factorial(arg))
        if isinstance(expr, HarmonicSum):
            return harmonic(expr.weights, expr.scales, as_int(self.eval(expr.upper, bindings), "harmonic argument"))
        if isinstance(expr, (Sum, Product, PowerProduct)):
            return self._eval_binder(expr, bindings)
        if isinstance(expr, Infinity):
            raise InfiniteBound("the oracle refuses infinite bounds")
        raise OracleError(f"cannot evaluate {type(expr).__name__}")

    def _eval_binder(self, expr, bindings: Mapping[str, int]) -> BigRat:
        if isinstance(expr.upper, Infinity) or isinstance(expr.lower, Infinity):
            raise InfiniteBound(f"infinite bound in the range of {expr.index}")
        key = (expr, tuple(sorted((name, bindings.get(name)) for name in free_names(expr))))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        lower = as_int(self.eval(expr.lower, bindings), "lower bound")
        upper = as_int(self.eval(expr.upper, bindings), "upper bound")
        body = expr.base if isinstance(expr, PowerProduct) else expr.body
        inner = dict(bindings)
        if isinstance(expr, Sum):
            result = QQ(0)
            for i in range(lower, upper + 1):
                inner[expr.index] = i
                result += self.eval(body, inner)
        else:
            result = QQ(1)
            for i in range(lower, upper + 1):
                inner[expr.index] = i
                result *= self.eval(body, inner)
        if len(self._cache) > CACHE_LIMIT:
            logging.debug("oracle cache full, clearing")
            self._cache.clear()
        self._cache[key] = result
        return result


_DEFAULT_ORACLE = Oracle()


def eval_exact(expr: Expr, bindings: Mapping[str, int]) -> BigRat:
    """Exact value of ``expr`` with every free name bound."""
    return _DEFAULT_ORACLE.eval(expr, bindings)


def eval_spec(spec: SumSpec, bindings: Mapping[str, int]) -> BigRat:
    return eval_exact(spec.expr, bindings)


def sequence(spec: SumSpec, start: int, length: int, bindings: Mapping[str, int] = None) -> List[BigRat]:
    """Values of the sum at distinguished parameter start..start+length-1."""
    fixed = dict(bindings or {})
    values = []
    for n in range(start, start + length):
        fixed[spec.distinguished] = n
        values.append(eval_spec(spec, fixed))
    return values
