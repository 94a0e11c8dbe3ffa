# -*- coding: utf-8 -*-
"""Abstract syntax of nested sum expressions.

Nodes are frozen dataclasses and therefore hashable.  Trees should be built with the
smart constructors (:func:`add`, :func:`mul`, :func:`neg`, :func:`div`, :func:`power`, :func:`const`)
which flatten, fold constants and keep one canonical shape, so that rendering and
re-parsing gives back the same tree.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from sympy import QQ

from rhosum.exact_arith import BigRat


class Expr:
    """Base class of all nodes."""

    __slots__ = ()

    def children(self) -> Tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class IntConst(Expr):
    """A rational constant; the name keeps the grammar's term for literals."""

    value: BigRat


@dataclass(frozen=True)
class Param(Expr):
    name: str


@dataclass(frozen=True)
class BoundVar(Expr):
    name: str


@dataclass(frozen=True)
class Infinity(Expr):
    """The symbol for an infinite upper bound."""


@dataclass(frozen=True)
class Add(Expr):
    terms: Tuple[Expr, ...]

    def children(self):
        return self.terms


@dataclass(frozen=True)
class Mul(Expr):
    factors: Tuple[Expr, ...]

    def children(self):
        return self.factors


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr

    def children(self):
        return (self.num, self.den)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr

    def children(self):
        return (self.base, self.exponent)


@dataclass(frozen=True)
class Binomial(Expr):
    top: Expr
    bottom: Expr

    def children(self):
        return (self.top, self.bottom)


@dataclass(frozen=True)
class Pochhammer(Expr):
    base: Expr
    length: Expr

    def children(self):
        return (self.base, self.length)


@dataclass(frozen=True)
class Factorial(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class HarmonicSum(Expr):
    """S_{r1..rm}(x1..xm; upper) = sum_{upper >= i1 >= 1} x1^i1 / i1^r1 * S_{r2..}(x2..; i1)."""

    weights: Tuple[int, ...]
    scales: Tuple[BigRat, ...]
    upper: Expr

    def children(self):
        return (self.upper,)


@dataclass(frozen=True)
class Sum(Expr):
    index: str
    lower: Expr
    upper: Expr
    body: Expr

    def children(self):
        return (self.lower, self.upper, self.body)


@dataclass(frozen=True)
class Product(Expr):
    index: str
    lower: Expr
    upper: Expr
    body: Expr

    def children(self):
        return (self.lower, self.upper, self.body)


@dataclass(frozen=True)
class PowerProduct(Expr):
    """A product over an index range of a base that is rational in the index."""

    index: str
    lower: Expr
    upper: Expr
    base: Expr

    def children(self):
        return (self.lower, self.upper, self.base)


BINDERS = (Sum, Product, PowerProduct)
Name = Union[Param, BoundVar]


@dataclass(frozen=True)
class Quantifier:
    index: str
    lower: Expr
    upper: Expr


@dataclass(frozen=True)
class SumSpec:
    """A nested definite sum  S(n) = sum_{k1} h1 sum_{k2} h2 ... sum_{km} hm.

    ``quantifiers`` and ``factors`` are ordered outermost first, i.e. innermost last.
    """

    expr: Expr
    quantifiers: Tuple[Quantifier, ...]
    factors: Tuple[Expr, ...]
    params: Tuple[str, ...]
    distinguished: str
    start: Dict[str, int] = field(default_factory=dict, compare=False, hash=False)


# --- smart constructors ---------------------------------------------------------------

ZERO = IntConst(QQ(0))
ONE = IntConst(QQ(1))


def const(value) -> IntConst:
    return IntConst(QQ(value))


def is_const(expr: Expr, value=None) -> bool:
    if not isinstance(expr, IntConst):
        return False
    return value is None or expr.value == QQ(value)


def add(*terms: Expr) -> Expr:
    flat: List[Expr] = []
    total = QQ(0)
    for term in terms:
        parts = term.terms if isinstance(term, Add) else (term,)
        for part in parts:
            if isinstance(part, IntConst):
                total += part.value
            else:
                flat.append(part)
    if total != 0 or not flat:
        flat.append(IntConst(total))
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: List[Expr] = []
    coeff = QQ(1)
    for factor in factors:
        parts = factor.factors if isinstance(factor, Mul) else (factor,)
        for part in parts:
            if isinstance(part, IntConst):
                coeff *= part.value
            elif isinstance(part, Neg):
                coeff = -coeff
                flat.extend(part.arg.factors if isinstance(part.arg, Mul) else (part.arg,))
            else:
                flat.append(part)
    if coeff == 0:
        return ZERO
    if not flat:
        return IntConst(coeff)
    if coeff == -1:
        inner = flat[0] if len(flat) == 1 else Mul(tuple(flat))
        return Neg(inner)
    if coeff != 1:
        flat.insert(0, IntConst(coeff))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(expr: Expr) -> Expr:
    if isinstance(expr, IntConst):
        return IntConst(-expr.value)
    if isinstance(expr, Neg):
        return expr.arg
    if isinstance(expr, Mul):
        return mul(IntConst(QQ(-1)), expr)
    return Neg(expr)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def div(num: Expr, den: Expr) -> Expr:
    if isinstance(den, IntConst):
        if den.value == 0:
            raise ZeroDivisionError("division by the constant 0")
        return mul(IntConst(1 / den.value), num) if not isinstance(num, IntConst) \
            else IntConst(num.value / den.value)
    if is_const(num, 0):
        return ZERO
    return Div(num, den)


def power(base: Expr, exponent: Expr) -> Expr:
    if is_const(exponent, 0):
        return ONE
    if is_const(exponent, 1):
        return base
    if isinstance(base, IntConst) and isinstance(exponent, IntConst) and exponent.value.denominator == 1:
        if base.value != 0 or exponent.value > 0:
            return IntConst(base.value ** int(exponent.value))
    return Pow(base, exponent)


def sum_of(terms: Iterable[Expr]) -> Expr:
    return add(*list(terms))


# --- traversal ---------------------------------------------------------------------------

@lru_cache(maxsize=65536)
def free_names(expr: Expr) -> frozenset:
    """Names occurring free in ``expr`` (parameters and indices bound further out)."""
    if isinstance(expr, (Param, BoundVar)):
        return frozenset((expr.name,))
    if isinstance(expr, BINDERS):
        inner = free_names(expr.body if not isinstance(expr, PowerProduct) else expr.base) - {expr.index}
        return inner | free_names(expr.lower) | free_names(expr.upper)
    names = frozenset()
    for child in expr.children():
        names |= free_names(child)
    return names


def contains(expr: Expr, node_type) -> bool:
    if isinstance(expr, node_type):
        return True
    return any(contains(child, node_type) for child in expr.children())


def substitute(expr: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace free occurrences of names; binders capturing a replacement's names are renamed."""
    if not mapping:
        return expr
    if isinstance(expr, (Param, BoundVar)):
        return mapping.get(expr.name, expr)
    if isinstance(expr, (IntConst, Infinity)):
        return expr
    if isinstance(expr, BINDERS):
        inner_mapping = {k: v for k, v in mapping.items() if k != expr.index}
        index = expr.index
        body = expr.base if isinstance(expr, PowerProduct) else expr.body
        captured = set()
        for value in inner_mapping.values():
            captured |= free_names(value)
        if index in captured:
            fresh = _fresh_name(index, captured | free_names(body))
            body = substitute(body, {index: BoundVar(fresh)})
            index = fresh
        lower = substitute(expr.lower, mapping)
        upper = substitute(expr.upper, mapping)
        return type(expr)(index, lower, upper, substitute(body, inner_mapping))
    return _rebuild(expr, [substitute(child, mapping) for child in expr.children()])


def _fresh_name(name: str, taken) -> str:
    i = 1
    while f"{name}{i}" in taken:
        i += 1
    return f"{name}{i}"


def _rebuild(expr: Expr, children: List[Expr]) -> Expr:
    if isinstance(expr, Add):
        return add(*children)
    if isinstance(expr, Mul):
        return mul(*children)
    if isinstance(expr, Neg):
        return neg(children[0])
    if isinstance(expr, Div):
        return div(children[0], children[1])
    if isinstance(expr, Pow):
        return power(children[0], children[1])
    if isinstance(expr, Binomial):
        return Binomial(children[0], children[1])
    if isinstance(expr, Pochhammer):
        return Pochhammer(children[0], children[1])
    if isinstance(expr, Factorial):
        return Factorial(children[0])
    if isinstance(expr, HarmonicSum):
        return HarmonicSum(expr.weights, expr.scales, children[0])
    raise TypeError(f"cannot rebuild {type(expr).__name__}")


def shift_param(expr: Expr, param: str, i: int) -> Expr:
    """Structural substitution param -> param + i."""
    if i == 0:
        return expr
    return substitute(expr, {param: add(Param(param), const(i))})


def shift_spec(spec: SumSpec, param: str, i: int) -> SumSpec:
    """Shift a parameter in the whole sum specification."""
    if i == 0:
        return spec
    quantifiers = tuple(Quantifier(q.index, shift_param(q.lower, param, i), shift_param(q.upper, param, i))
                        for q in spec.quantifiers)
    factors = tuple(shift_param(f, param, i) for f in spec.factors)
    return SumSpec(shift_param(spec.expr, param, i), quantifiers, factors, spec.params, spec.distinguished,
                   dict(spec.start))


# --- integer-linear forms ------------------------------------------------------------------

LinearForm = Dict[str, BigRat]
"""Key of the constant part in a :data:`LinearForm`."""
CONSTANT = ""


def linear_form(expr: Expr) -> Optional[LinearForm]:
    """Coefficients of ``expr`` as a linear form in its names, or None if it is not linear."""
    if isinstance(expr, IntConst):
        return {CONSTANT: expr.value} if expr.value else {}
    if isinstance(expr, (Param, BoundVar)):
        return {expr.name: QQ(1)}
    if isinstance(expr, Neg):
        inner = linear_form(expr.arg)
        return None if inner is None else {k: -v for k, v in inner.items()}
    if isinstance(expr, Add):
        total: LinearForm = {}
        for term in expr.terms:
            part = linear_form(term)
            if part is None:
                return None
            for k, v in part.items():
                total[k] = total.get(k, QQ(0)) + v
        return {k: v for k, v in total.items() if v}
    if isinstance(expr, Mul):
        scale = QQ(1)
        form: Optional[LinearForm] = None
        for factor in expr.factors:
            if isinstance(factor, IntConst):
                scale *= factor.value
                continue
            if form is not None:
                return None
            form = linear_form(factor)
            if form is None:
                return None
        if form is None:
            return {CONSTANT: scale} if scale else {}
        return {k: scale * v for k, v in form.items()}
    if isinstance(expr, Div) and isinstance(expr.den, IntConst):
        inner = linear_form(expr.num)
        return None if inner is None else {k: v / expr.den.value for k, v in inner.items()}
    return None


def is_integer_linear(form: Optional[LinearForm]) -> bool:
    return form is not None and all(v.denominator == 1 for v in form.values())


def from_linear(form: LinearForm, bound: Iterable[str] = ()) -> Expr:
    """Canonical expression of a linear form; names in ``bound`` become BoundVar nodes."""
    bound = set(bound)
    terms = []
    for name in sorted(k for k in form if k != CONSTANT):
        node = BoundVar(name) if name in bound else Param(name)
        terms.append(mul(IntConst(form[name]), node))
    terms.append(IntConst(form.get(CONSTANT, QQ(0))))
    return add(*terms)


def eval_linear(form: LinearForm, bindings: Mapping[str, int]) -> BigRat:
    total = QQ(form.get(CONSTANT, 0))
    for name, coeff in form.items():
        if name != CONSTANT:
            total += coeff * QQ(bindings[name])
    return total


# --- rendering ---------------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def render_const(value: BigRat) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Add):
        return _PREC_ADD
    if isinstance(expr, (Mul, Div)):
        return _PREC_MUL
    if isinstance(expr, Neg):
        return _PREC_NEG
    if isinstance(expr, IntConst):
        if expr.value < 0:
            return _PREC_NEG
        return _PREC_MUL if expr.value.denominator != 1 else _PREC_ATOM
    if isinstance(expr, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(expr: Expr, minimum: int) -> str:
    text = render(expr)
    return f"({text})" if _precedence(expr) < minimum else text


def render(expr: Expr) -> str:
    """Render in the input grammar; ``parse(render(x))`` gives back ``x``."""
    if isinstance(expr, IntConst):
        return render_const(expr.value)
    if isinstance(expr, (Param, BoundVar)):
        return expr.name
    if isinstance(expr, Infinity):
        return "Infinity"
    if isinstance(expr, Add):
        out = render(expr.terms[0]) if not isinstance(expr.terms[0], Add) else f"({render(expr.terms[0])})"
        for term in expr.terms[1:]:
            negated = _negated(term)
            if negated is not None:
                out += " - " + _wrap(negated, _PREC_MUL)
            else:
                out += " + " + _wrap(term, _PREC_MUL)
        return out
    if isinstance(expr, Mul):
        parts = []
        for i, factor in enumerate(expr.factors):
            if isinstance(factor, Div) or (i > 0 and isinstance(factor, IntConst)):
                parts.append(f"({render(factor)})")
            elif i == 0 and isinstance(factor, IntConst):
                parts.append(render(factor))
            else:
                parts.append(_wrap(factor, _PREC_NEG + 1 if i > 0 else _PREC_MUL))
        return "*".join(parts)
    if isinstance(expr, Neg):
        return "-" + _wrap(expr.arg, _PREC_POW)
    if isinstance(expr, Div):
        num = _wrap(expr.num, _PREC_MUL)
        if isinstance(expr.num, Div):
            num = f"({num})"
        return f"{num}/{_wrap(expr.den, _PREC_POW)}"
    if isinstance(expr, Pow):
        return f"{_wrap(expr.base, _PREC_ATOM)}^{_wrap(expr.exponent, _PREC_ATOM)}"
    if isinstance(expr, Binomial):
        return f"Binomial[{render(expr.top)}, {render(expr.bottom)}]"
    if isinstance(expr, Pochhammer):
        return f"Pochhammer[{render(expr.base)}, {render(expr.length)}]"
    if isinstance(expr, Factorial):
        return f"Factorial[{render(expr.arg)}]"
    if isinstance(expr, HarmonicSum):
        args = [str(w) for w in expr.weights]
        if any(x != 1 for x in expr.scales):
            args.append("{" + ", ".join(render_const(x) for x in expr.scales) + "}")
        args.append(render(expr.upper))
        return f"S[{', '.join(args)}]"
    if isinstance(expr, Sum):
        return f"Sum[{render(expr.body)}, {{{expr.index}, {render(expr.lower)}, {render(expr.upper)}}}]"
    if isinstance(expr, Product):
        return f"Product[{render(expr.body)}, {{{expr.index}, {render(expr.lower)}, {render(expr.upper)}}}]"
    if isinstance(expr, PowerProduct):
        return f"Product[{render(expr.base)}, {{{expr.index}, {render(expr.lower)}, {render(expr.upper)}}}]"
    raise TypeError(f"cannot render {type(expr).__name__}")


def _negated(term: Expr) -> Optional[Expr]:
    """For a term with a visible leading minus, the term without it."""
    if isinstance(term, Neg):
        return term.arg
    if isinstance(term, IntConst) and term.value < 0:
        return IntConst(-term.value)
    if isinstance(term, Mul) and isinstance(term.factors[0], IntConst) and term.factors[0].value < 0:
        return mul(IntConst(-term.factors[0].value), *term.factors[1:])
    return None


def render_spec(spec: SumSpec) -> str:
    return render(spec.expr)
