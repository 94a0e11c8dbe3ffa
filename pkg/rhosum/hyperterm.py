# -*- coding: utf-8 -*-
"""Hypergeometric terms in the ground variable t.

A term is kept as  r(t) * prod Gamma(L_i)^e_i * prod b_j^(M_j)  with r rational, L_i and M_j
affine in t and the parameters.  Binomials, Pochhammer symbols, factorials and products over
linear factors are rewritten into this shape, so that shift quotients become rational.

Values at integer points are taken in the limit sense t = point + eps, eps -> 0.  This makes
certificates like C(n,t)/(1+n-t) finite at t = n+1, which is what summing a certificate over
its whole range needs.
"""
import math
from dataclasses import dataclass
from typing import Dict, Mapping, NamedTuple, Optional, Tuple

from sympy import QQ

from rhosum.errors import PoleAtPoint, UnsupportedBase
from rhosum.exact_arith import BigRat, GroundField, t_degree
from rhosum.oracle import pochhammer
from rhosum.sum_expr import (
    Add, Binomial, BoundVar, Div, Expr, Factorial, IntConst, Mul, Neg, Param, Pochhammer, Pow, PowerProduct,
    Product, add, const, div, linear_form, mul, power,
)


class Affine(NamedTuple):
    """a*t + sum p_i*param_i + c."""

    t: BigRat
    params: Tuple[BigRat, ...]
    const: BigRat

    def shape(self):
        return self.t, self.params

    def shifted(self, c) -> "Affine":
        return Affine(self.t, self.params, self.const + c)

    def is_const(self) -> bool:
        return self.t == 0 and not any(self.params)


def affine(gf: GroundField, expr: Expr, index: str) -> Affine:
    """Affine form of an integer-linear expression; ``index`` names the ground variable."""
    form = linear_form(expr)
    if form is None:
        raise UnsupportedBase(f"not linear: {expr}")
    known = set(gf.params) | {index, ""}
    unknown = sorted(set(form) - known)
    if unknown:
        raise UnsupportedBase(f"unknown names {unknown} in {expr}")
    return Affine(QQ(form.get(index, 0)), tuple(QQ(form.get(p, 0)) for p in gf.params), QQ(form.get("", 0)))


def affine_value(gf: GroundField, aff: Affine, point, bindings: Mapping[str, int]) -> BigRat:
    total = aff.t * QQ(point) + aff.const
    for coeff, name in zip(aff.params, gf.params):
        if coeff:
            total += coeff * QQ(bindings[name])
    return total


def affine_element(gf: GroundField, aff: Affine):
    total = gf.t * aff.t + gf.const(aff.const)
    for coeff, name in zip(aff.params, gf.params):
        if coeff:
            total += gf.param(name) * coeff
    return total


def _rising(gf: GroundField, aff: Affine, start: int, stop: int):
    """prod_{i=start}^{stop-1} (L + i) as a field element."""
    base = affine_element(gf, aff)
    result = gf.one()
    for i in range(start, stop):
        result *= base + i
    return result


def _floor(value: BigRat) -> int:
    return int(value.numerator // value.denominator)


@dataclass(frozen=True)
class LimitValue:
    """Leading term coef * eps^order of a value at point + eps."""

    coef: BigRat
    order: int = 0

    def __mul__(self, other: "LimitValue") -> "LimitValue":
        return LimitValue(self.coef * other.coef, self.order + other.order)

    def __pow__(self, e: int) -> "LimitValue":
        return LimitValue(self.coef ** e, self.order * e)

    def value(self, point=None) -> BigRat:
        if self.order > 0 or self.coef == 0:
            if self.order < 0:
                raise PoleAtPoint("zero times a pole", point)
            return QQ(0)
        if self.order < 0:
            raise PoleAtPoint(f"pole of order {-self.order}", point)
        return self.coef


@dataclass(frozen=True)
class HyperTerm:
    field: GroundField
    rational: object
    gammas: Tuple[Tuple[Affine, int], ...] = ()
    powers: Tuple[Tuple[BigRat, Affine], ...] = ()

    @property
    def is_rational(self) -> bool:
        return not self.gammas and not self.powers

    @property
    def t_free(self) -> bool:
        return (self.field.is_const(self.rational) and all(a.t == 0 for a, _ in self.gammas)
                and all(a.t == 0 for _, a in self.powers))

    def __mul__(self, other: "HyperTerm") -> "HyperTerm":
        gammas = dict(self.gammas)
        for aff, e in other.gammas:
            gammas[aff] = gammas.get(aff, 0) + e
        powers = dict(self.powers)
        for base, aff in other.powers:
            powers[base] = _add_affine(powers[base], aff) if base in powers else aff
        return make(self.field, self.rational * other.rational, gammas, powers)

    def __pow__(self, e: int) -> "HyperTerm":
        if e < 0:
            return quotient(one(self.field), self ** -e)
        gammas = {aff: k * e for aff, k in self.gammas}
        powers = {base: _scale_affine(aff, e) for base, aff in self.powers}
        return make(self.field, self.rational ** e, gammas, powers)

    def scaled(self, r) -> "HyperTerm":
        return HyperTerm(self.field, self.rational * r, self.gammas, self.powers)

    def split(self) -> Tuple[object, Dict[BigRat, int], "HyperTerm"]:
        """(rational part, {base: t-coefficient of its exponent}, t-free-exponent remainder)."""
        steps = {}
        rest = []
        for base, aff in self.powers:
            if aff.t:
                steps[base] = int(aff.t)
            rest_aff = Affine(QQ(0), aff.params, aff.const)
            if any(rest_aff.params) or rest_aff.const:
                rest.append((base, rest_aff))
        return self.rational, steps, HyperTerm(self.field, self.field.one(), self.gammas, tuple(rest))


def _add_affine(a: Affine, b: Affine) -> Affine:
    return Affine(a.t + b.t, tuple(x + y for x, y in zip(a.params, b.params)), a.const + b.const)


def _scale_affine(a: Affine, e) -> Affine:
    return Affine(a.t * e, tuple(x * e for x in a.params), a.const * e)


def one(gf: GroundField) -> HyperTerm:
    return HyperTerm(gf, gf.one())


def rational_term(gf: GroundField, r) -> HyperTerm:
    return HyperTerm(gf, r)


def make(gf: GroundField, rational, gammas: Mapping[Affine, int], powers: Mapping[BigRat, Affine]) -> HyperTerm:
    """Normal form: gamma classes merged, integer exponent parts moved into the rational factor."""
    classes: Dict[tuple, Dict[BigRat, int]] = {}
    for aff, e in gammas.items():
        if not e:
            continue
        if aff.is_const():
            value = aff.const
            if value.denominator == 1:
                if value <= 0:
                    raise UnsupportedBase(f"Gamma({value}) is a pole")
                rational *= gf.const(math.factorial(int(value) - 1)) ** e
                continue
        key = aff.shape() + (aff.const - _floor(aff.const),)
        members = classes.setdefault(key, {})
        members[aff.const] = members.get(aff.const, 0) + e
    merged = []
    for key, members in classes.items():
        # Gamma(L + c) = Gamma(L + top) / (L + c)_(top - c), top the largest constant of the class
        top = max(members)
        total = 0
        for c, e in members.items():
            total += e
            if c != top:
                rational /= _rising(gf, Affine(key[0], key[1], c), 0, _floor(top - c)) ** e
        if total:
            merged.append((Affine(key[0], key[1], top), total))
    norm_powers: Dict[BigRat, Affine] = {}
    for base, aff in powers.items():
        base = QQ(base)
        if base == 0:
            raise UnsupportedBase("zero base in a power")
        if base == 1 or (aff.t == 0 and not any(aff.params) and aff.const == 0):
            continue
        if base < 0 and base != -1:
            _accumulate(norm_powers, QQ(-1), aff)
            base = -base
        if 0 < base < 1:
            base, aff = 1 / base, _scale_affine(aff, -1)
        _accumulate(norm_powers, base, aff)
    final_powers = []
    for base in sorted(norm_powers):
        aff = norm_powers[base]
        whole = _floor(aff.const)
        if whole:
            rational *= gf.const(base ** whole)
            aff = aff.shifted(-whole)
        if aff.t or any(aff.params) or aff.const:
            final_powers.append((base, aff))
    return HyperTerm(gf, rational, tuple(sorted(merged)), tuple(final_powers))


def quotient(a: HyperTerm, b: HyperTerm) -> HyperTerm:
    """a / b in normal form."""
    gammas = dict(a.gammas)
    for aff, e in b.gammas:
        gammas[aff] = gammas.get(aff, 0) - e
    powers = dict(a.powers)
    for base, aff in b.powers:
        negated = _scale_affine(aff, -1)
        powers[base] = _add_affine(powers[base], negated) if base in powers else negated
    return make(a.field, a.rational / b.rational, gammas, powers)


def ratio(term: HyperTerm):
    """sigma(H)/H as an element of the ground field."""
    gf = term.field
    result = gf.shift(term.rational, 1) / term.rational
    for aff, e in term.gammas:
        a = int(aff.t)
        if a > 0:
            result *= _rising(gf, aff, 0, a) ** e
        elif a < 0:
            result /= _rising(gf, aff, a, 0) ** e
    for base, aff in term.powers:
        if aff.t:
            result *= gf.const(base ** int(aff.t))
    return result


def limit_at(term: HyperTerm, point, bindings: Mapping[str, int]) -> LimitValue:
    """Leading term of the value at t = point + eps."""
    gf = term.field
    coef, order = gf.leading_term_at(term.rational, point, bindings)
    result = LimitValue(coef, order)
    transcendental: Dict[BigRat, int] = {}
    for aff, e in term.gammas:
        value = affine_value(gf, aff, point, bindings)
        if value.denominator == 1 and value <= 0:
            if aff.t == 0:
                raise PoleAtPoint(f"Gamma({value}) does not depend on t", point)
            m = -int(value)
            result = result * LimitValue(QQ((-1) ** m) / (math.factorial(m) * aff.t), -1) ** e
        elif value.denominator == 1:
            result = result * LimitValue(QQ(math.factorial(int(value) - 1))) ** e
        else:
            whole = _floor(value)
            frac = value - whole
            transcendental[frac] = transcendental.get(frac, 0) + e
            result = result * LimitValue(pochhammer(frac, whole)) ** e
    if any(transcendental.values()):
        raise UnsupportedBase(f"value involves Gamma of {sorted(transcendental)}")
    for base, aff in term.powers:
        exponent = affine_value(gf, aff, point, bindings)
        if exponent.denominator != 1:
            raise UnsupportedBase(f"{base}^{exponent} is not rational")
        result = result * LimitValue(QQ(base) ** int(exponent))
    return result


def evaluate(term: HyperTerm, point, bindings: Mapping[str, int]) -> BigRat:
    return limit_at(term, point, bindings).value(point)


# --- expressions ----------------------------------------------------------------------------

def to_rational(gf: GroundField, expr: Expr, index: str):
    """The expression as an element of QQ(t, params), or None when it is not rational."""
    if isinstance(expr, IntConst):
        return gf.const(expr.value)
    if isinstance(expr, (Param, BoundVar)):
        if expr.name == index:
            return gf.t
        if expr.name in gf.params:
            return gf.param(expr.name)
        return None
    if isinstance(expr, Add):
        total = gf.zero()
        for term in expr.terms:
            part = to_rational(gf, term, index)
            if part is None:
                return None
            total += part
        return total
    if isinstance(expr, Mul):
        total = gf.one()
        for factor in expr.factors:
            part = to_rational(gf, factor, index)
            if part is None:
                return None
            total *= part
        return total
    if isinstance(expr, Neg):
        inner = to_rational(gf, expr.arg, index)
        return None if inner is None else -inner
    if isinstance(expr, Div):
        num, den = to_rational(gf, expr.num, index), to_rational(gf, expr.den, index)
        if num is None or den is None or not den:
            return None
        return num / den
    if isinstance(expr, Pow) and isinstance(expr.exponent, IntConst) and expr.exponent.value.denominator == 1:
        base = to_rational(gf, expr.base, index)
        if base is None or (not base and expr.exponent.value < 0):
            return None
        return base ** int(expr.exponent.value)
    return None


def from_expr(gf: GroundField, expr: Expr, index: str) -> HyperTerm:
    """Hypergeometric normal form of a product expression in the ground variable ``index``."""
    r = to_rational(gf, expr, index)
    if r is not None:
        return HyperTerm(gf, r)
    if isinstance(expr, Mul):
        result = one(gf)
        for factor in expr.factors:
            result = result * from_expr(gf, factor, index)
        return result
    if isinstance(expr, Neg):
        return from_expr(gf, expr.arg, index).scaled(gf.const(-1))
    if isinstance(expr, Div):
        return quotient(from_expr(gf, expr.num, index), from_expr(gf, expr.den, index))
    if isinstance(expr, Pow):
        if isinstance(expr.exponent, IntConst) and expr.exponent.value.denominator == 1:
            return from_expr(gf, expr.base, index) ** int(expr.exponent.value)
        if not isinstance(expr.base, IntConst):
            raise UnsupportedBase(f"power with symbolic base and exponent: {expr}")
        return make(gf, gf.one(), {}, {expr.base.value: affine(gf, expr.exponent, index)})
    if isinstance(expr, Binomial):
        return _binomial(gf, affine(gf, expr.top, index), affine(gf, expr.bottom, index))
    if isinstance(expr, Pochhammer):
        base, length = affine(gf, expr.base, index), affine(gf, expr.length, index)
        if length.is_const() and length.const.denominator == 1:
            m = int(length.const)
            if m >= 0:
                return HyperTerm(gf, _rising(gf, base, 0, m))
            return HyperTerm(gf, gf.one() / _rising(gf, base, m, 0))
        return make(gf, gf.one(), {_add_affine(base, length): 1, base: -1}, {})
    if isinstance(expr, Factorial):
        return make(gf, gf.one(), {affine(gf, expr.arg, index).shifted(1): 1}, {})
    if isinstance(expr, (Product, PowerProduct)):
        return _product(gf, expr, index)
    raise UnsupportedBase(f"not a hypergeometric factor: {type(expr).__name__}")


def _binomial(gf: GroundField, top: Affine, bottom: Affine) -> HyperTerm:
    diff = _add_affine(top, _scale_affine(bottom, -1))
    for fixed, other in ((bottom, top), (diff, top)):
        if fixed.is_const() and fixed.const.denominator == 1:
            m = int(fixed.const)
            if m < 0:
                return HyperTerm(gf, gf.zero())
            # falling factorial over m!
            return HyperTerm(gf, _rising(gf, other, -m + 1, 1) / math.factorial(m))
    return make(gf, gf.one(), {top.shifted(1): 1, bottom.shifted(1): -1, diff.shifted(1): -1}, {})


def _product(gf: GroundField, expr, index: str) -> HyperTerm:
    """prod_{i=lower}^{upper} body(i) for a body that splits into linear factors in i."""
    body = expr.base if isinstance(expr, PowerProduct) else expr.body
    r = to_rational(gf, body, expr.index)
    if r is None:
        raise UnsupportedBase(f"product body is not rational in {expr.index}")
    lower, upper = affine(gf, expr.lower, index), affine(gf, expr.upper, index)
    count = _add_affine(upper, _scale_affine(lower, -1)).shifted(1)
    gammas: Dict[Affine, int] = {}
    powers: Dict[BigRat, Affine] = {}
    t = gf.ring.gens[0]
    for poly, sign in ((r.numer, 1), (r.denom, -1)):
        content, factors = poly.factor_list()
        _accumulate(powers, QQ(content), _scale_affine(count, sign))
        for factor, mult in factors:
            if t_degree(factor) != 1:
                raise UnsupportedBase(f"product factor {factor.as_expr()} is not linear in {expr.index}")
            lead = QQ(factor.coeff(t))
            offset = _affine_of_poly(gf, (factor - t * lead).quo_ground(lead))
            _accumulate(powers, lead, _scale_affine(count, mult * sign))
            # prod_{i=lower}^{upper} (i + e) = Gamma(upper + e + 1) / Gamma(lower + e)
            top = _add_affine(upper, offset).shifted(1)
            bottom = _add_affine(lower, offset)
            gammas[top] = gammas.get(top, 0) + mult * sign
            gammas[bottom] = gammas.get(bottom, 0) - mult * sign
    return make(gf, gf.one(), gammas, powers)


def _accumulate(powers: Dict[BigRat, Affine], base: BigRat, aff: Affine):
    powers[base] = _add_affine(powers[base], aff) if base in powers else aff


def _affine_of_poly(gf: GroundField, poly) -> Affine:
    params = [QQ(0)] * len(gf.params)
    constant = QQ(0)
    for monom, coeff in poly.iterterms():
        if sum(monom) == 0:
            constant += QQ(coeff)
        elif sum(monom) == 1 and monom[0] == 0:
            params[monom.index(1) - 1] += QQ(coeff)
        else:
            raise UnsupportedBase(f"product factor offset {poly.as_expr()} is not linear")
    return Affine(QQ(0), tuple(params), constant)


def poly_to_expr(gf: GroundField, poly, t_expr: Expr) -> Expr:
    names = [t_expr] + [Param(p) for p in gf.params]
    terms = []
    for monom, coeff in sorted(poly.iterterms(), key=lambda item: (-sum(item[0]), item[0])):
        factors = [IntConst(QQ(coeff))]
        for name, exp in zip(names, monom):
            if exp:
                factors.append(power(name, const(exp)))
        terms.append(mul(*factors))
    return add(*terms)


def _factored(gf: GroundField, poly, t_expr: Expr) -> Expr:
    if poly.is_ground:
        return IntConst(QQ(poly.LC) if poly else QQ(0))
    content, factors = poly.factor_list()
    parts = [IntConst(QQ(content))]
    for factor, mult in factors:
        parts.append(power(poly_to_expr(gf, factor, t_expr), const(mult)))
    return mul(*parts)


def rational_to_expr(gf: GroundField, f, t_expr: Optional[Expr] = None) -> Expr:
    """A field element as an expression, numerator and denominator factored."""
    t_expr = t_expr if t_expr is not None else BoundVar("t")
    if not f:
        return IntConst(QQ(0))
    num = _factored(gf, f.numer, t_expr)
    if f.denom.is_ground and f.denom.LC == 1:
        return num
    return div(num, _factored(gf, f.denom, t_expr))


def affine_to_expr(gf: GroundField, aff: Affine, t_expr: Expr) -> Expr:
    terms = [mul(IntConst(aff.t), t_expr)] if aff.t else []
    for coeff, name in zip(aff.params, gf.params):
        if coeff:
            terms.append(mul(IntConst(coeff), Param(name)))
    terms.append(IntConst(aff.const))
    return add(*terms)


def to_expr(term: HyperTerm, t_expr: Optional[Expr] = None) -> Expr:
    """Expression of a term; gamma factors are rendered as factorials."""
    gf = term.field
    t_expr = t_expr if t_expr is not None else BoundVar("t")
    factors = [rational_to_expr(gf, term.rational, t_expr)]
    for aff, e in term.gammas:
        factors.append(power(Factorial(affine_to_expr(gf, aff.shifted(-1), t_expr)), const(e)))
    for base, aff in term.powers:
        factors.append(power(IntConst(base), affine_to_expr(gf, aff, t_expr)))
    return mul(*factors)


def symbolic_at(term: HyperTerm, point: Affine) -> Tuple[Expr, int]:
    """Leading term at t = point + eps for a point affine in the parameters only.

    Returns (coefficient expression in the parameters, order).  Gamma factors whose argument
    stays a nonpositive integer contribute the pole coefficient; all others stay symbolic.
    """
    gf = term.field
    t = gf.ring.gens[0]
    base = gf.ring(0)
    for coeff, name in zip(point.params, gf.params):
        base += gf.ring.gens[1 + gf.params.index(name)] * coeff
    base += point.const
    num = term.rational.numer.compose(t, t + base)
    den = term.rational.denom.compose(t, t + base)
    num_order, num_lead = _lowest(num)
    den_order, den_lead = _lowest(den)
    order = num_order - den_order
    coef = gf.from_poly(num_lead) / gf.from_poly(den_lead)
    factors = []
    gammas: Dict[Affine, int] = {}
    powers: Dict[BigRat, Affine] = {}
    for aff, e in term.gammas:
        arg = Affine(QQ(0), tuple(p + aff.t * q for p, q in zip(aff.params, point.params)),
                     aff.const + aff.t * point.const)
        if arg.is_const() and arg.const.denominator == 1:
            value = arg.const
            if value <= 0:
                if aff.t == 0:
                    raise PoleAtPoint(f"Gamma({value}) does not depend on t", point)
                m = -int(value)
                factors.append(IntConst((QQ((-1) ** m) / (math.factorial(m) * aff.t)) ** e))
                order -= e
            else:
                factors.append(IntConst(QQ(math.factorial(int(value) - 1)) ** e))
            continue
        gammas[arg] = gammas.get(arg, 0) + e
    for b, aff in term.powers:
        exponent = Affine(QQ(0), tuple(p + aff.t * q for p, q in zip(aff.params, point.params)),
                          aff.const + aff.t * point.const)
        _accumulate(powers, b, exponent)
    # symbolic factors in normal form, so that e.g. (n + 1)! / n! collapses to n + 1
    factors.insert(0, to_expr(make(gf, coef, gammas, powers)))
    return mul(*factors), order


def _lowest(poly):
    """(order, coefficient) of the lowest power of t in a polynomial of QQ[t, params]."""
    if not poly:
        raise PoleAtPoint("vanishing polynomial in a leading-term computation")
    order = min(m[0] for m in poly.itermonoms())
    terms = {(0,) + m[1:]: c for m, c in poly.iterterms() if m[0] == order}
    return order, poly.ring.from_dict(terms)


