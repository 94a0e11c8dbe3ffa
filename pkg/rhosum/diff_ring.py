# -*- coding: utf-8 -*-
"""Simple R-Pi-Sigma towers over the rational difference field K(t), sigma(t) = t + 1.

A tower is an immutable tuple of generators: R and Pi monomials first, Sigma monomials after
them.  Ring elements are sparse maps  monomial -> coefficient in K(t)  where a monomial is a
sorted tuple of (generator name, exponent).  Pi exponents are Laurent, R exponents are reduced
modulo the order of the root of unity, Sigma exponents are nonnegative.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache, partial
from threading import RLock
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ

from rhosum.errors import DependentExtension, Incomplete, NotIndefinite, PoleAtPoint, UnsupportedBase
from rhosum.exact_arith import BigRat, GroundField
from rhosum.hyperterm import (
    Affine, HyperTerm, LimitValue, affine, affine_to_expr, from_expr, limit_at, make, quotient, ratio,
    rational_to_expr, symbolic_at, to_rational,
)
from rhosum.hyperterm import one as hyper_one
from rhosum.hyperterm import to_expr as to_hyper_expr
from rhosum.oracle import harmonic
from rhosum.sum_expr import (
    CONSTANT, Add, BoundVar, Div, Expr, HarmonicSum, IntConst, Mul, Neg, Pow, Sum, add, const, contains,
    free_names, linear_form, mul, neg, power, render, substitute,
)

ROOT = "R"
PI = "Pi"
SIGMA = "Sigma"

Monomial = Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class Generator:
    """One tower generator.

    ``ratio`` is sigma(g)/g for Pi (an element of K(t)) and R (a rational root of unity),
    ``increment`` is sigma(g) - g for Sigma.  ``description`` is the generator's value as an
    expression in BoundVar("t"); a Sigma generator's value at k is the sum of its increment
    over 0..k-1.  ``values`` holds those partial sums per parameter binding, guarded by ``lock``.
    """

    name: str
    kind: str
    ratio: object = None
    increment: "RingElem" = None
    order: int = 0
    depth: int = 1
    term: Optional[HyperTerm] = None
    description: Optional[Expr] = None
    base: Optional[BigRat] = None
    hook: Optional[Callable] = field(default=None, compare=False, hash=False, repr=False)
    values: Dict[tuple, List[BigRat]] = field(default_factory=dict, compare=False, hash=False, repr=False)
    lock: RLock = field(default_factory=RLock, compare=False, hash=False, repr=False)


@dataclass(frozen=True)
class Tower:
    field: GroundField
    gens: Tuple[Generator, ...] = ()

    def __repr__(self):
        return f"Tower({self.field!r}; {', '.join(g.name for g in self.gens)})"

    def names(self) -> Tuple[str, ...]:
        return tuple(g.name for g in self.gens)

    def gen(self, name: str) -> Generator:
        for g in self.gens:
            if g.name == name:
                return g
        raise KeyError(f"no generator {name!r} in {self!r}")

    def has(self, name: str) -> bool:
        return any(g.name == name for g in self.gens)

    def index(self, name: str) -> int:
        return self.names().index(name)

    @property
    def sigma_gens(self) -> Tuple[Generator, ...]:
        return tuple(g for g in self.gens if g.kind == SIGMA)

    @property
    def pi_gens(self) -> Tuple[Generator, ...]:
        return tuple(g for g in self.gens if g.kind != SIGMA)

    def with_gen(self, gen: Generator) -> "Tower":
        """Append a generator, keeping R and Pi generators in front of the Sigma generators."""
        if self.has(gen.name):
            raise ValueError(f"generator {gen.name!r} already present")
        if gen.kind == SIGMA:
            return Tower(self.field, self.gens + (gen,))
        return Tower(self.field, self.pi_gens + (gen,) + self.sigma_gens)

    def prefix(self, count: int) -> "Tower":
        return Tower(self.field, self.gens[:count])

    def fresh_name(self, stem: str, taken: Sequence[str] = ()) -> str:
        i = 1
        while self.has(f"{stem}{i}") or f"{stem}{i}" in taken:
            i += 1
        return f"{stem}{i}"

    # --- element construction --------------------------------------------------------

    def zero(self) -> "RingElem":
        return RingElem(self, {})

    def one(self) -> "RingElem":
        return RingElem(self, {(): self.field.one()})

    def element(self, coef) -> "RingElem":
        coef = self.field.field(coef) if not hasattr(coef, "numer") else coef
        return RingElem(self, {(): coef} if coef else {})

    def monomial(self, name: str, exponent: int = 1, coef=None) -> "RingElem":
        coef = self.field.one() if coef is None else coef
        mono = _normalize(self, {name: exponent})
        return RingElem(self, {mono: coef} if coef else {})


def _join(a: Tower, b: Tower) -> Tower:
    if a is b or a.gens == b.gens:
        return a
    small, big = (a, b) if len(a.gens) <= len(b.gens) else (b, a)
    names = set(big.names())
    if any(g.name not in names for g in small.gens):
        raise ValueError(f"incompatible towers {a!r} and {b!r}")
    return big


def _normalize(tower: Tower, exponents: Mapping[str, int]) -> Monomial:
    items = []
    for name, e in exponents.items():
        gen = tower.gen(name)
        if gen.kind == ROOT:
            e %= gen.order
        elif gen.kind == SIGMA and e < 0:
            raise ValueError(f"negative exponent of the sum generator {name}")
        if e:
            items.append((name, e))
    return tuple(sorted(items))


def _mono_mul(tower: Tower, m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exponents = dict(m1)
    for name, e in m2:
        exponents[name] = exponents.get(name, 0) + e
    return _normalize(tower, exponents)


class RingElem:
    """An element of a tower; arithmetic joins towers that extend one another."""

    __slots__ = ("tower", "terms", "_hash")

    def __init__(self, tower: Tower, terms: Dict[Monomial, object]):
        self.tower = tower
        self.terms = terms
        self._hash = None

    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            return other
        return self.tower.element(other)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, RingElem):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return dump_elem(self)

    def __neg__(self):
        return RingElem(self.tower, {m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for mono, coef in other.terms.items():
            value = terms[mono] + coef if mono in terms else coef
            if value:
                terms[mono] = value
            else:
                del terms[mono]
        return RingElem(_join(self.tower, other.tower), terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RingElem):
            if not other:
                return RingElem(self.tower, {})
            return RingElem(self.tower, {m: c * other for m, c in self.terms.items()})
        tower = _join(self.tower, other.tower)
        terms: Dict[Monomial, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mono_mul(tower, m1, m2)
                value = terms[mono] + c1 * c2 if mono in terms else c1 * c2
                if value:
                    terms[mono] = value
                else:
                    del terms[mono]
        return RingElem(tower, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RingElem):
            return self * other.inverse()
        return self * (self.tower.field.one() / other)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** -e
        result, base = self.tower.one(), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_unit(self) -> bool:
        """True for c * (product of Pi and R monomials) with c a nonzero rational function."""
        if len(self.terms) != 1:
            return False
        mono = next(iter(self.terms))
        return all(self.tower.gen(name).kind != SIGMA for name, _ in mono)

    def inverse(self) -> "RingElem":
        if not self.is_unit():
            raise ZeroDivisionError(f"{dump_elem(self)} is not invertible")
        mono, coef = next(iter(self.terms.items()))
        inv = _normalize(self.tower, {name: -e for name, e in mono})
        return RingElem(self.tower, {inv: self.tower.field.one() / coef})

    def is_rational(self) -> bool:
        return all(not mono for mono in self.terms)

    def rational(self):
        """The coefficient of the empty monomial."""
        return self.terms.get((), self.tower.field.zero())

    def names(self) -> frozenset:
        return frozenset(name for mono in self.terms for name, _ in mono)


# --- structure -----------------------------------------------------------------------------

def degree(x: RingElem, name: str) -> int:
    """Degree in one generator; -1 for zero."""
    if not x:
        return -1
    return max(dict(mono).get(name, 0) for mono in x.terms)


def coefficient(x: RingElem, name: str, e: int) -> RingElem:
    """Coefficient of name^e, free of that generator."""
    terms = {}
    for mono, coef in x.terms.items():
        exponents = dict(mono)
        if exponents.pop(name, 0) == e:
            terms[tuple(sorted(exponents.items()))] = coef
    return RingElem(x.tower, terms)


def split_monomial(tower: Tower, mono: Monomial) -> Tuple[Monomial, Monomial]:
    """(R/Pi part, Sigma part) of a monomial."""
    pi = tuple((n, e) for n, e in mono if tower.gen(n).kind != SIGMA)
    sig = tuple((n, e) for n, e in mono if tower.gen(n).kind == SIGMA)
    return pi, sig


def pi_components(x: RingElem) -> Dict[Monomial, RingElem]:
    """Group the terms by their R/Pi monomial; the values carry only Sigma monomials."""
    parts: Dict[Monomial, Dict[Monomial, object]] = {}
    for mono, coef in x.terms.items():
        pi, sig = split_monomial(x.tower, mono)
        parts.setdefault(pi, {})[sig] = coef
    return {pi: RingElem(x.tower, terms) for pi, terms in parts.items()}


def has_sigma(x: RingElem) -> bool:
    return any(x.tower.gen(name).kind == SIGMA for name in x.names())


def depth(x: RingElem) -> int:
    """Largest generator depth occurring in x; 0 for ground field elements."""
    return max((x.tower.gen(name).depth for name in x.names()), default=0)


def pi_ratio(tower: Tower, mono: Monomial):
    """sigma(T)/T for an R/Pi monomial T, as an element of K(t)."""
    result = tower.field.one()
    for name, e in mono:
        gen = tower.gen(name)
        if gen.kind == PI:
            result *= gen.ratio ** e
        elif gen.kind == ROOT:
            result *= tower.field.const(QQ(gen.ratio) ** e)
    return result


# --- the automorphism ----------------------------------------------------------------------

def sigma(tower: Tower, x: RingElem, j: int = 1) -> RingElem:
    """sigma^j(x); negative j applies the inverse automorphism."""
    tower = _join(tower, x.tower)
    for _ in range(abs(j)):
        x = _sigma_once(tower, x, j > 0)
    return x


def _sigma_once(tower: Tower, x: RingElem, forward: bool) -> RingElem:
    gf = tower.field
    step = 1 if forward else -1
    total = tower.zero()
    for mono, coef in x.terms.items():
        scalar = gf.shift(coef, step)
        pi = []
        sums = None
        for name, e in mono:
            gen = tower.gen(name)
            if gen.kind == PI:
                alpha = gen.ratio if forward else gf.shift(gen.ratio, -1)
                scalar = scalar * alpha ** e if forward else scalar / alpha ** e
                pi.append((name, e))
            elif gen.kind == ROOT:
                scalar = scalar * gf.const(QQ(gen.ratio) ** (e if forward else -e))
                pi.append((name, e))
            else:
                factor = _sigma_power(tower, name, e, forward)
                sums = factor if sums is None else sums * factor
        term = RingElem(tower, {tuple(pi): scalar})
        total = total + (term * sums if sums is not None else term)
    return total


@lru_cache(maxsize=4096)
def _sigma_power(tower: Tower, name: str, e: int, forward: bool) -> RingElem:
    gen = tower.gen(name)
    shift = gen.increment if forward else -sigma(tower, gen.increment, -1)
    return (tower.monomial(name) + shift) ** e


def is_constant(tower: Tower, x: RingElem) -> bool:
    return sigma(tower, x) == x


# --- evaluation ----------------------------------------------------------------------------

def _binding_key(gf: GroundField, bindings: Mapping[str, int]) -> tuple:
    return tuple(bindings[p] for p in gf.params)


def sigma_value(tower: Tower, gen: Generator, point: int, bindings: Mapping[str, int]) -> BigRat:
    """Value sum_{i=0}^{point-1} increment(i) of a Sigma generator (minus the reversed sum below 0).

    Partial sums are cached on the generator, so they live as long as the run's towers do.
    """
    if gen.hook is not None and point >= 0:
        return gen.hook(point, bindings)
    if point < 0:
        return -sum((elem_eval(tower, gen.increment, i, bindings) for i in range(point, 0)), QQ(0))
    key = _binding_key(tower.field, bindings)
    with gen.lock:
        values = gen.values.setdefault(key, [QQ(0)])
        while len(values) <= point:
            i = len(values) - 1
            values.append(values[-1] + elem_eval(tower, gen.increment, i, bindings))
        return values[point]


def _term_limit(tower: Tower, mono: Monomial, coef, point: int, bindings: Mapping[str, int]) -> LimitValue:
    value = LimitValue(*tower.field.leading_term_at(coef, point, bindings))
    for name, e in mono:
        gen = tower.gen(name)
        if gen.kind == SIGMA:
            value = value * LimitValue(sigma_value(tower, gen, point, bindings) ** e)
        else:
            value = value * limit_at(gen.term, point, bindings) ** e
    return value


def elem_eval(tower: Tower, x: RingElem, point: int, bindings: Mapping[str, int] = None) -> BigRat:
    """Value at t = point with the parameters bound; products and rational parts in the limit sense."""
    bindings = bindings or {}
    tower = _join(tower, x.tower)
    total = QQ(0)
    for mono, coef in x.terms.items():
        total += _term_limit(tower, mono, coef, point, bindings).value(point)
    return total


def symbolic_eval(tower: Tower, x: RingElem, point: Affine) -> Expr:
    """Value at t = point for a point affine in the parameters, as an expression in the parameters."""
    tower = _join(tower, x.tower)
    gf = tower.field
    at = affine_to_expr(gf, point, BoundVar("t"))
    at_origin = point.is_const() and point.const == 0
    terms = []
    for mono, coef in x.terms.items():
        if at_origin and any(tower.gen(name).kind == SIGMA for name, _ in mono):
            continue
        coef_expr, order = symbolic_at(HyperTerm(gf, coef), point)
        factors = [coef_expr]
        for name, e in mono:
            gen = tower.gen(name)
            if gen.kind == SIGMA:
                factors.append(power(substitute(gen.description, {"t": at}), const(e)))
                continue
            value, gen_order = symbolic_at(gen.term, point)
            factors.append(power(value, const(e)))
            order += gen_order * e
        if order < 0:
            raise PoleAtPoint(f"pole of order {-order} at {render(at)}", point)
        if order == 0:
            terms.append(mul(*factors))
    return add(*terms)


# --- expressions and debug serialization ---------------------------------------------------------

def gen_expr(gen: Generator, t_expr: Expr) -> Expr:
    return substitute(gen.description, {"t": t_expr})


def to_expr(x: RingElem, t_expr: Optional[Expr] = None) -> Expr:
    """The element as an expression with the ground variable replaced by ``t_expr``."""
    t_expr = t_expr if t_expr is not None else BoundVar("t")
    gf = x.tower.field
    terms = []
    for mono in sorted(x.terms):
        factors = [rational_to_expr(gf, x.terms[mono], t_expr)]
        for name, e in mono:
            factors.append(power(gen_expr(x.tower.gen(name), t_expr), const(e)))
        terms.append(mul(*factors))
    return add(*terms) if terms else IntConst(QQ(0))


def _mono_text(mono: Monomial) -> str:
    return "*".join(name if e == 1 else f"{name}^{e}" for name, e in mono)


def dump_elem(x: RingElem) -> str:
    """Deterministic text form: terms sorted by monomial, coefficients factored."""
    if not x:
        return "0"
    parts = []
    gf = x.tower.field
    for mono in sorted(x.terms):
        coef = render(rational_to_expr(gf, x.terms[mono]))
        parts.append(f"({coef})*{_mono_text(mono)}" if mono else f"({coef})")
    return " + ".join(parts)


def dump_tower(tower: Tower) -> str:
    gf = tower.field
    lines = [f"K = QQ({', '.join(gf.params)}); sigma(t) = t + 1"]
    for gen in tower.gens:
        if gen.kind == SIGMA:
            rule = f"sigma({gen.name}) = {gen.name} + {dump_elem(gen.increment)}"
        elif gen.kind == PI:
            rule = f"sigma({gen.name}) = ({render(rational_to_expr(gf, gen.ratio))})*{gen.name}"
        else:
            rule = f"sigma({gen.name}) = ({gen.ratio})*{gen.name}, {gen.name}^{gen.order} = 1"
        lines.append(f"{gen.name} [{gen.kind}, depth {gen.depth}]: {rule}; {gen.name}(t) = {render(gen.description)}")
    return "\n".join(lines)


def log_tower(tower: Tower):
    for line in dump_tower(tower).splitlines():
        logging.debug("tower: %s", line)


# --- generator construction ------------------------------------------------------------------

_SMALL_EXPONENTS = (1, -1, 2, -2, 3, -3)


def adjoin(tower: Tower, gen: Generator, check: bool = True) -> Tower:
    """The tower extended by ``gen``.

    With ``check`` a Sigma generator whose increment telescopes in the tower, or a Pi/R
    generator with a small power proportional to a tower element, raises DependentExtension.
    The Pi check is bounded and a miss is logged, not proven.
    """
    if check:
        witness = _dependency_witness(tower, gen)
        if witness is not None:
            raise DependentExtension(f"{gen.name} depends on {', '.join(tower.names()) or 'K(t)'}", witness)
    extended = tower.with_gen(gen)
    logging.debug("adjoined %s [%s, depth %d]: %s", gen.name, gen.kind, gen.depth, render(gen.description))
    return extended


def _dependency_witness(tower: Tower, gen: Generator) -> Optional[RingElem]:
    # pylint: disable=import-outside-toplevel,cyclic-import
    if gen.kind == SIGMA:
        from rhosum.rpt_tower import telescope_in_tower
        return telescope_in_tower(tower, gen.increment)
    from rhosum.prs_solver import PI_POWER_BOUND, prs_solve
    alpha = gen.ratio if gen.kind == PI else tower.field.const(gen.ratio)
    powers = range(1, gen.order) if gen.kind == ROOT else range(1, PI_POWER_BOUND + 1)
    for m in powers:
        for exponent in (m, -m) if gen.kind == PI else (m,):
            try:
                solutions = prs_solve(tower, [-(alpha ** exponent), tower.field.one()], [])
            except Incomplete as ex:
                logging.warning("unverified extension %s: %s", gen.name, ex)
                return None
            if solutions:
                return solutions[0][1]
    return None


def leading_sign(x: RingElem) -> int:
    mono = max(x.terms)
    return 1 if x.terms[mono].numer.LC > 0 else -1


def sigma_generator(tower: Tower, increment: RingElem, description: Optional[Expr] = None,
                    hook: Optional[Callable] = None, check: bool = True, stem: str = "s",
                    taken: Sequence[str] = ()) -> Tuple[Tower, RingElem]:
    """Extend by a sum with the given increment, reusing a generator that already has it.

    Returns the extended tower and the element T with sigma(T) = T + increment, T(0) = 0.
    The stored increment is sign normalized; T may then be minus the generator.
    """
    tower = _join(tower, increment.tower)
    for gen in tower.sigma_gens:
        if gen.increment == increment:
            return tower, tower.monomial(gen.name)
        if gen.increment == -increment:
            return tower, -tower.monomial(gen.name)
    if description is None:
        description = Sum("i", const(0), add(BoundVar("t"), const(-1)), to_expr(increment, BoundVar("i")))
    sign = leading_sign(increment)
    if sign < 0:
        increment, description = -increment, neg(description)
    gen = Generator(tower.fresh_name(stem, taken), SIGMA, increment=increment, depth=1 + depth(increment),
                    description=description, hook=hook)
    tower = adjoin(tower, gen, check=check)
    return tower, tower.monomial(gen.name) * sign


def _power_generator(tower: Tower, base: BigRat, exponent: int) -> Tuple[Tower, RingElem]:
    """(tower, base^(exponent*t)) with base -1 mapped to an R generator."""
    gf = tower.field
    zeros = (QQ(0),) * len(gf.params)
    for gen in tower.pi_gens:
        if gen.base is None:
            continue
        if gen.base == base:
            return tower, tower.monomial(gen.name, exponent)
        if base != -1 and gen.base != -1:
            for m in range(2, 7):
                if gen.base ** m == base:
                    return tower, tower.monomial(gen.name, exponent * m)
    term = make(gf, gf.one(), {}, {base: Affine(QQ(1), zeros, QQ(0))})
    description = power(IntConst(QQ(base)), BoundVar("t"))
    if base == -1:
        gen = Generator(tower.fresh_name("r"), ROOT, ratio=QQ(-1), order=2, term=term,
                        description=description, base=QQ(-1))
    else:
        gen = Generator(tower.fresh_name("p"), PI, ratio=gf.const(base), term=term,
                        description=description, base=QQ(base))
    tower = adjoin(tower, gen)
    return tower, tower.monomial(gen.name, exponent)


def represent_hyper(tower: Tower, term: HyperTerm) -> Tuple[Tower, RingElem]:
    rational, steps, rest = term.split()
    if not rational:
        return tower, tower.zero()
    if not rest.is_rational:
        return _gamma_generator(tower, term)
    elem = tower.element(rational)
    for base in sorted(steps):
        tower, part = _power_generator(tower, base, steps[base])
        elem = elem * part
    return tower, elem


def _gamma_generator(tower: Tower, term: HyperTerm) -> Tuple[Tower, RingElem]:
    for gen in tower.pi_gens:
        if gen.kind != PI or gen.base is not None:
            continue
        for m in _SMALL_EXPONENTS:
            q = quotient(term, gen.term ** m)
            if q.split()[2].is_rational:
                tower, part = represent_hyper(tower, q)
                return tower, part * tower.monomial(gen.name, m)
    if term.t_free:
        raise UnsupportedBase(f"constant factor {render(to_hyper_expr(term))} is not rational in the parameters")
    gf = tower.field
    normalized = HyperTerm(gf, gf.one(), term.gammas, term.powers)
    gen = Generator(tower.fresh_name("b"), PI, ratio=ratio(normalized), term=normalized,
                    description=to_hyper_expr(normalized, BoundVar("t")))
    tower = adjoin(tower, gen)
    return tower, tower.monomial(gen.name, coef=term.rational)


# --- expressions to tower elements ----------------------------------------------------------------

def _harmonic_hook(weights, scales, point, _bindings):
    return harmonic(weights, scales, point)


def _split_factors(expr: Expr) -> List[Tuple[Expr, int]]:
    if isinstance(expr, Mul):
        return [piece for factor in expr.factors for piece in _split_factors(factor)]
    if isinstance(expr, Neg):
        return [(IntConst(QQ(-1)), 1)] + _split_factors(expr.arg)
    if isinstance(expr, Div):
        return _split_factors(expr.num) + [(f, -e) for f, e in _split_factors(expr.den)]
    if isinstance(expr, Pow) and isinstance(expr.exponent, IntConst) and expr.exponent.value.denominator == 1:
        k = int(expr.exponent.value)
        return [(f, e * k) for f, e in _split_factors(expr.base)]
    return [(expr, 1)]


def _has_sums(expr: Expr) -> bool:
    return contains(expr, HarmonicSum) or contains(expr, Sum)


def represent(tower: Tower, factor: Expr, index: str) -> Tuple[Tower, RingElem]:
    """Express ``factor`` as an element of a (possibly extended) tower, ``index`` playing t.

    Rational parts become coefficients, hypergeometric parts Pi/R monomials, harmonic sums and
    indefinite inner sums Sigma monomials.  Raises NotIndefinite for a sum whose range or body
    depends on ``index`` other than through an upper bound index + c.
    """
    gf = tower.field
    r = to_rational(gf, factor, index)
    if r is not None:
        return tower, tower.element(r)
    if isinstance(factor, Add):
        total = tower.zero()
        for term in factor.terms:
            tower, part = represent(tower, term, index)
            total = total + part
        return tower, total
    hyper = hyper_one(gf)
    elem = tower.one()
    for piece, e in _split_factors(factor):
        if not _has_sums(piece):
            hyper = hyper * from_expr(gf, piece, index) ** e
            continue
        if e < 0:
            raise UnsupportedBase(f"sum in a denominator: {render(piece)}")
        if isinstance(piece, HarmonicSum):
            tower, part = _represent_harmonic(tower, piece, index)
        elif isinstance(piece, Sum):
            tower, part = _represent_inner_sum(tower, piece, index)
        else:
            tower, part = represent(tower, piece, index)
        elem = elem * part ** e
    tower, part = represent_hyper(tower, hyper)
    return tower, elem * part


def _upper_offset(gf: GroundField, upper: Expr, index: str) -> int:
    aff = affine(gf, upper, index)
    if aff.t != 1 or any(aff.params) or aff.const.denominator != 1:
        raise NotIndefinite(f"upper bound {render(upper)} is not {index} + constant")
    return int(aff.const)


def _represent_harmonic(tower: Tower, expr: HarmonicSum, index: str) -> Tuple[Tower, RingElem]:
    gf = tower.field
    offset = _upper_offset(gf, expr.upper, index)
    zeros = (QQ(0),) * len(gf.params)
    inner = None
    for i in reversed(range(len(expr.weights))):
        weights, scales = expr.weights[i:], expr.scales[i:]
        tower, scale = represent_hyper(tower, make(gf, gf.one(), {}, {scales[0]: Affine(QQ(1), zeros, QQ(1))}))
        increment = scale * (gf.one() / (gf.t + 1) ** weights[0])
        if inner is not None:
            increment = increment * sigma(tower, inner)
        tower, inner = sigma_generator(tower, increment, HarmonicSum(weights, scales, BoundVar("t")),
                                       partial(_harmonic_hook, weights, scales), stem="h")
    return tower, sigma(tower, inner, offset)


def _represent_inner_sum(tower: Tower, expr: Sum, index: str) -> Tuple[Tower, RingElem]:
    gf = tower.field
    lower = linear_form(expr.lower)
    if lower is None or set(lower) - {CONSTANT} or lower.get(CONSTANT, QQ(0)).denominator != 1:
        raise NotIndefinite(f"lower bound {render(expr.lower)} of the inner sum is not a constant")
    if index in free_names(expr.body):
        raise NotIndefinite(f"inner sum over {expr.index} has a body depending on {index}")
    lo = int(lower.get(CONSTANT, 0))
    offset = _upper_offset(gf, expr.upper, index)
    body = substitute(expr.body, {expr.index: add(BoundVar(index), const(lo))})
    tower, increment = represent(tower, body, index)
    if not increment:
        return tower, tower.zero()
    description = Sum(expr.index, const(lo), add(BoundVar("t"), const(lo - 1)), expr.body)
    try:
        tower, value = sigma_generator(tower, increment, description)
    except DependentExtension as ex:
        value = ex.witness - _value_at_zero(tower, ex.witness, index)
    return tower, sigma(tower, value, offset - lo + 1)


def _value_at_zero(tower: Tower, x: RingElem, index: str):
    gf = tower.field
    origin = Affine(QQ(0), (QQ(0),) * len(gf.params), QQ(0))
    value = to_rational(gf, symbolic_eval(tower, x, origin), index)
    if value is None:
        raise UnsupportedBase(f"cannot normalize the closed form {dump_elem(x)} at 0")
    return value
