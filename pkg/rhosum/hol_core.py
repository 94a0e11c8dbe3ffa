# -*- coding: utf-8 -*-
"""Holonomic extensions: a tower enlarged by the shifts of a sequence given by a recurrence.

A sequence X is described by

    X(k + r) = a_0(k) X(k) + ... + a_{r-1}(k) X(k + r - 1) + tail(k),      k >= start

with a_i in K(t) and tail in the tower.  Elements linear in X are kept as
g_0 x_0 + ... + g_{r-1} x_{r-1} + tail with x_i standing for X(t + i); sigma acts on them
through the recurrence.  Telescoping such elements splits into a problem for the leading
coefficient g_{r-1} (a recurrence of order r over the R/Pi part of the tower) and a plain
telescoping problem for the tail.
"""
import logging
import math
from dataclasses import dataclass, field
from threading import RLock
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ

from rhosum.diff_ring import (
    RingElem, Tower, dump_elem, elem_eval, has_sigma, pi_components, represent_hyper, sigma,
    sigma_generator, symbolic_eval, to_expr as to_elem_expr,
)
from rhosum.errors import (
    ConstraintViolated, DependentExtension, NoSolution, NonUnitLeading, NotFound, PoleAtLambda, PoleAtPoint,
    UnsupportedBase,
)
from rhosum.exact_arith import BigRat, GroundField, integer_roots
from rhosum.hyperterm import Affine, from_expr, make, rational_to_expr
from rhosum.oracle import eval_exact
from rhosum.prs_solver import KERNEL_RADIUS, prs_solve
from rhosum.rpt_tower import rpt, telescope_in_tower
from rhosum.sum_expr import (
    Add, Div, Expr, HarmonicSum, IntConst, Mul, Neg, Param, Pow, Sum, add, free_names, is_const, linear_form, mul,
    substitute,
)

"""Points at which a found constant is checked numerically."""
CHECK_POINTS = 11
"""The search for a pole-free start point gives up after this many steps."""
LAMBDA_SEARCH = 60
"""Candidate constant ratios c*(t+1)^e of new Pi generators for constant finding."""
RATIO_SCALES = (QQ(1), QQ(-1), QQ(2), QQ(-2), QQ(3), QQ(-3), QQ(4), QQ(-4), QQ(1, 2), QQ(-1, 2), QQ(1, 3), QQ(-1, 3),
                QQ(1, 4), QQ(-1, 4))
RATIO_POWERS = (0, 1, -1)


def default_bindings(gf: GroundField) -> Dict[str, int]:
    """Parameter values used for numeric checks."""
    return {p: 7 + 3 * i for i, p in enumerate(gf.params)}


@dataclass
class HolExtension:
    """A sequence X given by a recurrence over a tower, with its seed values."""

    tower: Tower
    coeffs: Tuple[object, ...]
    tail: RingElem
    start: int = 0
    initial: Optional[Callable[[int], Optional[Expr]]] = None
    name: str = "X"
    parent: Optional["HolExtension"] = None
    _values: Dict[tuple, Dict[int, BigRat]] = field(default_factory=dict, repr=False)
    _lock: RLock = field(default_factory=RLock, repr=False)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def ground(self) -> GroundField:
        return self.tower.field

    def initial_expr(self, point: int) -> Optional[Expr]:
        """X(point) as an expression in the parameters, when it is known."""
        if self.initial is not None:
            try:
                value = self.initial(point)
            except (KeyError, IndexError):
                value = None
            if value is not None:
                return value
        if self.parent is not None:
            return self.parent.initial_expr(point)
        if not self.ground.params:
            return IntConst(self.value(point, {}))
        return None

    def _seed(self, point: int, bindings: Mapping[str, int]) -> BigRat:
        if self.parent is not None:
            return self.parent.value(point, bindings)
        expr = self.initial(point) if self.initial is not None else None
        if expr is None:
            raise NotFound(f"no initial value {self.name}({point})")
        return eval_exact(expr, bindings)

    def value(self, point: int, bindings: Mapping[str, int]) -> BigRat:
        """Numeric X(point) for point >= start, unrolled from the seed values."""
        key = tuple(bindings.get(p) for p in self.ground.params)
        # reentrant: unrolling reads lower values through value() again
        with self._lock:
            table = self._values.setdefault(key, {})
            if point in table:
                return table[point]
            if point < self.start + self.order:
                table[point] = self._seed(point, bindings)
                return table[point]
            for k in range(self.start + self.order, point + 1):
                if k not in table:
                    table[k] = self._step(k, bindings)
            return table[point]

    def _step(self, point: int, bindings: Mapping[str, int]) -> BigRat:
        base = point - self.order
        gf = self.ground
        try:
            total = elem_eval(self.tower, self.tail, base, bindings)
            for i, a in enumerate(self.coeffs):
                if a:
                    total += gf.evaluate(a, base, bindings) * self.value(base + i, bindings)
            return total
        except PoleAtPoint:
            return self._seed(point, bindings)

    def lifted(self, xs: Sequence = (), tail=None) -> "LiftedElem":
        xs = list(xs) + [self.tower.zero()] * (self.order - len(xs))
        xs = [x if isinstance(x, RingElem) else self.tower.element(x) for x in xs]
        tail = self.tower.zero() if tail is None else (tail if isinstance(tail, RingElem) else self.tower.element(tail))
        return LiftedElem(tuple(xs), tail)


@dataclass(frozen=True)
class LiftedElem:
    """g_0 x_0 + ... + g_{r-1} x_{r-1} + tail."""

    xs: Tuple[RingElem, ...]
    tail: RingElem

    def __add__(self, other: "LiftedElem") -> "LiftedElem":
        return LiftedElem(tuple(a + b for a, b in zip(self.xs, other.xs)), self.tail + other.tail)

    def __sub__(self, other: "LiftedElem") -> "LiftedElem":
        return LiftedElem(tuple(a - b for a, b in zip(self.xs, other.xs)), self.tail - other.tail)

    def __mul__(self, scalar) -> "LiftedElem":
        return LiftedElem(tuple(a * scalar for a in self.xs), self.tail * scalar)

    __rmul__ = __mul__

    def __bool__(self):
        return any(self.xs) or bool(self.tail)

    def __repr__(self):
        parts = [f"({dump_elem(g)})*x{i}" for i, g in enumerate(self.xs) if g]
        parts.append(f"({dump_elem(self.tail)})")
        return " + ".join(parts)


def _sigma(x: RingElem, j: int = 1) -> RingElem:
    return sigma(x.tower, x, j)


def sigma_lifted(ext: HolExtension, f: LiftedElem) -> LiftedElem:
    """Apply sigma, rewriting sigma(x_{r-1}) = X(t + r) through the recurrence."""
    r = ext.order
    if r == 0:
        return LiftedElem((), _sigma(f.tail))
    top = _sigma(f.xs[-1])
    xs = [top * ext.coeffs[0]]
    for i in range(1, r):
        xs.append(_sigma(f.xs[i - 1]) + top * ext.coeffs[i])
    return LiftedElem(tuple(xs), top * ext.tail + _sigma(f.tail))


def eval_lifted(ext: HolExtension, f: LiftedElem, point: int, bindings: Mapping[str, int] = None) -> BigRat:
    bindings = bindings or {}
    total = elem_eval(ext.tower, f.tail, point, bindings)
    for i, g in enumerate(f.xs):
        if g:
            total += elem_eval(ext.tower, g, point, bindings) * ext.value(point + i, bindings)
    return total


# --- the leading coefficient problem ---------------------------------------------------------

def higher_coefficients(ext: HolExtension) -> List[object]:
    """Coefficients b_0..b_r of  sum b_i sigma^i(y) = ...  for the leading coefficient y = g_{r-1}."""
    gf = ext.ground
    r = ext.order
    return [-gf.one()] + [gf.shift(ext.coeffs[r - i], i - 1) for i in range(1, r + 1)]


def higher_rhs(ext: HolExtension, f: LiftedElem) -> RingElem:
    """sum_{j < r} sigma^{r-1-j}(f_j)."""
    r = ext.order
    total = ext.tower.zero()
    for j in range(r):
        total = total + _sigma(f.xs[j], r - 1 - j)
    return total


def lemma1_assemble(ext: HolExtension, f: LiftedElem, lead: RingElem, tail: RingElem) -> LiftedElem:
    """The element g with leading coefficient ``lead`` whose x-part satisfies sigma(g) - g = f.

    Raises ConstraintViolated when ``lead`` does not solve the leading coefficient recurrence.
    """
    r = ext.order
    top = _sigma(lead)
    xs = [top * ext.coeffs[0] - f.xs[0]]
    for i in range(1, r):
        xs.append(_sigma(xs[i - 1]) + top * ext.coeffs[i] - f.xs[i])
    if xs[-1] != lead:
        raise ConstraintViolated(f"leading coefficient {dump_elem(lead)} violates the recurrence constraint")
    return LiftedElem(tuple(xs), tail)


@dataclass
class TelescopingResult:
    constants: List[object]
    certificate: LiftedElem
    tower: Tower
    new_generators: tuple = ()
    warnings: List[str] = field(default_factory=list)


def _reduce_lead(rows: List[Tuple[List[object], RingElem]]) -> List[Tuple[List[object], RingElem]]:
    """Put a row with c_1 = 1 first and clear c_1 from the others."""
    pivot = next((i for i, (c, _) in enumerate(rows) if c[0]), None)
    if pivot is None:
        raise NoSolution("no solution of the leading coefficient problem with c1 != 0")
    c, g = rows[pivot]
    scale = 1 / c[0]
    first = ([x * scale for x in c], g * scale)
    rest = []
    for i, (ci, gi) in enumerate(rows):
        if i == pivot:
            continue
        factor = ci[0]
        rest.append(([a - factor * b for a, b in zip(ci, first[0])], gi - first[1] * factor))
    return [first] + rest


def algorithm1(ext: HolExtension, fs: Sequence[LiftedElem], variant: str = "rpt1",
               kernel_radius: int = KERNEL_RADIUS) -> TelescopingResult:
    """c with c_1 = 1 and g with sigma(g) - g = c_1 f_1 + ... + c_d f_d in the extension."""
    gf = ext.ground
    if ext.order == 0:
        result = rpt(variant, ext.tower, [f.tail for f in fs], kernel_radius)
        return TelescopingResult(result.constants, LiftedElem((), result.certificate), result.tower,
                                 result.new_generators, result.warnings)
    rhs = [higher_rhs(ext, f) for f in fs]
    if any(has_sigma(x) for x in rhs):
        raise NoSolution("coefficients of the sequence shifts must be free of sums")
    rows = prs_solve(ext.tower, higher_coefficients(ext), rhs, kernel_radius)
    logging.debug("leading coefficient problem: solution space of dimension %d", len(rows))
    rows = _reduce_lead(rows)
    phis = []
    for c, gamma in rows:
        phi = ext.tower.zero()
        for ci, f in zip(c, fs):
            if ci:
                phi = phi + f.tail * ci
        phis.append(phi - ext.tail * _sigma(gamma))
    result = rpt(variant, ext.tower, phis, kernel_radius)
    kappa = result.constants
    constants = [gf.zero()] * len(fs)
    lead = ext.tower.zero()
    for k, (c, gamma) in zip(kappa, rows):
        if k:
            constants = [a + k * b for a, b in zip(constants, c)]
            lead = lead + gamma * k
    combined = ext.lifted()
    for ci, f in zip(constants, fs):
        if ci:
            combined = combined + f * ci
    certificate = lemma1_assemble(ext, combined, lead, result.certificate)
    return TelescopingResult(constants, certificate, result.tower, result.new_generators, result.warnings)


def closed_partial_sum(ext: HolExtension, f: LiftedElem, variant: str = "rpt4") -> TelescopingResult:
    """g with sigma(g) - g = f, so that sum_{k=a}^{b} f(k) = g(b+1) - g(a)."""
    return algorithm1(ext, [f], variant)


# --- constants and order reduction -----------------------------------------------------------

@dataclass
class FoundConstant:
    """A nonzero element g with sigma(g) = g in the extension, over ``tower``."""

    certificate: LiftedElem
    tower: Tower
    case: str


def _homogeneous(tower: Tower, coeffs: Sequence, kernel_radius: int) -> Optional[RingElem]:
    for _, h in prs_solve(tower, coeffs, [], kernel_radius):
        if h:
            return h
    return None


def _ratio_candidates(gf: GroundField):
    zeros = (QQ(0),) * len(gf.params)
    for scale in RATIO_SCALES:
        for e in RATIO_POWERS:
            if scale == 1 and e == 0:
                continue
            gammas = {Affine(QQ(1), zeros, QQ(1)): e} if e else {}
            yield f"{scale}*(t+1)^{e}", make(gf, gf.one(), gammas, {scale: Affine(QQ(1), zeros, QQ(0))})


def _sum_components(tower: Tower, rhs: RingElem) -> Tuple[RingElem, Tower]:
    """A solution of sigma(g) - g = rhs adjoining one sum per Pi monomial component where needed."""
    total = tower.zero()
    for mono, part in sorted(pi_components(rhs).items()):
        piece = RingElem(rhs.tower, {mono: tower.field.one()}) * part
        g = telescope_in_tower(tower, piece)
        if g is None:
            tower, g = sigma_generator(tower, piece, check=False)
        total = total + g
    return total, tower


def find_constant(ext: HolExtension, kernel_radius: int = KERNEL_RADIUS) -> FoundConstant:
    """A nontrivial constant of the extension, or NotFound.

    The leading coefficient h solves the homogeneous leading coefficient recurrence, first in the
    tower and then in the tower extended by one new Pi generator.  The tail solves a telescoping
    problem, adjoining sums where it has no solution in the tower.
    """
    if ext.order == 0:
        raise NotFound("the sequence is already given in closed form")
    coeffs = higher_coefficients(ext)
    tower = ext.tower
    h = _homogeneous(tower, coeffs, kernel_radius)
    case = "1.1"
    if h is None:
        for label, term in _ratio_candidates(ext.ground):
            try:
                extended, _ = represent_hyper(tower, term)
            except (DependentExtension, UnsupportedBase):
                continue
            if extended.gens == tower.gens:
                continue
            h = _homogeneous(extended, coeffs, kernel_radius)
            if h is not None:
                logging.debug("constant search: new generator with ratio %s", label)
                tower = extended
                case = "1.2"
                break
    if h is None:
        raise NotFound(f"no constant for {ext.name} of order {ext.order}")
    rhs = -(ext.tail * _sigma(h))
    gamma = telescope_in_tower(tower, rhs, kernel_radius)
    if gamma is not None:
        case += "/2.1"
    else:
        gamma, tower = _sum_components(tower, rhs)
        case += "/2.2"
    certificate = lemma1_assemble(ext, ext.lifted(), h, gamma)
    logging.debug("constant found (case %s): %s", case, certificate)
    return FoundConstant(certificate, tower, case)


def rational_value(gf: GroundField, expr: Expr):
    """A t-free expression as an element of K, unrolling sums with constant bounds; None if impossible."""
    if not free_names(expr):
        try:
            return gf.const(eval_exact(expr, {}))
        except Exception:  # pylint: disable=broad-except
            return None
    parts = None
    if isinstance(expr, Add):
        parts = [rational_value(gf, term) for term in expr.terms]
        return None if any(p is None for p in parts) else sum(parts, gf.zero())
    if isinstance(expr, Mul):
        parts = [rational_value(gf, factor) for factor in expr.factors]
        if any(p is None for p in parts):
            return None
        result = gf.one()
        for p in parts:
            result *= p
        return result
    if isinstance(expr, Neg):
        inner = rational_value(gf, expr.arg)
        return None if inner is None else -inner
    if isinstance(expr, Div):
        num, den = rational_value(gf, expr.num), rational_value(gf, expr.den)
        return None if num is None or not den else num / den
    if isinstance(expr, Pow) and isinstance(expr.exponent, IntConst) and expr.exponent.value.denominator == 1:
        base = rational_value(gf, expr.base)
        return None if base is None else base ** int(expr.exponent.value)
    if isinstance(expr, Sum):
        lower, upper = linear_form(expr.lower), linear_form(expr.upper)
        if lower is None or upper is None or set(lower) - {""} or set(upper) - {""}:
            return None
        total = gf.zero()
        for i in range(int(lower.get("", 0)), int(upper.get("", 0)) + 1):
            part = rational_value(gf, substitute(expr.body, {expr.index: IntConst(QQ(i))}))
            if part is None:
                return None
            total += part
        return total
    if isinstance(expr, HarmonicSum):
        return None
    try:
        term = from_expr(gf, expr, "t")
    except UnsupportedBase:
        return None
    if term.is_rational and gf.is_const(term.rational):
        return term.rational
    return None


def _find_lambda(ext: HolExtension, g: LiftedElem, bindings: Mapping[str, int]) -> Tuple[int, BigRat]:
    for lam in range(ext.start, ext.start + LAMBDA_SEARCH):
        try:
            values = [eval_lifted(ext, g, k, bindings) for k in range(lam, lam + CHECK_POINTS)]
        except PoleAtPoint:
            continue
        if len(set(values)) != 1:
            raise ConstraintViolated(f"element is not constant: values {values[:3]}...")
        return lam, values[0]
    raise PoleAtLambda(f"no pole-free start point below {ext.start + LAMBDA_SEARCH}")


def _constant(ext: HolExtension, g: LiftedElem, lam: int, numeric: BigRat, bindings: Mapping[str, int]):
    gf = ext.ground
    if not gf.params:
        return gf.const(numeric)
    point = Affine(QQ(0), (QQ(0),) * len(gf.params), QQ(lam))
    total = rational_value(gf, symbolic_eval(g.tail.tower, g.tail, point))
    for i, gi in enumerate(g.xs):
        if not gi:
            continue
        seed = ext.initial_expr(lam + i)
        coef = rational_value(gf, symbolic_eval(gi.tower, gi, point))
        value = None if seed is None else rational_value(gf, seed)
        if total is None or coef is None or value is None:
            raise NotFound(f"constant at {lam} is not rational in {', '.join(gf.params)}")
        total += coef * value
    if total is None or gf.evaluate(total, 0, bindings) != numeric:
        raise NotFound(f"constant at {lam} could not be determined symbolically")
    return total


def reduce_order(ext: HolExtension, found: FoundConstant, bindings: Mapping[str, int] = None) -> HolExtension:
    """Use the constant G = c to express X(k + r - 1) by lower shifts; the result has order r - 1."""
    g = found.certificate
    lead = g.xs[-1]
    if not lead.is_unit():
        raise NonUnitLeading(f"leading coefficient {dump_elem(lead)} is not invertible")
    inv = lead.inverse()
    coeffs = []
    for gi in g.xs[:-1]:
        q = -(gi * inv)
        if not q.is_rational():
            raise NonUnitLeading(f"coefficient {dump_elem(q)} of the reduced recurrence is not rational")
        coeffs.append(q.rational())
    bindings = dict(bindings or default_bindings(ext.ground))
    lam, numeric = _find_lambda(ext, g, bindings)
    c = _constant(ext, g, lam, numeric, bindings)
    tail = (found.tower.element(c) - g.tail) * inv
    logging.debug("constant %s at lambda = %d", c.as_expr(), lam)
    return HolExtension(found.tower, tuple(coeffs), tail, start=lam, initial=ext.initial, name=ext.name,
                        parent=ext)


def reduce_fully(ext: HolExtension, bindings: Mapping[str, int] = None,
                 kernel_radius: int = KERNEL_RADIUS) -> HolExtension:
    """Reduce the order while constants can be found."""
    while ext.order > 0:
        try:
            found = find_constant(ext, kernel_radius)
            ext = reduce_order(ext, found, bindings)
        except (NotFound, NonUnitLeading, PoleAtLambda, ConstraintViolated) as ex:
            logging.debug("order of %s stays %d: %s", ext.name, ext.order, ex)
            break
        logging.info("Reduced %s to order %d", ext.name, ext.order)
    return ext


def _integer_content(fracs) -> BigRat:
    """gcd of the numerators over lcm of the denominators of all rational coefficients of polynomials."""
    numerator, denominator = 0, 1
    for f in fracs:
        for c in f.numer.quo_ground(f.denom.LC).coeffs():
            c = QQ(c)
            numerator = math.gcd(numerator, int(c.numerator))
            denominator = denominator * int(c.denominator) // math.gcd(denominator, int(c.denominator))
    return QQ(numerator, denominator) if numerator else QQ(1)


def normalize_coefficients(gf: GroundField, coeffs: Sequence) -> Tuple[List[object], object]:
    """Scale coefficients to coprime polynomials with positive leading coefficient of the last one.

    Returns the scaled coefficients and the scale factor.
    """
    nonzero = [c for c in coeffs if c]
    if not nonzero:
        return list(coeffs), gf.one()
    common = gf.ring.one
    for c in nonzero:
        common = common.lcm(c.denom)
    polys = [(c * gf.from_poly(common)).numer for c in nonzero]
    content = polys[0]
    for p in polys[1:]:
        content = content.gcd(p)
    scale = gf.from_poly(common) / gf.from_poly(content)
    scale = scale / _integer_content([c * scale for c in nonzero])
    last = next(c for c in reversed(coeffs) if c) * scale
    if last.numer.LC < 0:
        scale = -scale
    return [c * scale for c in coeffs], scale


# --- recurrences ------------------------------------------------------------------------------

@dataclass
class Recurrence:
    """coeffs[0](n) S(n) + ... + coeffs[r](n) S(n + r) = rhs(n)  for n >= start.

    The coefficients are polynomials of the ground field, whose t stands for ``variable``.
    """

    variable: str
    ground: GroundField
    coeffs: List[object]
    rhs: Expr
    start: int = 0

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coefficient_expr(self, i: int) -> Expr:
        return rational_to_expr(self.ground, self.coeffs[i], Param(self.variable))

    def residual(self, values: Sequence[BigRat], point: int, bindings: Mapping[str, int] = None) -> BigRat:
        """Left minus right side at ``point`` for the values S(point), ..., S(point + r)."""
        bindings = dict(bindings or {})
        total = QQ(0)
        for c, value in zip(self.coeffs, values):
            if c:
                total += self.ground.evaluate(c, point, bindings) * value
        bindings[self.variable] = point
        return total - eval_exact(self.rhs, bindings)

    def roots(self) -> List[int]:
        """Integer points where the leading coefficient vanishes for all parameter values."""
        return integer_roots(self.coeffs[-1].numer)


def normalized_recurrence(variable: str, gf: GroundField, coeffs: Sequence, rhs: Optional[RingElem] = None,
                          definite: Optional[Expr] = None, start: int = 0) -> Recurrence:
    """A recurrence with coprime polynomial coefficients, scaling the right-hand side alike.

    ``rhs`` is the part living in a tower over ``gf``; ``definite`` is an expression part, e.g.
    a residual definite sum, in the variable and the parameters.
    """
    coeffs = list(coeffs)
    while len(coeffs) > 1 and not coeffs[-1]:
        coeffs.pop()
    scaled, scale = normalize_coefficients(gf, coeffs)
    n = Param(variable)
    parts = []
    if rhs is not None and rhs:
        parts.append(to_elem_expr(rhs * scale, n))
    if definite is not None and not is_const(definite, 0):
        parts.append(mul(rational_to_expr(gf, scale, n), definite))
    return Recurrence(variable, gf, scaled, add(*parts), start)
