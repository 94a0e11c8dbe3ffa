# -*- coding: utf-8 -*-
"""Recurrences for nested definite sums, computed from the innermost sum outwards.

For a nest  S(n) = sum_{k1} h1 sum_{k2} h2 ... sum_{km} hm  every layer is described by a
refined holonomic system: a recurrence in the layer's own variable (the index of the next
sum out) whose inhomogeneous part lives in a tower, plus one cross-shift rule per further
parameter.  A layer is processed by

1. writing the shifted summands h_u * X through the inner system (``summand_normal_form``),
2. finding a telescoping relation with ``algorithm1``,
3. summing the certificate over the summation range; boundary values and compensation terms
   for shifted bounds become the right-hand side,
4. expressing that right-hand side in a tower over the next layer (``simplify_definite_rhs``
   for definite sums that remain).

The outermost layer yields the final :class:`rhosum.hol_core.Recurrence`.
"""
import logging
import time
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ

from rhosum.closed_form import solve_recurrence
from rhosum.config import RunConfig
from rhosum.diff_ring import (
    RingElem, Tower, dump_elem, elem_eval, gen_expr, log_tower, represent, sigma, symbolic_eval,
)
from rhosum.diff_ring import to_expr as elem_expr
from rhosum.errors import (
    EmptyCore, Incomplete, NoRecurrenceWithinLimits, NotIndefinite, OracleError, PoleAtPoint, RangeViolation,
    ResourceLimit, RhosumError, UnresolvedDefiniteSum, UnsupportedBase, VerificationFailed,
)
from rhosum.exact_arith import BigRat, GroundField, ground_field, integer_roots, transfer
from rhosum.hol_core import (
    HolExtension, LiftedElem, Recurrence, algorithm1, default_bindings, eval_lifted, normalized_recurrence,
    rational_value, reduce_fully, sigma_lifted,
)
from rhosum.hyperterm import Affine, affine, affine_to_expr, affine_value, rational_to_expr
from rhosum.oracle import eval_exact
from rhosum.parser import spec_of
from rhosum.sum_expr import (
    CONSTANT, ONE, ZERO, Add, BoundVar, Expr, HarmonicSum, Mul, Neg, Param, Sum, SumSpec, add, const, contains, div,
    free_names, is_const, linear_form, mul, neg, render, shift_param, sub, substitute,
)
from rhosum.serialize import certificate_lines
from rhosum.utils.run_utils import Deadline, parallel_map
from rhosum.verify import CERTIFICATE_CHECKS, check_certificate, verify_recurrence

"""Largest number of points cut off at the upper end of a summation range around poles."""
MAX_SPLIT = 8
"""Integer poles further than this above the lower bound are not cleared."""
POLE_SEARCH = 30
"""Points at which a cross-shift rule is checked numerically."""
CROSS_CHECKS = 6

Shift = Mapping[str, int]


@dataclass(frozen=True)
class Layer:
    """One sum of the nest: sum_{index = lower}^{upper} factor * (inner sum).

    ``expr`` is the whole sum from this layer inwards.  ``outer`` is the variable of the
    sequence the layer defines: the index of the next sum out, or the distinguished parameter.
    ``params`` are the parameters while summing over ``index``, ``outer`` first;
    ``next_params`` those of the field the resulting sequence lives in, with t standing for
    ``outer``.
    """

    index: str
    lower: Expr
    upper: Expr
    factor: Expr
    expr: Expr
    outer: str
    params: Tuple[str, ...]
    next_params: Tuple[str, ...]

    @property
    def ground(self) -> GroundField:
        return ground_field(self.params)

    @property
    def next_ground(self) -> GroundField:
        return ground_field(self.next_params)


def layers_of(spec: SumSpec) -> List[Layer]:
    """The layers of a nest, innermost first."""
    quantifiers, factors = spec.quantifiers, spec.factors
    if not quantifiers:
        raise NotIndefinite("the input is not a definite sum")
    layers = []
    inner: Expr = ONE
    for u in reversed(range(len(quantifiers))):
        q = quantifiers[u]
        expr = Sum(q.index, q.lower, q.upper, mul(factors[u], inner))
        outer = quantifiers[u - 1].index if u > 0 else spec.distinguished
        names = sorted(free_names(expr) - {outer})
        layers.append(Layer(q.index, q.lower, q.upper, factors[u], expr, outer, (outer,) + tuple(names), ()))
        inner = expr
    # the field of a layer's sequence is the summation field of the layer further out
    for u, layer in enumerate(layers):
        if u + 1 < len(layers):
            next_params = layers[u + 1].params
        else:
            next_params = tuple(sorted(free_names(layer.expr) - {layer.outer}))
        layers[u] = replace(layer, next_params=next_params)
    return layers


@dataclass
class RefinedHolonomicSystem:
    """A sequence X(index) given by a recurrence over a tower, with cross-shift rules.

    ``cross[p]`` expresses X(p + 1, index) through X(p, index), ..., X(p, index + r - 1).
    """

    index: str
    expr: Expr
    extension: HolExtension
    cross: Dict[str, LiftedElem] = field(default_factory=dict)
    valid_from: int = 0
    tactic: str = ""

    @property
    def ground(self) -> GroundField:
        return self.extension.ground

    @property
    def tower(self) -> Tower:
        return self.extension.tower

    @property
    def order(self) -> int:
        return self.extension.order

    @property
    def params(self) -> Tuple[str, ...]:
        return tuple(sorted(free_names(self.expr) - {self.index}))

    def at(self, point: Affine) -> Expr:
        """X at a point affine in the parameters, as an expression."""
        return substitute(self.expr, {self.index: affine_to_expr(self.ground, point, BoundVar(self.index))})

    def describe(self) -> str:
        """Pure-shift rule as text."""
        gf = self.ground
        x = BoundVar(self.index)
        ext = self.extension
        terms = [f"({render(rational_to_expr(gf, a, x))})*X({self.index}+{i})" for i, a in enumerate(ext.coeffs) if a]
        if ext.tail:
            terms.append(f"({dump_elem(ext.tail)})")
        return f"X({self.index}+{ext.order}) = {' + '.join(terms) or '0'}"


def base_system(gf: GroundField, index: str) -> RefinedHolonomicSystem:
    """The system of the constant sequence 1, with identity cross shifts for all parameters.

    It is kept in closed form: an extension of order 0 with tail 1, which is the relation
    X(index + 1) = X(index) solved.
    """
    tower = Tower(gf)
    ext = HolExtension(tower, (), tower.one(), initial=lambda _point: ONE, name="X")
    return RefinedHolonomicSystem(index, ONE, ext, {}, 0, "base")


# --- parameter shifts of tower elements ----------------------------------------------------------

def shift_element(tower: Tower, x: RingElem, name: str, i: int) -> Tuple[Tower, RingElem]:
    """x with the parameter ``name`` replaced by name + i, re-expressed in the tower."""
    if i == 0 or not x or name not in x.tower.field.params:
        return tower, x
    return represent(tower, shift_param(elem_expr(x), name, i), "t")


def shift_lifted(tower: Tower, f: LiftedElem, name: str, i: int) -> Tuple[Tower, LiftedElem]:
    xs = []
    for g in f.xs:
        tower, g = shift_element(tower, g, name, i)
        xs.append(g)
    tower, tail = shift_element(tower, f.tail, name, i)
    return tower, LiftedElem(tuple(xs), tail)


def _unit(ext: HolExtension, tower: Tower) -> LiftedElem:
    """x_0, or the closed form itself for an extension of order 0."""
    if ext.order == 0:
        return LiftedElem((), ext.tail)
    return LiftedElem(tuple(tower.one() if i == 0 else tower.zero() for i in range(ext.order)), tower.zero())


def _combine(ext: HolExtension, rule: LiftedElem, previous: LiftedElem) -> LiftedElem:
    """sum_l rule.xs[l] * sigma^l(previous) + rule.tail."""
    total = LiftedElem(tuple(g * 0 for g in previous.xs), rule.tail)
    current = previous
    for l, g in enumerate(rule.xs):
        if g:
            total = total + current * g
        if l + 1 < len(rule.xs):
            current = sigma_lifted(ext, current)
    return total


def _sequence_shift(system: RefinedHolonomicSystem, tower: Tower, shift: Shift) -> Tuple[Tower, LiftedElem]:
    """X(params + shift, index) in terms of X(params, index + j)."""
    ext = system.extension
    unit = _unit(ext, tower)
    moved = {name: i for name, i in shift.items() if i and name in system.params}
    if not moved:
        return tower, unit
    (name, i), = moved.items()
    if ext.order == 0:
        tower, tail = shift_element(tower, ext.tail, name, i)
        return tower, LiftedElem((), tail)
    rule = system.cross.get(name)
    if rule is None:
        raise RangeViolation(f"no cross-shift rule for {name}")
    current = unit
    for j in range(i):
        tower, shifted = shift_lifted(tower, rule, name, j)
        current = _combine(ext, shifted, current)
    return tower, current


def summand_normal_form(system: RefinedHolonomicSystem, factor: Expr,
                        shift: Shift) -> Tuple[HolExtension, LiftedElem]:
    """factor(params + shift, index) * X(params + shift, index) as an element over the system.

    Returns the extension with its tower enlarged as needed and the lifted element.  Only
    nonnegative shifts of a single parameter are supported.
    """
    moved = {name: i for name, i in shift.items() if i}
    if any(i < 0 for i in moved.values()):
        raise RangeViolation(f"negative shift {moved} leaves the range of the system")
    if len(moved) > 1:
        raise RangeViolation(f"shift {moved} moves more than one parameter")
    shifted = factor
    for name, i in moved.items():
        shifted = shift_param(shifted, name, i)
    tower, h = represent(system.tower, shifted, system.index)
    tower, x = _sequence_shift(system, tower, moved)
    ext = replace(system.extension, tower=tower) if tower is not system.tower else system.extension
    return ext, x * h


# --- reports ------------------------------------------------------------------------------------

@dataclass
class LayerReport:
    """What the sum over ``index`` contributed to the run."""

    index: str
    outer: str
    order: int = -1
    tactic: str = ""
    shifts: int = 0
    attempts: int = 0
    valid_from: int = 0
    new_generators: List[str] = field(default_factory=list)
    telescoping_points: List[str] = field(default_factory=list)
    cross_rules: List[str] = field(default_factory=list)
    unresolved: List[str] = field(default_factory=list)
    seconds: float = 0.0


@dataclass
class ExceptionalSplit:
    """Points cut off at the ends of a summation range and compensated explicitly."""

    index: str
    lower_cut: int
    upper_cut: int
    strategy: str = "boundary"


@dataclass
class PipelineReport:
    layers: List[LayerReport] = field(default_factory=list)
    splits: List[ExceptionalSplit] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    seconds: float = 0.0

    def warn(self, message: str):
        logging.warning(message)
        self.warnings.append(message)

    def lines(self) -> List[str]:
        """Human readable summary, one item per line."""
        lines = []
        for entry in self.layers:
            lines.append(f"sum over {entry.index}: order {entry.order} in {entry.outer} by {entry.tactic} with "
                         f"{entry.shifts} shifts, valid from {entry.outer} = {entry.valid_from} "
                         f"({entry.attempts} attempts, {entry.seconds:.2f} s)")
            if entry.new_generators:
                lines.append(f"  adjoined: {', '.join(entry.new_generators)}")
            lines.extend(f"  telescoping point: {point}" for point in entry.telescoping_points)
            lines.extend(f"  cross shift: {rule}" for rule in entry.cross_rules)
            lines.extend(f"  unresolved definite sum: {term}" for term in entry.unresolved)
        for split in self.splits:
            lines.append(f"range of {split.index} cut by {split.lower_cut} below and {split.upper_cut} above "
                         f"({split.strategy})")
        lines.extend(f"warning: {message}" for message in self.warnings)
        return lines


# --- summing a telescoping relation over the range ---------------------------------------------------

@dataclass
class Relation:
    """sum_i coeffs[i] * Y(params + shifts[i]) = rhs + definite, in the layer's outer variable.

    ``coeffs`` live in the next ground field, ``rhs`` in ``tower`` over it; the relation holds
    from ``start`` on.  Before verification ``start`` is the bound the derivation guarantees and
    ``singular`` holds the integer points where the derivation used a relation at a pole.
    """

    variable: str
    ground: GroundField
    shifts: List[Dict[str, int]]
    coeffs: List[object]
    tower: Tower
    rhs: RingElem
    definite: Expr = ZERO
    start: int = 0
    tactic: str = ""
    new_generators: Tuple[str, ...] = ()
    points: Tuple[str, ...] = ()
    unresolved: Tuple[str, ...] = ()
    cuts: Tuple[int, int] = (0, 0)
    singular: Tuple[int, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1


def _shifted(expr: Expr, shift: Shift) -> Expr:
    for name, i in shift.items():
        expr = shift_param(expr, name, i)
    return expr


def _bounds(layer: Layer, shifts: Sequence[Shift]) -> Tuple[List[Affine], List[Affine]]:
    gf = layer.ground
    lowers = [affine(gf, _shifted(layer.lower, s), layer.index) for s in shifts]
    uppers = [affine(gf, _shifted(layer.upper, s), layer.index) for s in shifts]
    for bounds in (lowers, uppers):
        if any(b.shape() != bounds[0].shape() for b in bounds):
            raise RangeViolation(f"bounds of the sum over {layer.index} move by more than a constant")
    return lowers, uppers


def _linear_roots(gf: GroundField, poly) -> List[Affine]:
    """Roots t = a of the factors of ``poly`` that are linear in t and the parameters."""
    roots = []
    if poly.is_ground:
        return roots
    width = len(gf.params) + 1
    for factor, _ in poly.factor_list()[1]:
        terms = dict(factor.terms())
        if any(sum(m) > 1 for m in terms):
            continue
        unit = [tuple(1 if j == i else 0 for j in range(width)) for i in range(width)]
        a = QQ(terms.get(unit[0], 0))
        if not a:
            continue
        params = tuple(-QQ(terms.get(m, 0)) / a for m in unit[1:])
        roots.append(Affine(QQ(0), params, -QQ(terms.get((0,) * width, 0)) / a))
    return roots


def _denominators(elems: Sequence[RingElem]) -> List[object]:
    return [c.denom for x in elems for c in x.terms.values()]


def _cuts(gf: GroundField, lower: Affine, upper: Affine, denominators, start: int) -> Tuple[int, int]:
    """Points to cut off at both ends so that no known pole lies in the summed range."""
    roots = [root for poly in denominators for root in _linear_roots(gf, poly)]
    first = [0]
    if lower.is_const():
        first.append(start - int(lower.const))
    for root in roots:
        offset = root.const - lower.const
        if root.shape() == lower.shape() and offset.denominator == 1 and 0 <= offset <= POLE_SEARCH:
            first.append(int(offset) + 1)
    last = [0]
    for root in roots:
        offset = root.const - upper.const
        if root.shape() == upper.shape() and offset.denominator == 1 and -MAX_SPLIT <= offset <= 1:
            last.append(2 - int(offset))
    return max(first), max(last)


def _diagonal(gf: GroundField, outer: str, offset: int) -> Affine:
    """The point outer + offset."""
    return Affine(QQ(0), tuple(QQ(1) if p == outer else QQ(0) for p in gf.params), QQ(offset))


def _diagonal_offset(layer: Layer, point: Affine) -> Optional[int]:
    """c for the point outer + c, else None."""
    if point.const.denominator != 1 or point != _diagonal(layer.ground, layer.outer, int(point.const)):
        return None
    return int(point.const)


def _value_at(system: RefinedHolonomicSystem, tower: Tower, g: LiftedElem,
              point: Affine) -> Tuple[Expr, List[Tuple[Affine, Expr]]]:
    """g(point) as its tail value and the coefficients of X(point + j)."""
    xs = []
    for j, gj in enumerate(g.xs):
        if gj:
            xs.append((point.shifted(j), symbolic_eval(tower, gj, point)))
    return symbolic_eval(tower, g.tail, point), xs


def _summand_at(layer: Layer, system: RefinedHolonomicSystem, shift: Shift, point: Affine) -> Expr:
    expr = _shifted(mul(layer.factor, system.expr), shift)
    return substitute(expr, {layer.index: affine_to_expr(layer.ground, point, BoundVar(layer.index))})


def _point_text(layer: Layer, point: Affine) -> str:
    return render(affine_to_expr(layer.ground, point, BoundVar(layer.index)))


def _flat(expr: Expr) -> List[Expr]:
    if isinstance(expr, Add):
        return [piece for term in expr.terms for piece in _flat(term)]
    if isinstance(expr, Neg):
        return [neg(piece) for piece in _flat(expr.arg)]
    return [expr]


@dataclass
class _Boundary:
    """Right-hand side of a summed telescoping relation, before it is written over the next field.

    ``xs`` collects the coefficients of X at points affine in the parameters; ``valid_from`` is
    the least value of the outer variable for which the summation identity is known to hold,
    ``singular`` lists further integer points where it may fail.
    """

    plain: List[Expr] = field(default_factory=list)
    xs: Dict[Affine, List[Expr]] = field(default_factory=dict)
    valid_from: Optional[int] = None
    singular: List[int] = field(default_factory=list)

    def take(self, value: Tuple[Expr, List[Tuple[Affine, Expr]]], weight: Expr):
        plain, xs = value
        self.plain.extend(mul(weight, piece) for piece in _flat(plain))
        for point, coef in xs:
            self.xs.setdefault(point, []).append(mul(weight, coef))

    def require(self, bound: int):
        self.valid_from = bound if self.valid_from is None else max(self.valid_from, bound)


def _summed_terms(layer: Layer, system: RefinedHolonomicSystem, ext: HolExtension, fs: Sequence[LiftedElem],
                  shifts: Sequence[Shift], found) -> Tuple[_Boundary, List[str], Tuple[int, int]]:
    """Right-hand side of sum_i c_i * (sum of F_i over its own range)."""
    gf = layer.ground
    lowers, uppers = _bounds(layer, shifts)
    lower = min(lowers, key=lambda b: b.const)
    upper = max(uppers, key=lambda b: b.const)
    g = found.certificate
    elems = [x for f in list(fs) + [g] for x in f.xs + (f.tail,)]
    denominators = _denominators(elems) + [a.denom for a in ext.coeffs if a]
    first = max(ext.start, system.valid_from)
    j1, j2 = _cuts(gf, lower, upper, denominators, first)
    while True:
        try:
            top = _value_at(system, found.tower, g, upper.shifted(1 - j2))
            break
        except PoleAtPoint:
            j2 += 1
            if j2 > MAX_SPLIT + 2:
                raise RangeViolation(f"no pole-free upper end for the sum over {layer.index}") from None
    while True:
        try:
            bottom = _value_at(system, found.tower, g, lower.shifted(j1))
            break
        except PoleAtPoint:
            j1 += 1
            if j1 > POLE_SEARCH:
                raise RangeViolation(f"no pole-free lower end for the sum over {layer.index}") from None
    if lower.shape() == upper.shape() and lower.const + j1 > upper.const - j2 + 1:
        raise RangeViolation(f"the range of {layer.index} is empty after removing poles")
    if j1 or j2:
        logging.debug("sum over %s: %d points cut below, %d above", layer.index, j1, j2)
    points = [f"G({_point_text(layer, upper.shifted(1 - j2))}) - G({_point_text(layer, lower.shifted(j1))})"]
    boundary = _Boundary()
    boundary.take(top, ONE)
    boundary.take(bottom, const(-1))
    offset = _diagonal_offset(layer, upper)
    if lower.is_const() and offset is not None:
        # every shifted range, cut or not, must reach at least one point below its start
        boundary.require(int(lower.const) + j1 + j2 + len(shifts) - 1 - offset)
    weights = [None if not c else rational_to_expr(gf, c) for c in found.constants]

    def weighted(i: int, point: Affine, sign: int):
        weight = mul(const(sign), weights[i])
        at = _diagonal_offset(layer, point)
        if at is not None:
            try:
                boundary.take(_value_at(system, found.tower, fs[i], point), weight)
                boundary.require(first - at)
                return
            except PoleAtPoint:
                pass
        boundary.plain.append(mul(weight, _summand_at(layer, system, shifts[i], point)))

    live = [i for i, w in enumerate(weights) if w is not None]
    for i in live:
        for j in range(j1):
            weighted(i, lower.shifted(j), 1)
        for j in range(j2):
            weighted(i, upper.shifted(-j), 1)
        for o in range(int(upper.const - uppers[i].const)):
            weighted(i, uppers[i].shifted(1 + o), -1)
        for o in range(int(lowers[i].const - lower.const)):
            weighted(i, lower.shifted(o), -1)
    return boundary, points, (j1, j2)


def _vanishing_factor(gf: GroundField, term: Expr) -> bool:
    """True if a sum-free factor of the product ``term`` is identically zero, e.g. Binomial[n, n + 5]."""
    while isinstance(term, Neg):
        term = term.arg
    factors = term.factors if isinstance(term, Mul) else (term,)
    for factor in factors:
        if contains(factor, Sum) or contains(factor, HarmonicSum):
            continue
        value = rational_value(gf, factor)
        if value is not None and not value:
            return True
    return False


def _represent_term(layer: Layer, tower: Tower, term: Expr) -> Tuple[Tower, Optional[RingElem]]:
    """The term as a tower element over the next field, or None for a definite term."""
    if is_const(term, 0) or _vanishing_factor(layer.ground, term):
        return tower, tower.zero()
    value = rational_value(layer.ground, term)
    if value is not None:
        return tower, tower.element(transfer(value, layer.next_ground, {layer.outer: "t"}))
    try:
        return represent(tower, term, layer.outer)
    except (NotIndefinite, UnsupportedBase) as ex:
        logging.debug("definite term %s: %s", render(term), ex)
        return tower, None


def _reduce_diagonal(layer: Layer, system: RefinedHolonomicSystem, xs: Dict[int, RingElem], tower: Tower,
                     total: RingElem, boundary: _Boundary) -> Tuple[Tower, RingElem, List[Expr]]:
    """Rewrite X(outer + m) by the recurrence of X until r consecutive shifts remain.

    ``xs`` maps m to the coefficient of X(outer + m) over the next field.  Returns the tower,
    ``total`` with the recurrence tails added and the multiples of X that are left.
    """
    ext = system.extension
    gf, next_gf = layer.ground, layer.next_ground
    rename = {layer.outer: "t"}
    outer = Param(layer.outer)
    left = []
    offsets = sorted(m for m, c in xs.items() if c)
    if not offsets:
        return tower, total, left
    for m in range(offsets[-1], offsets[0] + ext.order - 1, -1):
        c = xs.pop(m, None)
        if not c:
            continue
        base = m - ext.order
        boundary.require(ext.start - base)
        for i, a in enumerate(ext.coeffs):
            if a:
                coef = transfer(gf.shift(a, base), next_gf, rename)
                boundary.singular.extend(integer_roots(coef.denom))
                xs[base + i] = xs.get(base + i, tower.zero()) + c * coef
        if ext.tail:
            tail = symbolic_eval(ext.tower, ext.tail, _diagonal(gf, layer.outer, base))
            tower, elem = _represent_term(layer, tower, tail)
            if elem is None:
                left.append(mul(elem_expr(c, outer), tail))
            else:
                total = total + c * elem
    left.extend(mul(elem_expr(c, outer), system.at(_diagonal(gf, layer.outer, m)))
                for m, c in sorted(xs.items()) if c)
    return tower, total, left


def _classify(layer: Layer, system: RefinedHolonomicSystem, boundary: _Boundary,
              tower: Tower) -> Tuple[Tower, RingElem, List[Expr], List[Expr]]:
    """Split the right-hand side into a tower element over the next field, definite sums and leftover X terms."""
    total = tower.zero()
    definite = []
    for term in boundary.plain:
        tower, elem = _represent_term(layer, tower, term)
        if elem is None:
            definite.append(term)
        else:
            total = total + elem
    left = []
    diagonal: Dict[int, RingElem] = {}
    for point, coefs in boundary.xs.items():
        coef = add(*coefs)
        if is_const(coef, 0):
            continue
        term = mul(coef, system.at(point))
        tower, elem = _represent_term(layer, tower, term)
        if elem is not None:
            total = total + elem
            continue
        offset = _diagonal_offset(layer, point)
        if offset is None or not system.order:
            definite.append(term)
            continue
        tower, elem = _represent_term(layer, tower, coef)
        if elem is None:
            left.append(term)
        elif elem:
            diagonal[offset] = diagonal[offset] + elem if offset in diagonal else elem
    tower, total, rest = _reduce_diagonal(layer, system, diagonal, tower, total, boundary)
    return tower, total, definite, left + rest


def _window(config: RunConfig, order: int) -> range:
    return range(config.verify_start, config.verify_start + max(config.verify_length, 2 * order + 10))


def _is_zero(expr: Expr, variable: str, bindings: Mapping[str, int], points: Sequence[int]) -> bool:
    for point in points:
        try:
            if eval_exact(expr, {**bindings, variable: point}):
                return False
        except (OracleError, PoleAtPoint):
            return False
    return True


def _vanishes(tower: Tower, rhs: RingElem, rest: Expr, variable: str, ground: GroundField,
              points: Sequence[int]) -> bool:
    """True if the tower part and the expression part cancel on all ``points``."""
    bindings = default_bindings(ground)
    for point in points:
        try:
            if elem_eval(tower, rhs, point, bindings) + eval_exact(rest, {**bindings, variable: point}):
                return False
        except (OracleError, PoleAtPoint):
            return False
    return True


def _folded(term: Expr) -> Optional[Sum]:
    """A term prefactor * Sum[body, range] as Sum[prefactor * body, range], or None."""
    sign = ONE
    while isinstance(term, Neg):
        term, sign = term.arg, neg(sign)
    factors = term.factors if isinstance(term, Mul) else (term,)
    sums = [f for f in factors if isinstance(f, Sum)]
    if len(sums) != 1:
        return None
    inner = sums[0]
    rest = mul(sign, *[f for f in factors if f is not inner])
    if contains(rest, Sum) or contains(rest, HarmonicSum) or inner.index in free_names(rest):
        return None
    return Sum(inner.index, inner.lower, inner.upper, mul(rest, inner.body))


def _closed_sum(folded: Sum, variable: str, config: RunConfig, deadline: Optional[Deadline]) -> Optional[Expr]:
    """Closed form of a definite sum in ``variable``: its recurrence, solved in an R/Pi tower."""
    budget = config.time_budget
    if deadline is not None:
        deadline.check(f"the definite sum {render(folded)}")
        budget = deadline.remaining()
    inner = replace(config, strict=True, definite_depth=config.definite_depth - 1, time_budget=budget)
    try:
        recurrence, _ = find_recurrence(spec_of(folded, variable), inner)
    except ResourceLimit:
        raise
    except (RhosumError, ValueError) as ex:
        logging.debug("no recurrence for %s: %s", render(folded), ex)
        return None
    found = solve_recurrence(recurrence, partial(_initial, folded, variable), config.kernel_radius)
    if found is None:
        logging.debug("recurrence of order %d for %s has no closed form", recurrence.order, render(folded))
        return None
    return found.to_expr()


def simplify_definite_rhs(terms: Sequence[Expr], variable: str, ground: GroundField, tower: Tower,
                          coeffs: Sequence, config: RunConfig, deadline: Optional[Deadline] = None) -> Optional[Expr]:
    """A closed form of the sum of ``terms`` as a function of ``variable``, or None.

    Terms that vanish on the verification window count as zero.  Otherwise every term, a
    definite sum times a factor free of its index, gets a recurrence of its own by the same
    pipeline, which is then solved in an R/Pi tower from its initial values.  The recursion
    stops after ``config.definite_depth`` levels.
    """
    if not terms:
        return ZERO
    total = add(*terms)
    bindings = default_bindings(ground)
    window = _window(config, max(len(coeffs) - 1, 0))
    if _is_zero(total, variable, bindings, window):
        logging.debug("definite right-hand side vanishes on %s", window)
        return ZERO
    if config.definite_depth <= 0:
        return None
    closed = []
    for term in terms:
        folded = _folded(term)
        if folded is None:
            logging.debug("definite term %s is not a single sum", render(term))
            return None
        part = _closed_sum(folded, variable, config, deadline)
        if part is None:
            return None
        closed.append(part)
    found = add(*closed)
    if not _is_zero(sub(total, found), variable, bindings, window):
        logging.warning("closed form %s of a definite right-hand side fails on %s", render(found), window)
        return None
    logging.info("Definite right-hand side in %s resolved to %s", variable, render(found))
    return found


# --- relations, systems and the ladder -------------------------------------------------------------

def _exceptional_points(relation: Relation) -> List[int]:
    """Integer points where a correct relation may still fail: roots of the leading coefficient and poles."""
    points = set(relation.singular)
    points.update(integer_roots(relation.coeffs[-1].numer))
    for c in relation.coeffs:
        if c:
            points.update(integer_roots(c.denom))
    for c in relation.rhs.terms.values():
        points.update(integer_roots(c.denom))
    return sorted(points)


def _check_relation(layer: Layer, relation: Relation, config: RunConfig) -> int:
    """First point of the verification window from which the relation holds with oracle values.

    ``relation.start`` is the point from which the relation is known to hold; it may fail only
    below it or at its exceptional points.
    """
    gf = relation.ground
    bindings = default_bindings(gf)
    window = list(range(config.verify_start, config.verify_start + config.verify_length))
    definite = not is_const(relation.definite, 0)

    def residual(point: int) -> Optional[BigRat]:
        values = {**bindings, layer.outer: point}
        try:
            total = -elem_eval(relation.tower, relation.rhs, point, bindings)
            if definite:
                total -= eval_exact(relation.definite, values)
            for c, shift in zip(relation.coeffs, relation.shifts):
                if c:
                    at = {name: value + shift.get(name, 0) for name, value in values.items()}
                    total += gf.evaluate(c, point, bindings) * eval_exact(layer.expr, at)
            return total
        except (PoleAtPoint, OracleError):
            return None

    residuals = parallel_map(residual, window, config.threads)
    failing = [point for point, r in zip(window, residuals) if r is not None and r != 0]
    bound = max([relation.start - 1] + _exceptional_points(relation))
    unexplained = [point for point in failing if point > bound]
    if unexplained:
        raise VerificationFailed(f"relation for the sum over {layer.index} fails at {layer.outer} = "
                                 f"{unexplained[0]}")
    start = failing[-1] + 1 if failing else window[0]
    checked = sum(1 for point, r in zip(window, residuals) if point >= start and r is not None)
    if checked < relation.order + 3:
        raise VerificationFailed(f"relation for the sum over {layer.index} checked at {checked} points only")
    if failing:
        logging.debug("relation for the sum over %s holds from %s = %d on", layer.index, layer.outer, start)
    return start


def _relation(layer: Layer, system: RefinedHolonomicSystem, shifts: Sequence[Shift], tactic: str,
              config: RunConfig, tower: Tower, outermost: bool, deadline: Optional[Deadline] = None) -> Relation:
    """Telescope the shifted summands, sum over the range and express the result over ``tower``."""
    ext = system.extension
    fs = []
    for shift in shifts:
        ext, f = summand_normal_form(replace(system, extension=ext), layer.factor, shift)
        fs.append(f)
    found = algorithm1(ext, fs, tactic, config.kernel_radius)
    gf = layer.ground
    bindings = default_bindings(gf)
    lowest = min(int(affine_value(gf, b, 0, bindings)) for b in _bounds(layer, shifts)[0])
    first = max(lowest, ext.start)
    check_certificate(ext, fs, found.constants, found.certificate, range(first, first + CERTIFICATE_CHECKS),
                      bindings)
    boundary, points, cuts = _summed_terms(layer, system, ext, fs, shifts, found)
    next_gf = layer.next_ground
    coeffs = [transfer(c, next_gf, {layer.outer: "t"}) for c in found.constants]
    shifts = [dict(s) for s in shifts]
    while len(coeffs) > 1 and not coeffs[-1]:
        coeffs.pop()
        shifts.pop()
    tower, rhs, definite, left = _classify(layer, system, boundary, tower)
    window = _window(config, len(coeffs) - 1)
    if (definite or left) and _vanishes(tower, rhs, add(*definite, *left), layer.outer, next_gf, window):
        logging.debug("right-hand side of the relation for the sum over %s vanishes", layer.index)
        rhs, definite, left = tower.zero(), [], []
    rest, unresolved = ZERO, ()
    if definite and not left:
        resolved = simplify_definite_rhs(definite, layer.outer, next_gf, tower, coeffs, config, deadline)
        if resolved is not None:
            definite = []
            try:
                tower, elem = represent(tower, resolved, layer.outer)
                rhs = rhs + elem
            except (NotIndefinite, UnsupportedBase):
                rest = resolved
    if definite or left:
        if config.strict or not outermost:
            raise UnresolvedDefiniteSum(f"definite sum left in the relation for the sum over {layer.index}")
        rest = add(*definite, *left)
        unresolved = (render(rest),)
    valid_from = boundary.valid_from if boundary.valid_from is not None else config.verify_start
    relation = Relation(layer.outer, next_gf, shifts, coeffs, tower, rhs, rest, valid_from, tactic,
                        tuple(g.name for g in found.new_generators), tuple(points), unresolved, cuts,
                        tuple(sorted(set(boundary.singular))), tuple(found.warnings))
    relation.start = _check_relation(layer, relation, config)
    return relation


def _attempts(config: RunConfig, order: int, outermost: bool):
    """(number of shifted summands, tactic) in the order they are tried."""
    if not config.escalate:
        for d in range(1, config.d_max + 1):
            for tactic in config.ladder:
                yield d, tactic
        return
    r = max(order, 1)
    for d in range(1, config.d_max + 1):
        yield d, "rpt1"
        if 2 <= d <= r + 2:
            yield d, "rpt3"
        if outermost and order > 0 and d == order:
            yield d, "rpt4"


def _accept(layer: Layer, relation: Relation, entry: LayerReport, report: PipelineReport, d: int,
            began: float) -> Tuple[Relation, LayerReport]:
    entry.order, entry.tactic, entry.shifts = relation.order, relation.tactic, d
    entry.valid_from = relation.start
    entry.new_generators = list(relation.new_generators)
    entry.telescoping_points = list(relation.points)
    entry.unresolved = list(relation.unresolved)
    entry.seconds = time.monotonic() - began
    if any(relation.cuts):
        report.splits.append(ExceptionalSplit(layer.index, *relation.cuts))
    for message in relation.warnings:
        report.warn(f"incomplete search for the sum over {layer.index}: {message}")
    for term in relation.unresolved:
        report.warn(f"definite sum kept in the right-hand side: {term}")
    report.layers.append(entry)
    logging.info("Found a relation of order %d in %s for the sum over %s (%s, %d summands)", relation.order,
                 layer.outer, layer.index, relation.tactic, d)
    return relation, entry


def pure_relation(layer: Layer, system: RefinedHolonomicSystem, config: RunConfig, outermost: bool = False,
                  deadline: Optional[Deadline] = None,
                  report: Optional[PipelineReport] = None) -> Tuple[Relation, LayerReport]:
    """The first relation in shifts of the outer variable found along the tactic ladder.

    A relation that keeps a definite sum on its right-hand side is accepted only when the ladder
    has nothing better: it is held back while further rungs are tried.
    """
    report = report if report is not None else PipelineReport()
    entry = LayerReport(layer.index, layer.outer)
    began = time.monotonic()
    unresolved = False
    fallback: Optional[Tuple[Relation, int]] = None
    for d, tactic in _attempts(config, system.order, outermost):
        entry.attempts += 1
        shifts = [{layer.outer: i} for i in range(d)]
        try:
            if deadline is not None:
                deadline.check(f"the sum over {layer.index}")
            relation = _relation(layer, system, shifts, tactic, config, Tower(layer.next_ground), outermost,
                                 deadline)
        except ResourceLimit:
            if fallback is None:
                raise
            report.warn(f"time budget exhausted for the sum over {layer.index}; "
                        f"keeping the relation with a definite right-hand side")
            break
        except UnresolvedDefiniteSum as ex:
            unresolved = True
            logging.debug("%s with %d summands over %s: %s", tactic, d, layer.index, ex)
            continue
        except Incomplete as ex:
            report.warn(f"incomplete search for the sum over {layer.index} ({tactic}, {d} summands): {ex}")
            continue
        except (RhosumError, ValueError) as ex:
            logging.debug("%s with %d summands over %s: %s", tactic, d, layer.index, ex)
            continue
        if relation.unresolved:
            if fallback is None:
                fallback = (relation, d)
            logging.info("Relation of order %d for the sum over %s keeps a definite sum, trying further",
                         relation.order, layer.index)
            continue
        return _accept(layer, relation, entry, report, d, began)
    if fallback is not None:
        return _accept(layer, fallback[0], entry, report, fallback[1], began)
    if unresolved and config.strict:
        raise UnresolvedDefiniteSum(f"every relation for the sum over {layer.index} keeps a definite sum")
    raise NoRecurrenceWithinLimits(f"no relation for the sum over {layer.index} with at most "
                                   f"{config.d_max} shifted summands")


def _initial(expr: Expr, variable: str, point: int) -> Expr:
    return substitute(expr, {variable: const(point)})


def _extension(layer: Layer, relation: Relation) -> HolExtension:
    inverse = relation.ground.one() / relation.coeffs[-1]
    coeffs = tuple(-c * inverse for c in relation.coeffs[:-1])
    return HolExtension(relation.tower, coeffs, relation.rhs * inverse, start=relation.start,
                        initial=partial(_initial, layer.expr, layer.outer), name=f"X[{layer.index}]")


def _rule(ext: HolExtension, relation: Relation) -> LiftedElem:
    """Solve a cross relation for its first summand: X(name + 1, k) over X(name, k + j)."""
    inverse = relation.ground.one() / relation.coeffs[0]
    rule = ext.lifted(tail=relation.rhs * inverse)
    current = _unit(ext, ext.tower)
    for c in relation.coeffs[1:]:
        if c:
            rule = rule + current * (-(c * inverse))
        current = sigma_lifted(ext, current)
    return rule


def _check_cross(layer: Layer, ext: HolExtension, rule: LiftedElem, name: str, start: int):
    bindings = default_bindings(ext.ground)
    first = max(start, ext.start)
    for point in range(first, first + CROSS_CHECKS):
        values = {**bindings, layer.outer: point}
        values[name] += 1
        try:
            expected = eval_exact(layer.expr, values)
            actual = eval_lifted(ext, rule, point, bindings)
        except (PoleAtPoint, OracleError):
            continue
        if expected != actual:
            raise VerificationFailed(f"cross shift in {name} fails at {layer.outer} = {point}")


def _cross_rule(layer: Layer, system: RefinedHolonomicSystem, ext: HolExtension, name: str, tactic: str,
                config: RunConfig, deadline: Optional[Deadline]) -> Tuple[HolExtension, LiftedElem, Relation]:
    limit = config.delta_limit if config.delta_limit is not None else ext.order + 1
    tactics = list(dict.fromkeys([tactic, "rpt1", "rpt3"])) if config.escalate else list(config.ladder)
    for delta in range(limit + 1):
        shifts = [{name: 1}] + [{layer.outer: j} for j in range(delta)]
        for candidate in tactics:
            if deadline is not None:
                deadline.check(f"the cross shift in {name}")
            try:
                relation = _relation(layer, system, shifts, candidate, config, ext.tower, False)
                extended = replace(ext, tower=relation.tower)
                rule = _rule(extended, relation)
                _check_cross(layer, extended, rule, name, relation.start)
            except ResourceLimit:
                raise
            except (RhosumError, ValueError) as ex:
                logging.debug("cross shift in %s with %d shifts (%s): %s", name, delta, candidate, ex)
                continue
            return extended, rule, relation
    raise NoRecurrenceWithinLimits(f"no cross shift rule in {name} for the sum over {layer.index}")


def recursion_step(layer: Layer, system: RefinedHolonomicSystem, config: RunConfig,
                   next_outer: Optional[str] = None, deadline: Optional[Deadline] = None,
                   report: Optional[PipelineReport] = None) -> RefinedHolonomicSystem:
    """The refined holonomic system of the sum over ``layer.index`` as a sequence in ``layer.outer``.

    ``next_outer`` is the parameter the next layer shifts; a cross-shift rule is computed for it
    when the sum depends on it.
    """
    report = report if report is not None else PipelineReport()
    relation, entry = pure_relation(layer, system, config, False, deadline, report)
    began = time.monotonic()
    ext = _extension(layer, relation)
    if config.reduce_inner:
        try:
            ext = reduce_fully(ext, kernel_radius=config.kernel_radius)
        except ResourceLimit:
            raise
        except RhosumError as ex:
            report.warn(f"order reduction skipped for the sum over {layer.index}: {ex}")
    entry.order = ext.order
    cross = {}
    if next_outer is not None and next_outer in free_names(layer.expr) and ext.order > 0:
        ext, rule, cross_relation = _cross_rule(layer, system, ext, next_outer, relation.tactic, config, deadline)
        cross[next_outer] = rule
        entry.cross_rules.append(f"{next_outer} + 1 from {len(cross_relation.shifts)} summands "
                                 f"({cross_relation.tactic})")
    entry.seconds += time.monotonic() - began
    log_tower(ext.tower)
    result = RefinedHolonomicSystem(layer.outer, layer.expr, ext, cross, ext.start, relation.tactic)
    logging.debug("system for the sum over %s: %s", layer.index, result.describe())
    return result


def _recurrence(layer: Layer, relation: Relation) -> Recurrence:
    gf = relation.ground
    coeffs, rhs, rest = relation.coeffs, relation.rhs, relation.definite
    if len(coeffs) == 1:
        # closed form R: S(n + 1) - S(n) = R(n + 1) - R(n)
        inverse = gf.one() / coeffs[0]
        closed = rhs * inverse
        rhs = sigma(relation.tower, closed) - closed
        if not is_const(rest, 0):
            part = mul(rational_to_expr(gf, inverse, Param(layer.outer)), rest)
            rest = sub(shift_param(part, layer.outer, 1), part)
        coeffs = [-gf.one(), gf.one()]
    return normalized_recurrence(layer.outer, gf, coeffs, rhs, rest, relation.start)


# --- exceptional points -------------------------------------------------------------------------

"""Ways to compensate the points cut off a summation range."""
SPLIT_STRATEGIES = ("boundary", "distribute")


def exceptional_split(expr: Sum, j1: int, j2: int, strategy: str = "distribute") -> List[Expr]:
    """Rewrite a sum so that its main part runs over lower + j1 .. upper - j2.

    ``boundary`` returns the core sum followed by the sums over the cut points; ``distribute``
    returns one sum over the core range whose summand carries an equal share of the cut points.
    The parts always add up to the original sum.
    """
    if strategy not in SPLIT_STRATEGIES:
        raise ValueError(f"unknown split strategy {strategy!r}")
    if j1 < 0 or j2 < 0:
        raise ValueError("cut sizes must not be negative")
    if not j1 and not j2:
        return [expr]
    lower, upper = add(expr.lower, const(j1)), add(expr.upper, const(-j2))
    length = add(sub(upper, lower), const(1))
    form = linear_form(length)
    if form is not None and set(form) <= {CONSTANT} and form.get(CONSTANT, QQ(0)) <= 0:
        raise EmptyCore(f"no points left between {render(lower)} and {render(upper)}")
    boundary = []
    if j1:
        boundary.append(Sum(expr.index, expr.lower, add(expr.lower, const(j1 - 1)), expr.body))
    if j2:
        boundary.append(Sum(expr.index, add(upper, const(1)), expr.upper, expr.body))
    if strategy == "boundary":
        return [Sum(expr.index, lower, upper, expr.body)] + boundary
    return [Sum(expr.index, lower, upper, add(expr.body, div(add(*boundary), length)))]


# --- top level ----------------------------------------------------------------------------------

@dataclass
class Certificate:
    """c_1, ..., c_d and G with G(index + 1) - G(index) = c_1 F(outer) + ... + c_d F(outer + d - 1)."""

    outer: str
    index: str
    tactic: str
    constants: List[Expr]
    certificate: Expr
    new_generators: List[str]
    checked: int

    def lines(self) -> List[str]:
        return certificate_lines([render(c) for c in self.constants], render(self.certificate),
                                 self.new_generators)


def _inner_system(layers: Sequence[Layer], config: RunConfig, deadline: Deadline,
                  report: PipelineReport) -> RefinedHolonomicSystem:
    """The refined holonomic system of everything inside the outermost sum."""
    system = base_system(layers[0].ground, layers[0].index)
    for u, layer in enumerate(layers[:-1]):
        system = recursion_step(layer, system, config, layers[u + 1].outer, deadline, report)
    return system


def _lifted_expr(system: RefinedHolonomicSystem, g: LiftedElem) -> Expr:
    """g as an expression in the summation index, x_j read as X(index + j)."""
    x = BoundVar(system.index)
    terms = [elem_expr(g.tail, x)]
    for j, gj in enumerate(g.xs):
        if gj:
            point = Affine(QQ(1), tuple(QQ(0) for _ in system.ground.params), QQ(j))
            terms.append(mul(elem_expr(gj, x), system.at(point)))
    return add(*terms)


def _generator_text(gen, index: str) -> str:
    if gen.description is not None:
        return f"{gen.name}({index}) = {render(gen_expr(gen, BoundVar(index)))}"
    return f"{gen.name}({index}+1) - {gen.name}({index}) = {dump_elem(gen.increment)}"


def telescope(spec: SumSpec, d: int, tactic: str = "rpt1", config: Optional[RunConfig] = None) -> Certificate:
    """Parameterized telescoping for the summands F(outer + i, index), i < d, of the outermost sum."""
    if d < 1:
        raise ValueError(f"at least one summand is needed, got {d}")
    config = config or RunConfig()
    deadline = Deadline(config.time_budget)
    layers = layers_of(spec)
    system = _inner_system(layers, config, deadline, PipelineReport())
    layer = layers[-1]
    ext = system.extension
    fs = []
    for i in range(d):
        ext, f = summand_normal_form(replace(system, extension=ext), layer.factor, {layer.outer: i})
        fs.append(f)
    found = algorithm1(ext, fs, tactic, config.kernel_radius)
    gf = layer.ground
    bindings = default_bindings(gf)
    first = max(int(affine_value(gf, affine(gf, layer.lower, layer.index), 0, bindings)), ext.start)
    checked = check_certificate(ext, fs, found.constants, found.certificate,
                                range(first, first + CERTIFICATE_CHECKS), bindings)
    if not checked:
        raise VerificationFailed(f"certificate for the sum over {layer.index} could not be checked at any point")
    constants = [rational_to_expr(gf, c, BoundVar(layer.index)) for c in found.constants]
    certificate = _lifted_expr(system, found.certificate)
    logging.info("Telescoping with %s and %d summands over %s checked at %d points", tactic, d, layer.index,
                 checked)
    return Certificate(layer.outer, layer.index, tactic, constants, certificate,
                       [_generator_text(g, layer.index) for g in found.new_generators], checked)


def find_recurrence(spec: SumSpec, config: Optional[RunConfig] = None) -> Tuple[Recurrence, PipelineReport]:
    """A verified recurrence in the distinguished parameter for the nested sum ``spec``."""
    config = config or RunConfig()
    report = PipelineReport()
    deadline = Deadline(config.time_budget)
    layers = layers_of(spec)
    logging.info("Finding a recurrence in %s for %s", spec.distinguished, render(spec.expr))
    system = _inner_system(layers, config, deadline, report)
    relation, entry = pure_relation(layers[-1], system, config, True, deadline, report)
    recurrence = _recurrence(layers[-1], relation)
    entry.order = recurrence.order
    config.check_window(recurrence.order)
    verification = verify_recurrence(spec, recurrence, config)
    if not verification.ok:
        raise VerificationFailed(f"recurrence fails at {spec.distinguished} = "
                                 f"{', '.join(str(p) for p in verification.failures)}")
    report.seconds = deadline.elapsed
    logging.info("Recurrence of order %d found in %.2f s", recurrence.order, report.seconds)
    return recurrence, report
