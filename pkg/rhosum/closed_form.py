# -*- coding: utf-8 -*-
"""Closed forms of sequences given by a recurrence and their initial values.

A solution x of

    c_0(n) x(n) + ... + c_r(n) x(n + r) = rhs(n)

is searched in an R/Pi tower over the recurrence's ground field: the tower of the right-hand
side, optionally extended by one geometric term b^n.  Parameterized telescoping gives a particular
solution and a basis of the homogeneous solutions in that tower; their combination is fixed by
matching the initial values exactly over K.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from sympy import QQ

from rhosum.diff_ring import RingElem, Tower, elem_eval, has_sigma, represent, represent_hyper, symbolic_eval
from rhosum.diff_ring import to_expr as elem_expr
from rhosum.errors import Incomplete, PoleAtPoint, RhosumError
from rhosum.exact_arith import BigRat, GroundField
from rhosum.hol_core import Recurrence, rational_value
from rhosum.hyperterm import Affine, make
from rhosum.prs_solver import KERNEL_RADIUS, prs_solve
from rhosum.sum_expr import Expr, Param

"""Geometric terms b^n tried as homogeneous solutions not visible in the right-hand side."""
BASES = (QQ(2), QQ(-1), QQ(3), QQ(-2), QQ(4), QQ(-3), QQ(-4), QQ(1, 2), QQ(1, 3))
"""Initial values matched beyond the number of unknowns."""
EXTRA_POINTS = 10
"""Points tried for initial values before giving up."""
POINT_SEARCH = 200


@dataclass(frozen=True)
class ClosedForm:
    """A tower element whose ground variable stands for ``variable``."""

    variable: str
    tower: Tower
    elem: RingElem

    def value(self, n: int, bindings=None) -> BigRat:
        return elem_eval(self.tower, self.elem, n, bindings or {})

    def to_expr(self) -> Expr:
        return elem_expr(self.elem, Param(self.variable))


def _const_point(gf: GroundField, n: int) -> Affine:
    return Affine(QQ(0), (QQ(0),) * len(gf.params), QQ(n))


def _towers(tower: Tower) -> List[Tower]:
    gf = tower.field
    zeros = (QQ(0),) * len(gf.params)
    towers = [tower]
    for base in BASES:
        try:
            extended, _ = represent_hyper(tower, make(gf, gf.one(), {}, {base: Affine(QQ(1), zeros, QQ(0))}))
        except RhosumError as ex:
            logging.debug("no tower with %s^n: %s", base, ex)
            continue
        if all(extended.names() != t.names() for t in towers):
            towers.append(extended)
    return towers


def _values(gf: GroundField, tower: Tower, elems: Sequence[RingElem], initial: Callable[[int], Expr], start: int,
            count: int) -> List[Tuple[List, object]]:
    """(values of ``elems``, initial value) in K at the first ``count`` points where all are defined."""
    rows = []
    point = start
    while len(rows) < count and point < start + POINT_SEARCH:
        at = _const_point(gf, point)
        point += 1
        try:
            row = [rational_value(gf, symbolic_eval(tower, x, at)) for x in elems]
            target = rational_value(gf, initial(point - 1))
        except (PoleAtPoint, RhosumError) as ex:
            logging.debug("no initial value at %d: %s", point - 1, ex)
            continue
        if target is None or any(v is None for v in row):
            continue
        rows.append(([gf.to_const(v) for v in row], gf.to_const(target)))
    return rows


def _match(gf: GroundField, tower: Tower, particular: RingElem, homogeneous: Sequence[RingElem],
           initial: Callable[[int], Expr], start: int, order: int) -> Optional[RingElem]:
    count = len(homogeneous) + 2 * order + EXTRA_POINTS
    rows = _values(gf, tower, [particular] + list(homogeneous), initial, start, count)
    if len(rows) < count:
        logging.debug("only %d of %d initial values available", len(rows), count)
        return None
    lambdas = gf.solve([row[1:] for row, _ in rows], [target - row[0] for row, target in rows])
    if lambdas is None:
        return None
    result = particular
    for lam, h in zip(lambdas, homogeneous):
        if lam:
            result = result + h * gf.from_const(lam)
    return result


def solve_recurrence(recurrence: Recurrence, initial: Callable[[int], Expr],
                     kernel_radius: int = KERNEL_RADIUS) -> Optional[ClosedForm]:
    """The closed form of the sequence with these initial values, or None if none is found.

    ``initial(n)`` is the sequence at the integer n as an expression in the parameters.
    """
    gf = recurrence.ground
    n = recurrence.variable
    try:
        tower, rhs = represent(Tower(gf), recurrence.rhs, n)
    except RhosumError as ex:
        logging.debug("right-hand side not in a tower: %s", ex)
        return None
    if has_sigma(rhs):
        logging.debug("right-hand side contains sums")
        return None
    for candidate in _towers(tower):
        try:
            solutions = prs_solve(candidate, recurrence.coeffs, [rhs], kernel_radius)
        except (Incomplete, ValueError) as ex:
            logging.debug("no solutions in %r: %s", candidate, ex)
            continue
        particular = next(((c, g) for c, g in solutions if c[0]), None)
        if particular is None:
            continue
        c, g = particular
        homogeneous = [h for d, h in solutions if not d[0] and h]
        found = _match(gf, candidate, g * (gf.one() / c[0]), homogeneous, initial, recurrence.start,
                       recurrence.order)
        if found is not None:
            logging.debug("closed form in %r with %d homogeneous solutions", candidate, len(homogeneous))
            return ClosedForm(n, candidate, found)
    return None
