# -*- coding: utf-8 -*-
"""Parameterized linear difference equations over the R/Pi part of a tower.

Given a_0..a_m in K(t) and right-hand sides f_1..f_d free of Sigma generators, find a basis of
all (c_1..c_d, g) with c_j in K and g in the R/Pi Laurent ring such that

    a_0 g + a_1 sigma(g) + ... + a_m sigma^m(g) = c_1 f_1 + ... + c_d f_d.

The ansatz splits g into its Pi monomial components.  Each component is a rational
equation; its denominator comes from Abramov's universal denominator and its numerator
degree from the indicial polynomial at infinity.  All components share one linear system
over K so the constants c stay common.
"""
import itertools
import logging
from functools import reduce
from typing import Dict, List, Sequence, Tuple

from sympy import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from rhosum.diff_ring import ROOT, SIGMA, Monomial, RingElem, Tower, pi_components, pi_ratio
from rhosum.exact_arith import GroundField, dispersion, integer_roots, poly_gcd, poly_shift, t_coefficients, t_degree
from rhosum.errors import Incomplete

"""Homogeneous components are searched among Pi monomials with exponents up to this radius."""
KERNEL_RADIUS = 3
"""Powers alpha^m, 0 < m <= this bound, of a new Pi ratio alpha are tested for dependence."""
PI_POWER_BOUND = 3
"""At most this many homogeneous candidate monomials are tried."""
MAX_CANDIDATES = 400
"""Degree bounds above this are not trusted to finish."""
MAX_DEGREE = 200

Solution = Tuple[List[object], RingElem]


def _as_poly(f):
    """A ground field element known to be a polynomial, as a ring element."""
    if f.denom.is_ground:
        return f.numer.quo_ground(f.denom.LC)
    raise ValueError(f"{f.as_expr()} is not a polynomial")


def _binomial(i: int, k: int) -> int:
    result = 1
    for j in range(k):
        result = result * (i - j) // (j + 1)
    return result


def universal_denominator(polys: Sequence) -> object:
    """Abramov's denominator bound for  sum polys[i] * sigma^i(w) = (polynomial).

    Every rational solution w has a denominator dividing the result.
    """
    m = len(polys) - 1
    a = poly_shift(polys[m], -m)
    b = polys[0]
    u = a.ring.one
    top = dispersion(a, b)
    for i in range(top, -1, -1):
        d = poly_gcd(a, poly_shift(b, i))
        if t_degree(d) <= 0:
            continue
        a = a.exquo(d)
        b = b.exquo(poly_shift(d, -i))
        for j in range(i + 1):
            u *= poly_shift(d, -j)
    return u


def degree_bound(gf: GroundField, polys: Sequence, rhs_degree: int) -> int:
    """Degree bound for polynomial solutions y of  sum polys[i] * sigma^i(y) = rhs; -1 if only y = 0."""
    m = len(polys) - 1
    delta = []
    for k in range(m + 1):
        delta.append(reduce(lambda acc, i: acc + polys[i] * _binomial(i, k), range(k, m + 1), gf.ring.zero))
    b = max(t_degree(r) - k for k, r in enumerate(delta) if r)
    ring = PolyRing(("N__",) + gf.params, QQ, grlex)
    n = ring.gens[0]
    indicial = ring.zero
    for k, r in enumerate(delta):
        if r and t_degree(r) - k == b:
            lead = ring.from_dict(dict(t_coefficients(r)[t_degree(r)].iterterms()))
            falling = reduce(lambda acc, j: acc * (n - j), range(k), ring.one)
            indicial += lead * falling
    candidates = [root for root in integer_roots(indicial) if root >= 0]
    if rhs_degree >= 0:
        candidates.append(rhs_degree - b)
    return max(candidates, default=-1)


def _candidates(tower: Tower, radius: int) -> List[Monomial]:
    gens = tower.pi_gens
    requested = radius
    while True:
        ranges = [range(0, g.order) if g.kind == ROOT else range(-radius, radius + 1) for g in gens]
        count = 1
        for r in ranges:
            count *= len(r)
        if count <= MAX_CANDIDATES or radius <= 1:
            break
        radius -= 1
    if radius < requested:
        logging.warning("kernel search radius lowered from %d to %d for %d generators", requested, radius,
                        len(gens))
    monomials = []
    for exps in itertools.product(*ranges):
        monomials.append(tuple(sorted((g.name, e) for g, e in zip(gens, exps) if e)))
    return monomials


class _Component:
    """The rational equation for one Pi monomial T: sum A_i sigma^i(w) = sum c_j b_j."""

    def __init__(self, gf: GroundField, tower: Tower, mono: Monomial, coeffs: Sequence, rhs: Sequence):
        self.mono = mono
        rho = pi_ratio(tower, mono)
        folded = []
        factor = gf.one()
        for i, a in enumerate(coeffs):
            folded.append(a * factor)
            factor = factor * gf.shift(rho, i)
        fracs = [f for f in list(folded) + list(rhs) if f]
        common = reduce(lambda acc, f: acc.lcm(f.denom), fracs, gf.ring.one)
        polys = [_as_poly(a * gf.from_poly(common)) for a in folded]
        self.denominator = universal_denominator(polys)
        shifted = [poly_shift(self.denominator, i) for i in range(len(polys))]
        common2 = reduce(lambda acc, p: acc.lcm(p), shifted, gf.ring.one)
        self.polys = [p * common2.exquo(s) for p, s in zip(polys, shifted)]
        self.rhs = [_as_poly(f * gf.from_poly(common * common2)) if f else gf.ring.zero for f in rhs]
        rhs_degree = max((t_degree(p) for p in self.rhs if p), default=-1)
        self.degree = degree_bound(gf, self.polys, rhs_degree)
        if self.degree > MAX_DEGREE:
            raise Incomplete(f"degree bound {self.degree} for component {mono}")

    def columns(self, gf: GroundField) -> List[Dict[int, object]]:
        """t-coefficients of the operator applied to t^k, k = 0..degree."""
        t = gf.ring.gens[0]
        cols = []
        for k in range(self.degree + 1):
            image = gf.ring.zero
            for i, p in enumerate(self.polys):
                image += p * (t + i) ** k
            cols.append(t_coefficients(image) if image else {})
        return cols


def prs_solve(tower: Tower, coeffs: Sequence, rhs: Sequence[RingElem],
              kernel_radius: int = KERNEL_RADIUS) -> List[Solution]:
    """Basis of the solutions (c, g); see the module docstring."""
    gf = tower.field
    coeffs = [gf.field(a) if not hasattr(a, "numer") else a for a in coeffs]
    if not coeffs[0] or not coeffs[-1]:
        raise ValueError("first and last coefficient must be nonzero")
    parts = []
    for f in rhs:
        if not isinstance(f, RingElem):
            parts.append({(): gf.field(f)} if f else {})
            continue
        tower = _larger(tower, f.tower)
        if any(f.tower.gen(n).kind == SIGMA for n in f.names()):
            raise ValueError("right-hand sides must be free of sum generators")
        parts.append({mono: value.rational() for mono, value in pi_components(f).items()})
    monomials = set(_candidates(tower, kernel_radius))
    for part in parts:
        monomials.update(part)
    components = []
    for mono in sorted(monomials):
        values = [part.get(mono, gf.zero()) for part in parts]
        component = _Component(gf, tower, mono, coeffs, values)
        if component.degree >= 0 or any(values):
            components.append(component)
    dim = len(rhs)
    ncols = dim + sum(c.degree + 1 for c in components)
    rows = []
    offset = dim
    for component in components:
        columns = component.columns(gf)
        degrees = set()
        for col in columns:
            degrees.update(col)
        rhs_coeffs = [t_coefficients(p) if p else {} for p in component.rhs]
        for part in rhs_coeffs:
            degrees.update(part)
        for e in sorted(degrees):
            row = [gf.const_ring_domain.zero] * ncols
            for j, part in enumerate(rhs_coeffs):
                if e in part:
                    row[j] = -gf.const_from_poly(part[e])
            for k, col in enumerate(columns):
                if e in col:
                    row[offset + k] = gf.const_from_poly(col[e])
            rows.append(row)
        offset += component.degree + 1
    basis = gf.nullspace(rows, ncols)
    logging.debug("prs: order %d, %d right-hand sides, %d components, %d unknowns, solution dimension %d",
                  len(coeffs) - 1, dim, len(components), ncols, len(basis))
    return [_solution(gf, tower, components, dim, vector) for vector in basis]


def _larger(a: Tower, b: Tower) -> Tower:
    return a if len(a.gens) >= len(b.gens) else b


def _solution(gf: GroundField, tower: Tower, components, dim: int, vector) -> Solution:
    constants = [gf.from_const(v) for v in vector[:dim]]
    g = tower.zero()
    offset = dim
    t = gf.t
    for component in components:
        numerator = gf.zero()
        for k in range(component.degree + 1):
            value = vector[offset + k]
            if value:
                numerator += gf.from_const(value) * t ** k
        offset += component.degree + 1
        if numerator:
            g = g + RingElem(tower, {component.mono: numerator / gf.from_poly(component.denominator)})
    return constants, g
