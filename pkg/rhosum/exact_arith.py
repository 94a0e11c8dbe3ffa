# -*- coding: utf-8 -*-
"""Exact arithmetic over the constant field K = QQ(params) and the ground field K(t).

Ground field elements are sympy ``FracElement`` objects of QQ(t, *params), t first,
graded lexicographic order.  Constants are the t-free elements of that field.

Polynomials in t over K are handled as ``PolyElement`` objects of QQ[t, *params] kept
primitive with respect to t and with positive leading coefficient.  By Gauss' lemma this
is K[t] up to units, and all gcd/resultant computations stay fraction free.
"""
import logging
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ, Symbol
from sympy.polys.fields import FracField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from rhosum.errors import PoleAtPoint

"""Exact rational numbers; all values handed out by the oracle are of this type."""
BigRat = type(QQ(0))
"""Name of the auxiliary shift variable of dispersion resultants."""
SHIFT_VAR = "j__"
"""Name of the ground variable."""
GROUND_VAR = "t"

_UNI_RING = PolyRing("x__", QQ, grlex)


def rat(value, denominator: int = 1) -> BigRat:
    """Convert an int, a BigRat or a pair to a BigRat."""
    if denominator == 1:
        return QQ(value)
    return QQ(value) / QQ(denominator)


class GroundField:
    """The rational difference field K(t) with sigma(t) = t + 1 and K = QQ(params)."""

    def __init__(self, params: Sequence[str] = ()):
        self.params = tuple(params)
        self.field = FracField((GROUND_VAR,) + self.params, QQ, grlex)
        self.ring = self.field.ring
        self.t = self.field.gens[0]
        self._tpoly = self.ring.gens[0]
        if self.params:
            self.const_ring = PolyRing(self.params, QQ, grlex)
            self.const_field = FracField(self.params, QQ, grlex)
            self.const_domain = self.const_field.to_domain()
            self.const_ring_domain = self.const_ring.to_domain()
        else:
            self.const_ring = None
            self.const_field = None
            self.const_domain = QQ
            self.const_ring_domain = QQ

    def __repr__(self):
        return f"GroundField({', '.join(self.params)})"

    def __eq__(self, other):
        return isinstance(other, GroundField) and other.params == self.params

    def __hash__(self):
        return hash(("GroundField", self.params))

    # --- construction -------------------------------------------------------

    def const(self, value):
        """Embed an int or BigRat."""
        return self.field(QQ(value))

    def param(self, name: str):
        """The generator of the named parameter."""
        return self.field.gens[1 + self.params.index(name)]

    def zero(self):
        return self.field.zero

    def one(self):
        return self.field.one

    def from_poly(self, poly):
        """Embed a polynomial of ``self.ring``."""
        return self.field.new(poly)

    # --- structure ----------------------------------------------------------

    def is_const(self, f) -> bool:
        """True iff ``f`` does not depend on t."""
        return t_degree(f.numer) <= 0 and t_degree(f.denom) <= 0

    def shift(self, f, j: int):
        """sigma^j of a ground field element: substitute t -> t + j."""
        if j == 0 or self.is_const(f):
            return f
        # integer shifts keep numerator and denominator coprime
        return f.raw_new(poly_shift(f.numer, j), poly_shift(f.denom, j))

    def monic_parts(self, f) -> Tuple[object, object]:
        """Numerator and denominator of ``f`` with the denominator monic in t."""
        lead = self.from_poly(t_coefficients(f.denom)[t_degree(f.denom)])
        return self.from_poly(f.numer) / lead, self.from_poly(f.denom) / lead

    # --- constants ------------------------------------------------------------

    def to_const(self, f):
        """Convert a t-free ground field element to an element of ``const_domain``."""
        if not self.params:
            return QQ(f.numer.LC) / QQ(f.denom.LC)
        numer = self.const_ring.from_dict({m[1:]: c for m, c in f.numer.iterterms()})
        denom = self.const_ring.from_dict({m[1:]: c for m, c in f.denom.iterterms()})
        return self.const_field.new(numer, denom)

    def const_from_poly(self, poly):
        """Convert a t-free polynomial of ``self.ring`` to ``const_ring_domain``."""
        if not self.params:
            return QQ(poly.LC) if poly else QQ(0)
        return self.const_ring.from_dict({m[1:]: c for m, c in poly.iterterms()})

    def from_const(self, c):
        """Inverse of :meth:`to_const`."""
        if not self.params:
            return self.field(QQ(c))
        if not hasattr(c, "denom"):
            # element of the polynomial ring domain
            return self.field.new(self.ring.from_dict({(0,) + m: v for m, v in c.iterterms()}))
        numer = self.ring.from_dict({(0,) + m: v for m, v in c.numer.iterterms()})
        denom = self.ring.from_dict({(0,) + m: v for m, v in c.denom.iterterms()})
        return self.field.new(numer, denom)

    # --- evaluation -----------------------------------------------------------

    def values(self, point, bindings: Mapping[str, int]) -> Tuple[BigRat, ...]:
        return (QQ(point),) + tuple(QQ(bindings[p]) for p in self.params)

    def evaluate(self, f, point, bindings: Mapping[str, int]) -> BigRat:
        """Value of ``f`` at t = point with the parameters bound."""
        values = self.values(point, bindings)
        denominator = eval_poly(f.denom, values)
        if denominator == 0:
            raise PoleAtPoint(f"{f.as_expr()} has a pole at t={point}", point)
        return eval_poly(f.numer, values) / denominator

    def leading_term_at(self, f, point, bindings: Mapping[str, int]) -> Tuple[BigRat, int]:
        """Leading Laurent term (coefficient, order) of f(point + eps) as eps -> 0."""
        num_coeff, num_order = _taylor_lead(f.numer, self.values(point, bindings))
        den_coeff, den_order = _taylor_lead(f.denom, self.values(point, bindings))
        return num_coeff / den_coeff, num_order - den_order

    def specialize(self, f, bindings: Mapping[str, int]):
        """Substitute the bound parameters, keep t symbolic."""
        pairs = [(self.param(p), QQ(v)) for p, v in bindings.items() if p in self.params]
        if not pairs:
            return f
        return f.subs(pairs)

    # --- linear algebra over K ---------------------------------------------------

    def nullspace(self, rows: List[List], ncols: int) -> List[List]:
        """Basis of the right kernel of a matrix with entries in ``const_ring_domain``.

        The basis is returned in reduced row echelon form over ``const_domain``.
        """
        if ncols == 0:
            return []
        rows = [row for row in rows if any(row)]
        if not rows:
            basis = [[self.const_domain.one if i == j else self.const_domain.zero for j in range(ncols)]
                     for i in range(ncols)]
            return basis
        matrix = DomainMatrix(rows, (len(rows), ncols), self.const_ring_domain).convert_to(self.const_domain)
        kernel = matrix.nullspace()
        if kernel.shape[0] == 0:
            return []
        return self.rref(kernel.to_list())

    def rref(self, vectors: List[List]) -> List[List]:
        """Reduced row echelon form of a list of vectors over ``const_domain``, zero rows dropped."""
        if not vectors:
            return []
        ncols = len(vectors[0])
        matrix = DomainMatrix([[self.const_domain.convert(v) for v in row] for row in vectors],
                              (len(vectors), ncols), self.const_domain)
        reduced, pivots = matrix.rref()
        result = reduced.to_list()[:len(pivots)]
        logging.debug("rref: %d vectors, rank %d", len(vectors), len(pivots))
        return result

    def solve(self, rows: List[List], rhs: List) -> Optional[List]:
        """One solution x of rows * x = rhs over ``const_domain``, free unknowns set to 0; None if inconsistent."""
        ncols = len(rows[0]) if rows else 0
        if ncols == 0:
            return [] if not any(rhs) else None
        augmented = [[self.const_domain.convert(v) for v in row] + [self.const_domain.convert(b)]
                     for row, b in zip(rows, rhs)]
        matrix = DomainMatrix(augmented, (len(augmented), ncols + 1), self.const_domain)
        reduced, pivots = matrix.rref()
        if ncols in pivots:
            return None
        solution = [self.const_domain.zero] * ncols
        for row, pivot in zip(reduced.to_list(), pivots):
            solution[pivot] = row[-1] / row[pivot]
        return solution


@lru_cache(maxsize=None)
def ground_field(params: Tuple[str, ...] = ()) -> GroundField:
    """Shared ground field instance per parameter tuple."""
    return GroundField(params)


# --- polynomials in t ---------------------------------------------------------------

def t_degree(poly) -> int:
    """Degree in the first generator; -1 for the zero polynomial."""
    if not poly:
        return -1
    return max(monom[0] for monom in poly.itermonoms())


def t_coefficients(poly) -> Dict[int, object]:
    """Split a polynomial of QQ[t, params] into its t-free coefficients by t-degree."""
    ring = poly.ring
    parts: Dict[int, dict] = {}
    for monom, coeff in poly.iterterms():
        parts.setdefault(monom[0], {})[(0,) + monom[1:]] = coeff
    return {deg: ring.from_dict(terms) for deg, terms in parts.items()}


def poly_shift(poly, j: int):
    """Substitute t -> t + j in a polynomial of QQ[t, params]."""
    if j == 0 or t_degree(poly) <= 0:
        return poly
    t = poly.ring.gens[0]
    return poly.compose(t, t + j)


def primitive(poly):
    """Primitive part with respect to t, with positive leading coefficient."""
    if not poly:
        return poly
    content = None
    for coeff in t_coefficients(poly).values():
        content = coeff if content is None else content.gcd(coeff)
        if content.is_ground:
            break
    prim = poly.exquo(content) if not content.is_ground else poly.quo_ground(content.LC)
    if prim.LC < 0:
        prim = -prim
    return prim


def poly_gcd(p, q):
    """Gcd in K[t], returned primitive over QQ[t, params]; gcd(p, 0) is the primitive part of p."""
    if not p:
        return primitive(q)
    if not q:
        return primitive(p)
    return primitive(primitive(p).gcd(primitive(q)))


def poly_lcm(p, q):
    """Lcm in K[t], primitive."""
    g = poly_gcd(p, q)
    return primitive(primitive(p).exquo(g) * primitive(q))


def eval_poly(poly, values: Sequence[BigRat]) -> BigRat:
    """Evaluate a polynomial of QQ[t, params] at a full point."""
    total = QQ(0)
    for monom, coeff in poly.iterterms():
        term = QQ(coeff)
        for value, exp in zip(values, monom):
            if exp:
                term *= value ** exp
        total += term
    return total


def _taylor_lead(poly, values: Sequence[BigRat]) -> Tuple[BigRat, int]:
    """Leading coefficient and order of poly(t0 + eps, params) as a series in eps."""
    x = _UNI_RING.gens[0]
    # collapse the parameters, keep t
    uni: Dict[int, BigRat] = {}
    for monom, coeff in poly.iterterms():
        term = QQ(coeff)
        for value, exp in zip(values[1:], monom[1:]):
            if exp:
                term *= value ** exp
        uni[monom[0]] = uni.get(monom[0], QQ(0)) + term
    series = _UNI_RING.from_dict({(e,): c for e, c in uni.items() if c})
    if not series:
        raise PoleAtPoint("vanishing polynomial in a leading-term computation", values[0])
    series = series.compose(x, x + values[0])
    order = min(monom[0] for monom in series.itermonoms())
    return QQ(series.coeff(x ** order)), order


# --- resultants and dispersion ----------------------------------------------------------

def resultant(p, q):
    """Resultant with respect to t of two polynomials of QQ[t, params].

    The result is t-free; it vanishes exactly when p and q share a root over the
    algebraic closure of K.  ``resultant(p, 1) == 1``.
    """
    if t_degree(p) <= 0 or t_degree(q) <= 0:
        # res(p, c) = c^deg p
        if t_degree(p) <= 0 and t_degree(q) <= 0:
            return p.ring.one
        const, other = (q, p) if t_degree(q) <= 0 else (p, q)
        return const ** t_degree(other)
    value = p.resultant(q)
    if hasattr(value, "ring"):
        return value.set_ring(p.ring) if value.ring != p.ring else value
    return p.ring.ground_new(value)


def shift_resultant(p, q):
    """Resultant res_t(p(t), q(t + j)) as a polynomial of QQ[j, params]."""
    ring = p.ring
    symbols = tuple(str(s) for s in ring.symbols)
    aux = PolyRing((symbols[0], SHIFT_VAR) + symbols[1:], QQ, grlex)
    t, j = aux.gens[0], aux.gens[1]
    shifted = q.set_ring(aux).compose(t, t + j)
    value = p.set_ring(aux).resultant(shifted)
    if not hasattr(value, "ring"):
        return PolyRing((SHIFT_VAR,) + symbols[1:], QQ, grlex).ground_new(value)
    return value


def integer_roots(poly) -> List[int]:
    """Integer roots of a polynomial in its first generator that hold for all parameter values."""
    by_params: Dict[tuple, dict] = {}
    for monom, coeff in poly.iterterms():
        by_params.setdefault(monom[1:], {})[(monom[0],)] = coeff
    common = None
    for terms in by_params.values():
        uni = _UNI_RING.from_dict(terms)
        common = uni if common is None else common.gcd(uni)
    if common is None:
        # the zero polynomial: every integer is a root
        raise ValueError("integer_roots of the zero polynomial")
    roots = set()
    if common.degree() > 0:
        _, factors = common.factor_list()
        for factor, _ in factors:
            if factor.degree() == 1:
                terms = dict(factor.terms())
                root = -QQ(terms.get((0,), 0)) / QQ(terms[(1,)])
                if root.denominator == 1:
                    roots.add(int(root.numerator))
    return sorted(roots)


def dispersion(p, q) -> int:
    """Largest j >= 0 with deg gcd(p(t), q(t + j)) > 0, or -1 if there is none."""
    if t_degree(p) <= 0 or t_degree(q) <= 0:
        return -1
    candidates = [j for j in integer_roots(shift_resultant(primitive(p), primitive(q))) if j >= 0]
    for j in sorted(candidates, reverse=True):
        if t_degree(poly_gcd(p, poly_shift(q, j))) > 0:
            return j
    return -1


def transfer(f, target: GroundField, rename: Mapping[str, str] = None):
    """Move a ground field element into another ground field, renaming variables on the way.

    ``rename`` maps old variable names (``"t"`` included) to new ones; all renames are applied
    simultaneously, so t and a parameter can trade places.
    """
    expr = f.as_expr()
    if rename:
        symbols = {s.name: s for s in expr.free_symbols}
        expr = expr.xreplace({symbols[old]: Symbol(new) for old, new in rename.items() if old in symbols})
    return target.field.from_expr(expr)
