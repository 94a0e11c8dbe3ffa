# -*- coding: utf-8 -*-
"""Parameterized telescoping in a tower, with the refined variants that may adjoin one sum.

``solve_pt`` returns a basis of all (c, g) with c in K^d and

    sigma(g) - g = c_1 f_1 + ... + c_d f_d

by descending through the Sigma generators: with s the top generator, g is made a polynomial
in s of degree D+1 and its coefficients are found from the top degree down, each a
telescoping problem one generator lower.  The Pi part at the bottom is handed to
:func:`rhosum.prs_solver.prs_solve`.

The variants, all asking for a solution with c_1 != 0:

* ``rpt1`` stays in the given tower;
* ``rpt3`` may adjoin one sum tau on top of the ring of the first i Sigma generators,
  trying i = 0, 1, ... and keeping the first success;
* ``rpt2`` is rpt3 restricted to tau no deeper than the sum c_1 f_1 + ... + c_d f_d;
* ``rpt4`` is rpt3 falling back to tau = sum of f_1.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from rhosum.diff_ring import (
    Generator, RingElem, Tower, coefficient, degree, depth, dump_elem, sigma, sigma_generator,
)
from rhosum.errors import Incomplete, NoSolution
from rhosum.prs_solver import KERNEL_RADIUS, prs_solve

Solution = Tuple[List[object], RingElem]


@dataclass
class RptResult:
    """c with c_1 = 1, the certificate g, the tower g lives in and the generators adjoined for it."""

    constants: List[object]
    certificate: RingElem
    tower: Tower
    new_generators: Tuple[Generator, ...] = ()
    warnings: List[str] = field(default_factory=list)


@dataclass(frozen=True)
class _Extension:
    """Where tau may be adjoined: on top of the ring of the first ``ring`` sum generators."""

    ring: int
    leads: Tuple[object, ...]
    taken: Tuple[str, ...]


def _rebase(x: RingElem, tower: Tower) -> RingElem:
    return RingElem(tower, dict(x.terms))


def _binomial(n: int, k: int) -> int:
    result = 1
    for j in range(k):
        result = result * (n - j) // (j + 1)
    return result


def _lead(leads: Sequence, c: Sequence):
    return sum((a * b for a, b in zip(leads, c)), leads[0] * 0)


def solve_pt(tower: Tower, fs: Sequence[RingElem], extension: Optional[_Extension] = None,
             kernel_radius: int = KERNEL_RADIUS) -> Tuple[List[Solution], Tuple[Generator, ...]]:
    """Basis of the telescoping solutions and the generators adjoined on the way.

    Raises Incomplete when the search at the bottom cannot be finished within its limits.
    """
    gf = tower.field
    sums = tower.sigma_gens
    if extension is not None and len(sums) == extension.ring:
        return _chain_bottom(tower, fs, extension, kernel_radius)
    if not sums:
        return prs_solve(tower, [-gf.one(), gf.one()], fs, kernel_radius=kernel_radius), ()
    top = sums[-1]
    sub = Tower(gf, tuple(g for g in tower.gens if g.name != top.name))
    beta = top.increment
    n = len(fs)
    top_degree = max([degree(f, top.name) for f in fs] + [0])
    zero = [gf.zero()] * n
    basis = [([gf.one() if j == i else gf.zero() for j in range(n)], {}) for i in range(n)]
    basis.append((list(zero), {top_degree + 1: sub.one()}))
    new_gens: Tuple[Generator, ...] = ()
    for e in range(top_degree, -1, -1):
        rhs = []
        for c, g in basis:
            r = sub.zero()
            for ci, f in zip(c, fs):
                if ci:
                    r = r + coefficient(f, top.name, e) * ci
            for e2, ge in g.items():
                if e2 > e and ge:
                    r = r - sigma(sub, ge) * beta ** (e2 - e) * _binomial(e2, e)
            rhs.append(_rebase(r, sub))
        if e == 0 and extension is not None:
            leads = tuple(_lead(extension.leads, c) for c, _ in basis)
            solutions, new_gens = solve_pt(sub, rhs, _Extension(extension.ring, leads, extension.taken),
                                           kernel_radius)
        else:
            solutions, _ = solve_pt(sub, rhs, kernel_radius=kernel_radius)
        combined = []
        for mu, h in solutions:
            c = list(zero)
            g = {}
            for m, (cl, gl) in zip(mu, basis):
                if not m:
                    continue
                c = [a + m * b for a, b in zip(c, cl)]
                for e2, ge in gl.items():
                    g[e2] = g.get(e2, sub.zero()) + ge * m
            g[e] = h
            combined.append((c, g))
        basis = combined
        logging.debug("pt %s degree %d: %d partial solutions", top.name, e, len(basis))
    for gen in new_gens:
        if not tower.has(gen.name):
            tower = tower.with_gen(gen)
    s = tower.monomial(top.name)
    results = []
    for c, g in basis:
        total = tower.zero()
        for e, ge in g.items():
            total = total + _rebase(ge, tower) * s ** e
        results.append((c, total))
    return results, new_gens


def _chain_bottom(tower: Tower, fs: Sequence[RingElem], extension: _Extension,
                  kernel_radius: int) -> Tuple[List[Solution], Tuple[Generator, ...]]:
    solutions, _ = solve_pt(tower, fs, kernel_radius=kernel_radius)
    if any(_lead(extension.leads, mu) for mu, _ in solutions):
        return solutions, ()
    candidates = [i for i, lead in enumerate(extension.leads) if lead and fs[i]]
    if not candidates:
        return solutions, ()
    pick = candidates[0]
    scale = tower.field.one() / extension.leads[pick]
    phi = fs[pick] * scale
    extended, tau = sigma_generator(tower, phi, check=False, stem="tau", taken=extension.taken)
    mu = [scale if i == pick else tower.field.zero() for i in range(len(fs))]
    logging.debug("adjoining a sum over %s", dump_elem(phi))
    new_gens = tuple(g for g in extended.gens if not tower.has(g.name))
    return solutions + [(mu, tau)], new_gens


def _first_lead(solutions: Sequence[Solution]) -> Optional[Solution]:
    for c, g in solutions:
        if c and c[0]:
            scale = 1 / c[0]
            return [x * scale for x in c], g * scale
    return None


def _tower_of(tower: Tower, fs: Sequence[RingElem]) -> Tower:
    for f in fs:
        if isinstance(f, RingElem) and len(f.tower.gens) > len(tower.gens):
            tower = f.tower
    return tower


def rpt1(tower: Tower, fs: Sequence[RingElem], kernel_radius: int = KERNEL_RADIUS) -> RptResult:
    """c with c_1 = 1 and g in the given tower; NoSolution if there is none, Incomplete if unknown."""
    tower = _tower_of(tower, fs)
    solutions, _ = solve_pt(tower, fs, kernel_radius=kernel_radius)
    logging.debug("rpt1: solution space of dimension %d", len(solutions))
    found = _first_lead(solutions)
    if found is None:
        raise NoSolution(f"no telescoping relation with c1 != 0 among {len(fs)} summands")
    return RptResult(found[0], found[1], tower)


def rpt3(tower: Tower, fs: Sequence[RingElem], depth_limit: Optional[Callable] = None,
         kernel_radius: int = KERNEL_RADIUS) -> RptResult:
    """Solution that may adjoin one sum on top of a lower ring of the tower.

    Rings whose search is incomplete are skipped and reported in the result's warnings; when no
    ring gives a solution and one of them was incomplete, Incomplete is raised.
    """
    tower = _tower_of(tower, fs)
    count = len(tower.sigma_gens)
    first = [tower.field.one()] + [tower.field.zero()] * (len(fs) - 1)
    warnings = []
    for ring in range(count):
        try:
            solutions, new_gens = solve_pt(tower, fs, _Extension(ring, tuple(first), tower.names()), kernel_radius)
        except Incomplete as ex:
            logging.warning("telescoping search over ring %d incomplete: %s", ring, ex)
            warnings.append(f"ring {ring}: {ex}")
            continue
        found = _first_lead(solutions)
        if found is None:
            continue
        extended = tower
        for gen in new_gens:
            if not extended.has(gen.name):
                extended = extended.with_gen(gen)
        if depth_limit is not None and any(g.depth > depth_limit(found[0]) for g in new_gens):
            logging.debug("rpt2: sum over ring %d too deep", ring)
            continue
        logging.debug("rpt3: solved with %d new sums over ring %d", len(new_gens), ring)
        return RptResult(found[0], _rebase(found[1], extended), extended, new_gens, warnings)
    if warnings:
        raise Incomplete(f"no relation with one adjoined sum found, search incomplete at {'; '.join(warnings)}")
    raise NoSolution("no telescoping relation with one adjoined sum")


def rpt2(tower: Tower, fs: Sequence[RingElem], kernel_radius: int = KERNEL_RADIUS) -> RptResult:
    """rpt3 with the new sum no deeper than the summand combination."""
    def combination_depth(c):
        total = fs[0] * 0
        for ci, f in zip(c, fs):
            total = total + f * ci
        return depth(total)
    return rpt3(tower, fs, combination_depth, kernel_radius)


def rpt4(tower: Tower, fs: Sequence[RingElem], kernel_radius: int = KERNEL_RADIUS) -> RptResult:
    """rpt3, else the trivial solution c = (1, 0, ..., 0) with g the sum over f_1."""
    warnings = []
    try:
        return rpt3(tower, fs, kernel_radius=kernel_radius)
    except NoSolution:
        pass
    except Incomplete as ex:
        warnings.append(str(ex))
    tower = _tower_of(tower, fs)
    extended, tau = sigma_generator(tower, fs[0], check=False, stem="tau")
    new_gens = tuple(g for g in extended.gens if not tower.has(g.name))
    constants = [tower.field.one()] + [tower.field.zero()] * (len(fs) - 1)
    return RptResult(constants, tau, extended, new_gens, warnings)


VARIANTS = {"rpt1": rpt1, "rpt2": rpt2, "rpt3": rpt3, "rpt4": rpt4}


def rpt(variant: str, tower: Tower, fs: Sequence[RingElem], kernel_radius: int = KERNEL_RADIUS) -> RptResult:
    return VARIANTS[variant](tower, fs, kernel_radius=kernel_radius)


def telescope_in_tower(tower: Tower, f: RingElem, kernel_radius: int = KERNEL_RADIUS) -> Optional[RingElem]:
    """g in the tower with sigma(g) - g = f, or None."""
    try:
        solutions, _ = solve_pt(tower, [f], kernel_radius=kernel_radius)
    except Incomplete as ex:
        logging.warning("unverified extension: %s", ex)
        return None
    found = _first_lead(solutions)
    return None if found is None else found[1]
