# -*- coding: utf-8 -*-
"""Text forms of recurrences and telescoping certificates.

The human form reads like ``S(n+1)-S(n)=1`` with the highest shift first.  The machine form is
an S-expression with explicit shift operators such as ``(shift S n 2)`` and integer polynomial
coefficients with their terms sorted, so equal recurrences give byte-identical output.
"""
from typing import List, Sequence

from rhosum.exact_arith import GroundField
from rhosum.hol_core import Recurrence
from rhosum.hyperterm import rational_to_expr
from rhosum.sum_expr import Add, Div, Param, is_const, render, render_const


def shift_text(name: str, variable: str, i: int) -> str:
    return f"{name}({variable})" if i == 0 else f"{name}({variable}{'+' if i > 0 else '-'}{abs(i)})"


def _negative(f) -> bool:
    return f.numer.LC < 0


def _term(gf: GroundField, c, variable: str, unknown: str) -> str:
    """|c| * unknown, without a sign."""
    magnitude = -c if _negative(c) else c
    expr = rational_to_expr(gf, magnitude, Param(variable))
    if is_const(expr, 1):
        return unknown
    text = render(expr).replace(" ", "")
    if isinstance(expr, (Add, Div)) or (is_const(expr) and "/" in text):
        text = f"({text})"
    return f"{text}*{unknown}"


def human(recurrence: Recurrence, name: str = "S") -> str:
    """``c_r(n)*S(n+r)+...+c_0(n)*S(n)=rhs`` with the highest shift first."""
    gf = recurrence.ground
    out = ""
    for i in reversed(range(len(recurrence.coeffs))):
        c = recurrence.coeffs[i]
        if not c:
            continue
        term = _term(gf, c, recurrence.variable, shift_text(name, recurrence.variable, i))
        if _negative(c):
            out += "-" + term
        else:
            out += ("+" if out else "") + term
    rhs = render(recurrence.rhs)
    return f"{out or '0'}={rhs.replace(' ', '')}"


def _poly_sexp(gf: GroundField, poly, variable: str) -> str:
    names = [variable] + list(gf.params)
    terms = []
    for monom, coeff in sorted(poly.terms(), reverse=True):
        powers = "".join(f" ({names[j]} {e})" for j, e in enumerate(monom) if e)
        terms.append(f"(term {render_const(coeff)}{powers})")
    return f"(poly {' '.join(terms)})" if terms else "(poly)"


def sexp(recurrence: Recurrence, name: str = "S") -> str:
    """Canonical S-expression of a normalized recurrence."""
    gf = recurrence.ground
    variable = recurrence.variable
    lines = ["(recurrence",
             f"  (variable {variable})",
             f"  (parameters{''.join(' ' + p for p in gf.params)})",
             f"  (start {recurrence.start})",
             "  (lhs"]
    for i, c in enumerate(recurrence.coeffs):
        if not c:
            continue
        # normalized coefficients are polynomials
        lines.append(f"    (* {_poly_sexp(gf, c.numer, variable)} (shift {name} {variable} {i}))")
    lines.append("  )")
    lines.append(f'  (rhs "{render(recurrence.rhs)}"))')
    return "\n".join(lines)


def render_recurrence(recurrence: Recurrence, output_format: str = "human", name: str = "S") -> str:
    if output_format == "sexp":
        return sexp(recurrence, name)
    return human(recurrence, name)


def certificate_lines(constants: Sequence[str], certificate: str, new_generators: Sequence[str] = ()) -> List[str]:
    """Lines of a telescoping result: the constants c_1..c_d, G and the adjoined sums."""
    lines = [f"c{i + 1} = {c}" for i, c in enumerate(constants)]
    lines.append(f"G = {certificate}")
    lines.extend(f"adjoined: {g}" for g in new_generators)
    return lines
