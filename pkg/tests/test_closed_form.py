# -*- coding: utf-8 -*-
"""Unit tests."""
from sympy import QQ

from rhosum.closed_form import solve_recurrence
from rhosum.exact_arith import ground_field
from rhosum.hol_core import Recurrence
from rhosum.oracle import eval_exact
from rhosum.parser import parse_expr
from rhosum.sum_expr import ONE, const

# pylint: disable=missing-function-docstring,missing-class-docstring


def test_geometric_solution():
    # x(n + 1) - 2 x(n) = 1, x(0) = 0
    recurrence = Recurrence("n", ground_field(), [-2, 1], ONE)
    # action
    form = solve_recurrence(recurrence, lambda n: const(QQ(2) ** n - 1))
    # check
    assert form is not None
    assert form.value(10) == 1023
    assert eval_exact(form.to_expr(), {"n": 7}) == 127


def test_polynomial_solution():
    # x(n + 1) - x(n) = n + 1, x(0) = 0
    recurrence = Recurrence("n", ground_field(), [-1, 1], parse_expr("n+1"))
    # action
    form = solve_recurrence(recurrence, lambda n: const(QQ(n * (n + 1), 2)))
    # check
    assert form is not None
    assert form.value(4) == 10
    assert form.value(100) == 5050


def test_harmonic_numbers_have_no_closed_form():
    recurrence = Recurrence("n", ground_field(), [-1, 1], parse_expr("1/(n+1)"))
    assert solve_recurrence(recurrence, lambda n: const(sum((QQ(1, i) for i in range(1, n + 1)), QQ(0)))) is None


def test_initial_values_must_match():
    recurrence = Recurrence("n", ground_field(), [-2, 1], ONE)
    assert solve_recurrence(recurrence, lambda n: const(QQ(3) ** n)) is None


def test_kernel_radius_is_passed_on(monkeypatch):
    # prepare
    seen = []

    def fake_solve(tower, coeffs, rhs, kernel_radius):  # pylint: disable=unused-argument
        seen.append(kernel_radius)
        return []

    monkeypatch.setattr("rhosum.closed_form.prs_solve", fake_solve)
    recurrence = Recurrence("n", ground_field(), [-2, 1], ONE)
    # action
    assert solve_recurrence(recurrence, lambda n: const(QQ(2) ** n - 1), kernel_radius=1) is None
    # check
    assert seen and set(seen) == {1}
