# -*- coding: utf-8 -*-
"""Unit tests."""
from sympy import QQ

from rhosum.parser import parse_expr
from rhosum.sum_expr import (CONSTANT, ZERO, Add, Binomial, BoundVar, IntConst, Mul, Neg, Param, Sum, add, const,
                             eval_linear, free_names, from_linear, is_integer_linear, linear_form, mul, neg,
                             power, render, shift_param, substitute)

# pylint: disable=missing-function-docstring,missing-class-docstring


class TestConstructors:

    @staticmethod
    def test_add_folds_constants():
        assert add(const(1), const(2)) == const(3)
        assert add(Param("n"), const(0)) == Param("n")
        assert add(add(Param("n"), const(1)), const(2)) == Add((Param("n"), const(3)))

    @staticmethod
    def test_mul():
        n = Param("n")
        assert mul(const(-1), n) == Neg(n)
        assert mul(const(0), n) == ZERO
        assert mul(const(1), n) == n
        assert mul(const(2), mul(const(3), n)) == Mul((const(6), n))
        assert mul(Neg(n), Neg(n)) == Mul((n, n))

    @staticmethod
    def test_neg_and_power():
        n = Param("n")
        assert neg(neg(n)) == n
        assert neg(const(2)) == const(-2)
        assert power(n, const(0)) == const(1)
        assert power(n, const(1)) == n
        assert power(const(2), const(3)) == const(8)
        assert power(const(2), const(-1)) == IntConst(QQ(1, 2))


class TestRender:

    @staticmethod
    def test_simple():
        assert render(parse_expr("n+1")) == "n + 1"
        assert render(parse_expr("n-1")) == "n - 1"
        assert render(parse_expr("2*n")) == "2*n"
        assert render(parse_expr("2*(n+1)")) == "2*(n + 1)"
        assert render(parse_expr("-n")) == "-n"

    @staticmethod
    def test_sum():
        assert render(parse_expr("Sum[Binomial[n,k],{k,0,n}]")) == "Sum[Binomial[n, k], {k, 0, n}]"
        assert render(parse_expr("S[1,k]")) == "S[1, k]"
        assert render(parse_expr("S[2,1,{1/2,1},k]")) == "S[2, 1, {1/2, 1}, k]"

    @staticmethod
    def test_reparse():
        for text in ("Sum[Sum[Binomial[k,j]*S[1,j]^2,{j,0,k}]*Binomial[n,k],{k,0,n}]",
                     "(n - k)/(k + 1)*2^k - 1/3",
                     "Product[Binomial[k,2],{k,2,n}]"):
            expr = parse_expr(text)
            assert parse_expr(render(expr)) == expr


def test_free_names():
    assert free_names(parse_expr("Sum[Binomial[n,k],{k,0,n}]")) == frozenset({"n"})
    assert free_names(parse_expr("Sum[k*m,{k,0,n}]")) == frozenset({"m", "n"})


def test_substitute_renames_captured_index():
    expr = parse_expr("Sum[k*m,{k,0,n}]")
    # action
    actual = substitute(expr, {"m": Param("k")})
    # check
    assert actual == Sum("k1", ZERO, Param("n"), Mul((BoundVar("k1"), Param("k"))))
    assert render(actual) == "Sum[k1*k, {k1, 0, n}]"


def test_shift_param():
    expr = parse_expr("Binomial[n,k]")
    assert shift_param(expr, "n", 1) == Binomial(Add((Param("n"), const(1))), Param("k"))
    assert shift_param(expr, "n", 0) is expr


def test_linear_form():
    assert linear_form(add(Param("n"), const(2))) == {"n": 1, CONSTANT: 2}
    assert linear_form(parse_expr("2*n - k + 3")) == {"n": 2, "k": -1, CONSTANT: 3}
    assert linear_form(parse_expr("n/2")) == {"n": QQ(1, 2)}
    assert linear_form(parse_expr("n*k")) is None
    assert linear_form(parse_expr("n^2")) is None
    assert is_integer_linear(linear_form(parse_expr("2*n + 1")))
    assert not is_integer_linear(linear_form(parse_expr("n/2")))
    assert not is_integer_linear(None)


def test_from_and_eval_linear():
    form = {"n": QQ(2), CONSTANT: QQ(1)}
    assert render(from_linear(form)) == "2*n + 1"
    assert from_linear({"k": QQ(1)}, bound=("k",)) == BoundVar("k")
    assert eval_linear(form, {"n": 3}) == 7
