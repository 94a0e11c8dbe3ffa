# -*- coding: utf-8 -*-
"""Unit tests."""
import pytest
from sympy import QQ

from rhosum.errors import NonLinearBound, ParseError, UnboundVariable
from rhosum.parser import parse, parse_expr, tokenize
from rhosum.sum_expr import (ZERO, Binomial, BoundVar, HarmonicSum, Infinity, Param, Pow, PowerProduct, Product,
                             Quantifier, const)

# pylint: disable=missing-function-docstring,missing-class-docstring

NESTED = "Sum[Sum[Binomial[k,j]*S[1,j]^2,{j,0,k}]*Binomial[n,k],{k,0,n}]"


def test_tokenize():
    tokens = tokenize("Sum[1, {k,0,n}]")
    assert [t.text for t in tokens] == ["Sum", "[", "1", ",", "{", "k", ",", "0", ",", "n", "}", "]", ""]
    assert tokens[-1].kind == "end"
    assert tokens[-1].position == 15


def test_parse_single_sum():
    spec = parse("Sum[Binomial[n,k],{k,0,n}]")
    assert spec.distinguished == "n"
    assert spec.params == ("n",)
    assert spec.quantifiers == (Quantifier("k", ZERO, Param("n")),)
    assert spec.factors == (Binomial(Param("n"), BoundVar("k")),)


def test_parse_nested():
    spec = parse(NESTED)
    assert len(spec.quantifiers) == 2
    assert spec.factors[0] == Binomial(Param("n"), BoundVar("k"))
    assert spec.quantifiers[1] == Quantifier("j", ZERO, BoundVar("k"))
    assert spec.factors[1].factors[0] == Binomial(BoundVar("k"), BoundVar("j"))
    assert spec.factors[1].factors[1] == Pow(HarmonicSum((1,), (QQ(1),), BoundVar("j")), const(2))


def test_parse_parameters():
    spec = parse("Sum[Binomial[n,k]*x^k,{k,0,n}]")
    assert spec.params == ("n", "x")
    spec = parse("Sum[Binomial[n,k]*x^k,{k,0,n}]", params=["n", "x"], distinguished="x")
    assert spec.params == ("x", "n")
    with pytest.raises(UnboundVariable):
        parse("Sum[Binomial[n,k],{k,0,n}]", distinguished="m")


def test_parse_products_and_infinity():
    assert isinstance(parse_expr("Product[k+1,{k,1,n}]"), PowerProduct)
    assert isinstance(parse_expr("Product[Binomial[k,2],{k,2,n}]"), Product)
    assert parse_expr("Sum[1/2^k,{k,0,Infinity}]").upper == Infinity()
    assert parse_expr("Power[2,k]") == Pow(const(2), Param("k"))


def test_parse_error_position():
    with pytest.raises(ParseError) as excinfo:
        parse("Sum[1,{k,0,n}")
    assert excinfo.value.position == 13
    assert str(excinfo.value) == "expected ']' but found end of input (at position 13)"
    assert excinfo.value.exit_code == 3


def test_parse_error_character():
    with pytest.raises(ParseError) as excinfo:
        parse_expr("n + $")
    assert excinfo.value.position == 4
    with pytest.raises(ParseError, match="unknown function"):
        parse_expr("Foo[n]")
    with pytest.raises(ParseError, match="Binomial expects 2 arguments"):
        parse_expr("Binomial[n]")
    with pytest.raises(ParseError, match="division by zero"):
        parse_expr("n/0")


def test_parse_bounds():
    with pytest.raises(NonLinearBound):
        parse("Sum[1,{k,0,n^2}]")
    with pytest.raises(NonLinearBound):
        parse("Sum[1,{k,0,n/2}]")
    with pytest.raises(UnboundVariable, match="own range"):
        parse("Sum[1,{k,0,k}]")
    with pytest.raises(UnboundVariable):
        parse("Sum[m,{k,0,n}]", params=["n"])
    with pytest.raises(NonLinearBound, match="infinite"):
        parse("Product[k,{k,1,Infinity}]")


def test_parse_harmonic_errors():
    with pytest.raises(ParseError, match="positive integers"):
        parse_expr("S[0,k]")
    with pytest.raises(ParseError, match="one per weight"):
        parse_expr("S[1,2,{1/2},k]")
