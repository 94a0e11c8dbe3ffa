# -*- coding: utf-8 -*-
"""Unit tests."""
import pytest
from sympy import QQ

from rhosum.diff_ring import (PI, ROOT, SIGMA, Generator, Tower, adjoin, depth, dump_elem, dump_tower, elem_eval,
                              represent, sigma, sigma_generator, to_expr)
from rhosum.errors import DependentExtension, NotIndefinite, UnsupportedBase
from rhosum.exact_arith import ground_field
from rhosum.oracle import eval_exact
from rhosum.parser import parse_expr
from rhosum.sum_expr import Binomial, BoundVar, Param
from rhosum.utils.run_utils import parallel_map

# pylint: disable=missing-function-docstring,missing-class-docstring


@pytest.fixture(name="tower")
def fixture_tower():
    return Tower(ground_field())


class TestHarmonic:

    @staticmethod
    def test_represent(tower):
        gf = tower.field
        # action
        tower, h = represent(tower, parse_expr("S[1,k]"), "k")
        # check
        assert tower.names() == ("h1",)
        assert tower.gen("h1").kind == SIGMA
        assert sigma(tower, h) - h == tower.element(1 / (gf.t + 1))
        assert elem_eval(tower, h, 3) == QQ(11, 6)
        assert eval_exact(to_expr(h, BoundVar("k")), {"k": 3}) == QQ(11, 6)

    @staticmethod
    def test_nested_depth(tower):
        tower, h = represent(tower, parse_expr("S[1,1,k]"), "k")
        assert len(tower.sigma_gens) == 2
        assert depth(h) == 2
        assert elem_eval(tower, h, 2) == QQ(7, 4)

    @staticmethod
    def test_shifted_argument(tower):
        tower, h = represent(tower, parse_expr("S[1,k+1]"), "k")
        assert elem_eval(tower, h, 2) == QQ(11, 6)


class TestInnerSums:

    @staticmethod
    def test_indefinite(tower):
        tower, x = represent(tower, parse_expr("Sum[1/(j+1),{j,0,k}]"), "k")
        assert elem_eval(tower, x, 2) == QQ(11, 6)
        assert len(tower.sigma_gens) == 1

    @staticmethod
    def test_telescoping_body_stays_rational(tower):
        tower, x = represent(tower, parse_expr("Sum[j,{j,0,k}]"), "k")
        assert not tower.gens
        assert x.is_rational()
        assert elem_eval(tower, x, 3) == 6

    @staticmethod
    def test_not_indefinite():
        tower = Tower(ground_field(("n",)))
        with pytest.raises(NotIndefinite):
            represent(tower, parse_expr("Sum[1/(j+1),{j,0,n}]"), "k")
        with pytest.raises(NotIndefinite):
            represent(tower, parse_expr("Sum[k*j,{j,0,k}]"), "k")


class TestProducts:

    @staticmethod
    def test_binomial():
        gf = ground_field(("n",))
        # action
        tower, b = represent(Tower(gf), Binomial(Param("n"), BoundVar("k")), "k")
        # check
        assert len(tower.gens) == 1
        assert tower.gens[0].kind == PI
        assert sigma(tower, b) == b * ((gf.param("n") - gf.t) / (gf.t + 1))
        assert elem_eval(tower, b, 2, {"n": 5}) == 10

    @staticmethod
    def test_powers(tower):
        tower, p = represent(tower, parse_expr("2^k"), "k")
        assert tower.names() == ("p1",)
        assert sigma(tower, p) == p * 2
        assert elem_eval(tower, p, 3) == 8
        # 4^k reuses the generator of 2^k
        tower, q = represent(tower, parse_expr("4^k"), "k")
        assert tower.names() == ("p1",)
        assert q == p * p
        assert p * p.inverse() == tower.one()

    @staticmethod
    def test_sign(tower):
        tower, r = represent(tower, parse_expr("(-1)^k"), "k")
        assert tower.gens[0].kind == ROOT
        assert sigma(tower, r) == -r
        assert r * r == tower.one()
        assert elem_eval(tower, r, 3) == -1

    @staticmethod
    def test_sum_in_denominator(tower):
        with pytest.raises(UnsupportedBase):
            represent(tower, parse_expr("1/S[1,k]"), "k")


def test_dependent_extension(tower):
    with pytest.raises(DependentExtension) as excinfo:
        sigma_generator(tower, tower.one())
    witness = excinfo.value.witness
    assert sigma(tower, witness) - witness == tower.one()


def test_sigma_generator_reuse(tower):
    gf = tower.field
    increment = tower.element(1 / (gf.t + 1))
    tower, s = sigma_generator(tower, increment)
    # action
    again_tower, again = sigma_generator(tower, -increment)
    # check
    assert again_tower.names() == tower.names()
    assert again == -s


def test_dump(tower):
    assert dump_elem(tower.zero()) == "0"
    tower, h = represent(tower, parse_expr("S[1,k]"), "k")
    assert dump_elem(h) == "(1)*h1"
    assert "h1 [Sigma, depth 1]" in dump_tower(tower)


def test_partial_sums_cached_on_generator(tower):
    gf = tower.field
    tower, s = sigma_generator(tower, tower.element(1 / (gf.t + 1)))
    gen = tower.sigma_gens[0]
    # action
    assert elem_eval(tower, s, 4, {}) == QQ(25, 12)
    # check
    assert gen.values[()][:5] == [0, 1, QQ(3, 2), QQ(11, 6), QQ(25, 12)]


def test_partial_sums_from_threads(tower):
    gf = tower.field
    tower, s = sigma_generator(tower, tower.element(1 / (gf.t + 1)))
    points = list(range(60, 0, -3))
    # action
    values = parallel_map(lambda k: elem_eval(tower, s, k, {}), points, 4)
    # check
    assert values == [sum((QQ(1, i) for i in range(1, k + 1)), QQ(0)) for k in points]


def test_dependent_power(tower, monkeypatch):
    gf = tower.field
    tower, p = represent(tower, parse_expr("4^k"), "k")
    gen = Generator("q1", PI, ratio=gf.const(QQ(2)))
    # q1^2 = 4^t is only found with powers above 1
    with pytest.raises(DependentExtension) as excinfo:
        adjoin(tower, gen)
    witness = excinfo.value.witness
    assert witness.names() == p.names()
    assert sigma(tower, witness) == witness * gf.const(QQ(4))
    monkeypatch.setattr("rhosum.prs_solver.PI_POWER_BOUND", 1)
    assert adjoin(tower, gen).names() == tower.names() + ("q1",)
