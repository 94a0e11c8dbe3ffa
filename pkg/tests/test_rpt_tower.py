# -*- coding: utf-8 -*-
"""Unit tests."""
import pytest

import rhosum.rpt_tower
from rhosum.diff_ring import Tower, represent, sigma
from rhosum.errors import Incomplete, NoSolution
from rhosum.exact_arith import ground_field
from rhosum.parser import parse_expr
from rhosum.rpt_tower import rpt, rpt1, rpt3, rpt4, solve_pt, telescope_in_tower

# pylint: disable=missing-function-docstring,missing-class-docstring


@pytest.fixture(name="tower")
def fixture_tower():
    return Tower(ground_field())


def test_rpt1_rational(tower):
    t = tower.field.t
    f = tower.element(1 / (t * (t + 1)))
    # action
    result = rpt1(tower, [f])
    # check
    assert result.constants[0] == 1
    assert sigma(result.tower, result.certificate) - result.certificate == f
    assert not result.new_generators


def test_rpt1_creative(tower):
    t = tower.field.t
    # 1/(t+1) and 1/(t+2) differ by a telescoping term: c = (1, -1)
    fs = [tower.element(1 / (t + 1)), tower.element(1 / (t + 2))]
    # action
    result = rpt1(tower, fs)
    # check
    g = result.certificate
    assert result.constants[0] == 1
    assert result.constants[1] == -1
    assert sigma(tower, g) - g == fs[0] - fs[1]


def test_rpt1_no_solution(tower):
    t = tower.field.t
    with pytest.raises(NoSolution):
        rpt1(tower, [tower.element(1 / (t + 1))])


def test_solve_pt_with_sums(tower):
    tower, h = represent(tower, parse_expr("S[1,k]"), "k")
    # sum of S[1,k] telescopes with g = t*S[1,t] - t
    solutions, new_gens = solve_pt(tower, [h])
    assert not new_gens
    assert any(c[0] for c, _ in solutions)
    for c, g in solutions:
        assert sigma(tower, g) - g == h * c[0]


def test_rpt3_without_sums(tower):
    t = tower.field.t
    with pytest.raises(NoSolution):
        rpt3(tower, [tower.element(1 / (t + 1))])


def test_rpt4_adjoins_sum(tower):
    t = tower.field.t
    f = tower.element(1 / (t + 1))
    # action
    result = rpt4(tower, [f])
    # check
    assert len(result.new_generators) == 1
    assert result.new_generators[0].name == "tau1"
    assert result.constants[0] == 1
    assert sigma(result.tower, result.certificate) - result.certificate == f
    assert rpt("rpt4", tower, [f]).new_generators[0].name == "tau1"


def test_telescope_in_tower(tower):
    t = tower.field.t
    g = telescope_in_tower(tower, tower.element(t))
    assert sigma(tower, g) - g == tower.element(t)
    assert telescope_in_tower(tower, tower.element(1 / (t + 1))) is None


def test_rpt1_incomplete_search(tower, monkeypatch):
    # prepare
    def incomplete(*args, **kwargs):
        raise Incomplete("kernel search cut short")

    monkeypatch.setattr("rhosum.rpt_tower.prs_solve", incomplete)
    t = tower.field.t
    # action / check
    with pytest.raises(Incomplete, match="cut short"):
        rpt1(tower, [tower.element(1 / (t * (t + 1)))])


def test_rpt4_records_incomplete_search(tower, monkeypatch):
    # prepare
    tower, h = represent(tower, parse_expr("S[1,k]"), "k")

    def incomplete(*args, **kwargs):
        raise Incomplete("kernel search cut short")

    monkeypatch.setattr("rhosum.rpt_tower.prs_solve", incomplete)
    # action
    result = rpt4(tower, [h])
    # check
    assert len(result.new_generators) == 1
    assert len(result.warnings) == 1
    assert "cut short" in result.warnings[0]


def test_kernel_radius_is_passed_on(tower, monkeypatch):
    # prepare
    seen = []
    original = rhosum.rpt_tower.prs_solve

    def recording(*args, **kwargs):
        seen.append(kwargs.get("kernel_radius", args[3] if len(args) > 3 else None))
        return original(*args, **kwargs)

    monkeypatch.setattr("rhosum.rpt_tower.prs_solve", recording)
    t = tower.field.t
    # action
    result = rpt1(tower, [tower.element(1 / (t * (t + 1)))], kernel_radius=1)
    # check
    assert result.constants[0] == 1
    assert seen == [1]
