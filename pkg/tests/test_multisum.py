# -*- coding: utf-8 -*-
"""Unit tests."""
import logging

import pytest
from sympy import QQ

import rhosum.multisum
from rhosum.config import RunConfig
from rhosum.diff_ring import Tower
from rhosum.errors import (EmptyCore, Incomplete, NoRecurrenceWithinLimits, NotIndefinite, RangeViolation,
                           ResourceLimit, VerificationFailed)
from rhosum.exact_arith import ground_field
from rhosum.multisum import (ExceptionalSplit, LayerReport, PipelineReport, Relation, _check_relation,
                             _vanishing_factor, base_system, exceptional_split, find_recurrence, layers_of,
                             pure_relation, simplify_definite_rhs, summand_normal_form, telescope)
from rhosum.oracle import eval_exact
from rhosum.parser import parse, parse_expr
from rhosum.serialize import human
from rhosum.sum_expr import ONE, ZERO, Sum, add, contains

# pylint: disable=missing-function-docstring,missing-class-docstring

NESTED = "Sum[Sum[Binomial[k,j]*S[1,j]^2,{j,0,k}]*Binomial[n,k],{k,0,n}]"
INNER = "Sum[Binomial[k,j]*S[1,j]^2,{j,0,k}]"


def nested_values(count: int) -> list:
    expr = parse(NESTED).expr
    return [eval_exact(expr, {"n": n}) for n in range(count)]


def inner_values(count: int) -> list:
    expr = parse_expr(INNER)
    return [eval_exact(expr, {"k": k}) for k in range(count)]


@pytest.fixture(name="config")
def fixture_config() -> RunConfig:
    return RunConfig(threads=1)


class TestLayers:

    @staticmethod
    def test_single():
        layers = layers_of(parse("Sum[Binomial[n,k],{k,0,n}]"))
        assert len(layers) == 1
        assert layers[0].index == "k"
        assert layers[0].outer == "n"
        assert layers[0].params == ("n",)
        assert layers[0].next_params == ()

    @staticmethod
    def test_nested_innermost_first():
        layers = layers_of(parse(NESTED))
        assert [layer.index for layer in layers] == ["j", "k"]
        assert [layer.outer for layer in layers] == ["k", "n"]
        assert layers[0].params == ("k",)
        # the inner sequence lives in the field of the outer summation
        assert layers[0].next_params == ("n",)
        assert layers[1].next_params == ()
        assert layers[0].ground == ground_field(("k",))

    @staticmethod
    def test_not_a_sum():
        with pytest.raises(NotIndefinite, match="not a definite sum"):
            layers_of(parse("n^2"))


class TestBaseSystem:

    @staticmethod
    def test_constant_one():
        gf = ground_field(("n",))
        system = base_system(gf, "k")
        assert system.order == 0
        assert system.expr == ONE
        assert system.tactic == "base"
        assert system.params == ()
        assert system.extension.value(7, {"n": 3}) == 1

    @staticmethod
    def test_summand_normal_form_shifts():
        system = base_system(ground_field(("n", "x")), "k")
        factor = parse_expr("Binomial[n,k]")
        with pytest.raises(RangeViolation, match="leaves the range"):
            summand_normal_form(system, factor, {"n": -1})
        with pytest.raises(RangeViolation, match="more than one parameter"):
            summand_normal_form(system, factor, {"n": 1, "x": 1})


class TestFindRecurrence:

    @staticmethod
    def test_constant_summand(config, caplog):
        # prepare
        caplog.set_level(logging.INFO)
        spec = parse("Sum[1,{k,0,n}]")
        # action
        recurrence, report = find_recurrence(spec, config)
        # check
        assert human(recurrence) == "S(n+1)-S(n)=1"
        lines = report.lines()
        assert lines[0].startswith("sum over k: order 1 in n by rpt1 with 1 shifts, valid from n = 0 (1 attempts")
        assert lines[1] == "  telescoping point: G(n + 1) - G(0)"
        assert caplog.messages[0].startswith("Finding a recurrence in n for ")
        assert caplog.messages[-1].startswith("Recurrence of order 1 found in ")

    @staticmethod
    def test_binomial(config):
        recurrence, report = find_recurrence(parse("Sum[Binomial[n,k],{k,0,n}]"), config)
        assert human(recurrence) == "S(n+1)-2*S(n)=0"
        assert report.layers[0].shifts == 2
        assert not report.warnings

    @staticmethod
    def test_double_sum(config):
        # sum_{k=0}^{n} (k + 1) = (n + 1)(n + 2)/2
        recurrence, report = find_recurrence(parse("Sum[Sum[1,{j,0,k}],{k,0,n}]"), config)
        assert recurrence.order == 1
        assert eval_exact(recurrence.rhs, {"n": 3}) == 5
        assert [entry.index for entry in report.layers] == ["j", "k"]

    @staticmethod
    def test_order_limit():
        config = RunConfig(d_max=1, threads=1)
        with pytest.raises(NoRecurrenceWithinLimits, match="at most 1 shifted summands"):
            find_recurrence(parse("Sum[Binomial[n,k],{k,0,n}]"), config)

    @staticmethod
    def test_time_budget():
        config = RunConfig(time_budget=1e-9, threads=1)
        with pytest.raises(ResourceLimit, match="exhausted in the sum over k"):
            find_recurrence(parse("Sum[Binomial[n,k],{k,0,n}]"), config)

    @staticmethod
    def test_kernel_radius_reaches_telescoping(monkeypatch):
        # prepare
        seen = []
        original = rhosum.multisum.algorithm1

        def recording(ext, fs, tactic, kernel_radius):
            seen.append(kernel_radius)
            return original(ext, fs, tactic, kernel_radius)

        monkeypatch.setattr("rhosum.multisum.algorithm1", recording)
        # action
        recurrence, _ = find_recurrence(parse("Sum[Binomial[n,k],{k,0,n}]"), RunConfig(kernel_radius=2, threads=1))
        # check
        assert recurrence.order == 1
        assert seen and set(seen) == {2}

    @staticmethod
    @pytest.mark.slow
    def test_nested_sum(config):
        # action
        recurrence, report = find_recurrence(parse(NESTED), config)
        # check
        assert recurrence.order <= 3
        assert not any(entry.unresolved for entry in report.layers)
        values = nested_values(recurrence.start + recurrence.order + 8)
        for n in range(recurrence.start, recurrence.start + 8):
            assert recurrence.residual(values[n:n + recurrence.order + 1], n) == 0


class TestTelescope:

    @staticmethod
    def test_rational(config):
        # action
        certificate = telescope(parse("Sum[1/(k*(k+1)),{k,1,n}]"), 1, "rpt1", config)
        # check
        assert certificate.outer == "n"
        assert certificate.index == "k"
        assert certificate.checked == 6
        assert certificate.lines()[0] == "c1 = 1"
        assert certificate.lines()[1].startswith("G = ")
        g = certificate.certificate
        assert eval_exact(g, {"k": 4}) - eval_exact(g, {"k": 3}) == eval_exact(parse_expr("1/(3*4)"), {})

    @staticmethod
    @pytest.mark.slow
    def test_binomial_times_harmonic_square(config):
        # action
        certificate = telescope(parse(INNER), 5, "rpt1", config)
        # check
        assert len(certificate.constants) == 5
        for k in (3, 8):
            expected = [-8 * (1 + k) * (3 + k), 4 * (29 + 25 * k + 5 * k ** 2), -2 * (8 + 3 * k) * (10 + 3 * k),
                        86 + 49 * k + 7 * k ** 2, -(4 + k) ** 2]
            actual = [eval_exact(c, {"k": k}) for c in certificate.constants]
            assert actual == [QQ(e, expected[0]) for e in expected]

    @staticmethod
    def test_invalid_summands(config):
        with pytest.raises(ValueError, match="at least one summand"):
            telescope(parse("Sum[1,{k,0,n}]"), 0, config=config)


class TestExceptionalSplit:

    @staticmethod
    def test_boundary():
        expr = parse_expr("Sum[1/(k+1),{k,0,n}]")
        parts = exceptional_split(expr, 1, 2, "boundary")
        assert len(parts) == 3
        assert all(isinstance(part, Sum) for part in parts)
        for n in (3, 6):
            assert eval_exact(add(*parts), {"n": n}) == eval_exact(expr, {"n": n})

    @staticmethod
    def test_distribute():
        expr = parse_expr("Sum[2^k,{k,0,n}]")
        parts = exceptional_split(expr, 2, 1)
        assert len(parts) == 1
        for n in (4, 9):
            assert eval_exact(parts[0], {"n": n}) == 2 ** (n + 1) - 1

    @staticmethod
    def test_nothing_cut():
        expr = parse_expr("Sum[k,{k,0,n}]")
        assert exceptional_split(expr, 0, 0) == [expr]

    @staticmethod
    def test_invalid():
        expr = parse_expr("Sum[k,{k,0,2}]")
        with pytest.raises(ValueError, match="unknown split strategy 'middle'"):
            exceptional_split(expr, 1, 1, "middle")
        with pytest.raises(ValueError, match="must not be negative"):
            exceptional_split(expr, -1, 0)
        with pytest.raises(EmptyCore, match="no points left"):
            exceptional_split(expr, 2, 1)


def test_pipeline_report(caplog):
    # prepare
    layer = LayerReport("k", "n", order=1, tactic="rpt1", shifts=2, attempts=3, new_generators=["h1"],
                        seconds=0.5)
    report = PipelineReport([layer], [ExceptionalSplit("k", 0, 2)])
    # action
    report.warn("definite sum kept")
    # check
    assert report.lines() == [
        "sum over k: order 1 in n by rpt1 with 2 shifts, valid from n = 0 (3 attempts, 0.50 s)",
        "  adjoined: h1",
        "range of k cut by 0 below and 2 above (boundary)",
        "warning: definite sum kept",
    ]
    assert caplog.messages == ["definite sum kept"]


class TestCheckRelation:

    @staticmethod
    def relation(coeffs, rhs, start=0) -> Relation:
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        gf = layer.next_ground
        tower = Tower(gf)
        return Relation("n", gf, [{"n": 0}, {"n": 1}], coeffs, tower, tower.element(rhs),
                        parse_expr("Binomial[2,n]"), start)

    @staticmethod
    def test_failures_at_a_root_of_the_leading_coefficient(config):
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        t = layer.next_ground.t
        # (n - 2) (S(n + 1) - S(n)) = n - 2 + Binomial[2, n] fails for n <= 2 only
        relation = TestCheckRelation.relation([-(t - 2), t - 2], t - 2)
        assert _check_relation(layer, relation, config) == 3

    @staticmethod
    def test_wrong_relation(config):
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        gf = layer.next_ground
        relation = TestCheckRelation.relation([-gf.one(), gf.one()], gf.one())
        with pytest.raises(VerificationFailed, match="fails at n = 0"):
            _check_relation(layer, relation, config)

    @staticmethod
    def test_failures_below_the_derived_start(config):
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        gf = layer.next_ground
        relation = TestCheckRelation.relation([-gf.one(), gf.one()], gf.one(), start=3)
        assert _check_relation(layer, relation, config) == 3

    @staticmethod
    def test_failures_above_the_derived_start(config):
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        gf = layer.next_ground
        relation = TestCheckRelation.relation([-gf.one(), gf.one()], gf.one(), start=2)
        with pytest.raises(VerificationFailed, match="fails at n = 2"):
            _check_relation(layer, relation, config)


class TestDefiniteRightHandSide:

    @staticmethod
    def test_vanishing_factor():
        gf = ground_field(("n",))
        assert _vanishing_factor(gf, parse_expr("Binomial[n,n+5]*Sum[j,{j,0,n}]"))
        assert _vanishing_factor(gf, parse_expr("-Binomial[n,n+1]"))
        assert not _vanishing_factor(gf, parse_expr("Binomial[n,3]*Sum[j,{j,0,n}]"))

    @staticmethod
    def test_resolved_by_its_own_recurrence(config):
        gf = ground_field()
        # action
        closed = simplify_definite_rhs([parse_expr("Sum[Binomial[n,j],{j,0,n}]")], "n", gf, Tower(gf),
                                       [gf.one(), gf.one()], config)
        # check
        assert closed is not None
        assert not contains(closed, Sum)
        assert eval_exact(closed, {"n": 7}) == 128

    @staticmethod
    def test_vanishing_sum(config):
        gf = ground_field()
        terms = [parse_expr("Sum[Binomial[n,j],{j,n+1,n+3}]")]
        assert simplify_definite_rhs(terms, "n", gf, Tower(gf), [gf.one(), gf.one()], config) == ZERO

    @staticmethod
    def test_recursion_depth():
        gf = ground_field()
        config = RunConfig(definite_depth=0, threads=1)
        terms = [parse_expr("Sum[Binomial[n,j],{j,0,n}]")]
        assert simplify_definite_rhs(terms, "n", gf, Tower(gf), [gf.one(), gf.one()], config) is None

    @staticmethod
    def test_product_of_sums(config):
        gf = ground_field()
        terms = [parse_expr("Sum[Binomial[n,j],{j,0,n}]*Sum[j,{j,0,n}]")]
        assert simplify_definite_rhs(terms, "n", gf, Tower(gf), [gf.one(), gf.one()], config) is None


class TestLadder:

    @staticmethod
    def fake_relation(unresolved_until: int):
        def relation(layer, system, shifts, tactic, config, tower, outermost,  # pylint: disable=unused-argument
                     deadline=None):
            gf = layer.next_ground
            unresolved = ("Sum[j,{j,0,n}]",) if len(shifts) <= unresolved_until else ()
            return Relation(layer.outer, gf, shifts, [gf.one()] * len(shifts), tower, tower.zero(), tactic=tactic,
                            unresolved=unresolved)
        return relation

    @staticmethod
    def test_definite_sum_relation_is_held_back(monkeypatch):
        # prepare
        monkeypatch.setattr("rhosum.multisum._relation", TestLadder.fake_relation(1))
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        report = PipelineReport()
        # action
        relation, entry = pure_relation(layer, base_system(layer.ground, layer.index), RunConfig(threads=1), True,
                                        report=report)
        # check
        assert relation.order == 1
        assert not relation.unresolved
        assert entry.shifts == 2
        assert not report.warnings

    @staticmethod
    def test_definite_sum_relation_as_last_resort(monkeypatch):
        # prepare
        monkeypatch.setattr("rhosum.multisum._relation", TestLadder.fake_relation(10))
        layer = layers_of(parse("Sum[1,{k,0,n}]"))[0]
        report = PipelineReport()
        # action
        relation, entry = pure_relation(layer, base_system(layer.ground, layer.index),
                                        RunConfig(d_max=2, threads=1), True, report=report)
        # check
        assert relation.order == 0
        assert entry.shifts == 1
        assert report.warnings == ["definite sum kept in the right-hand side: Sum[j,{j,0,n}]"]

    @staticmethod
    def test_incomplete_search_is_reported(monkeypatch, caplog):
        # prepare
        def incomplete(*args, **kwargs):
            raise Incomplete("kernel search cut short")

        monkeypatch.setattr("rhosum.multisum.algorithm1", incomplete)
        # action
        with pytest.raises(NoRecurrenceWithinLimits):
            find_recurrence(parse("Sum[1,{k,0,n}]"), RunConfig(d_max=1, threads=1))
        # check
        assert "incomplete search for the sum over k (rpt1, 1 summands): kernel search cut short" in caplog.messages


class TestReferenceRelations:

    @staticmethod
    def test_first_values():
        assert nested_values(4) == [0, 1, QQ(25, 4), QQ(1039, 36)]
        assert inner_values(4) == [0, 1, QQ(17, 4), QQ(118, 9)]

    @staticmethod
    def test_inner_order_four():
        x = inner_values(12)
        for k in range(8):
            assert (4 + k) ** 2 * x[k + 4] == (-8 * (1 + k) * (3 + k) * x[k] + 4 * (29 + 25 * k + 5 * k ** 2) * x[k + 1]
                                               - 2 * (8 + 3 * k) * (10 + 3 * k) * x[k + 2]
                                               + (86 + 49 * k + 7 * k ** 2) * x[k + 3] + 1)

    @staticmethod
    def test_nested_order_five():
        s = nested_values(12)
        for n in range(7):
            assert (108 * (1 + n) * (2 + n) * (3 + 2 * n) * s[n]
                    - 54 * (2 + n) * (21 + 30 * n + 8 * n ** 2) * s[n + 1]
                    + 3 * (831 + 1634 * n + 795 * n ** 2 + 114 * n ** 3) * s[n + 2]
                    + (-1227 - 2556 * n - 1095 * n ** 2 - 134 * n ** 3) * s[n + 3]
                    + (283 + 632 * n + 243 * n ** 2 + 26 * n ** 3) * s[n + 4]
                    - (5 + n) ** 2 * (1 + 2 * n) * s[n + 5]) == 0

    @staticmethod
    def test_nested_order_three():
        s = nested_values(12)
        for n in range(9):
            lhs = ((1 + n) * (2 + n) * (3 + n)
                   * (-36 * (1 + n) * s[n] + 6 * (12 + 7 * n) * s[n + 1] + 2 * (-19 - 8 * n) * s[n + 2]
                      + 2 * (3 + n) * s[n + 3]))
            assert lhs == -2 ** (3 + n) * (1 + n) ** 2 + 2 * 3 ** (2 + n) * (1 + n) * (3 + 2 * n)
