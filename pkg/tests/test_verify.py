# -*- coding: utf-8 -*-
"""Unit tests."""
import logging

import pytest

from rhosum.config import RunConfig
from rhosum.diff_ring import Tower
from rhosum.errors import VerificationFailed
from rhosum.exact_arith import ground_field
from rhosum.hol_core import HolExtension, Recurrence
from rhosum.parser import parse
from rhosum.sum_expr import ONE, ZERO
from rhosum.verify import VerificationReport, check_certificate, verify_recurrence

# pylint: disable=missing-function-docstring,missing-class-docstring


@pytest.fixture(name="config")
def fixture_config() -> RunConfig:
    return RunConfig(verify_length=10, threads=1)


class TestVerifyRecurrence:

    @staticmethod
    def test_pass(config, caplog):
        # prepare
        caplog.set_level(logging.INFO)
        spec = parse("Sum[Binomial[n,k],{k,0,n}]")
        gf = ground_field()
        recurrence = Recurrence("n", gf, [gf.const(-2), gf.one()], ZERO)
        # action
        report = verify_recurrence(spec, recurrence, config)
        # check
        assert report.ok
        assert report.failures == []
        assert report.lines() == ["window 0..9: 10 points checked, 0 skipped", "PASS"]
        assert caplog.messages[-1] == "Recurrence verified at 10 points (0 skipped)"

    @staticmethod
    def test_fail(config):
        spec = parse("Sum[Binomial[n,k],{k,0,n}]")
        gf = ground_field()
        recurrence = Recurrence("n", gf, [gf.const(-3), gf.one()], ZERO)
        # action
        report = verify_recurrence(spec, recurrence, config)
        # check
        assert not report.ok
        assert report.failures == list(range(10))
        # 2^(n+1) - 3 * 2^n
        assert report.residuals[3] == -8
        assert report.lines()[-1] == "FAIL"
        assert len(report.lines()) == 12

    @staticmethod
    def test_skips_start_and_roots(config):
        spec = parse("Sum[1,{k,0,n}]")
        gf = ground_field()
        t = gf.t
        # (n - 2)(n + 1) S(n + 1) - (n - 2)(n + 2) S(n) = 0 with S(n) = n + 1
        recurrence = Recurrence("n", gf, [-(t - 2) * (t + 2), (t - 2) * (t + 1)], ZERO, start=1)
        # action
        report = verify_recurrence(spec, recurrence, config)
        # check
        assert report.ok
        assert report.skipped == [0, 2]
        assert report.lines()[:2] == ["window 0..9: 8 points checked, 2 skipped", "skipped: 0, 2"]


def test_report_without_points():
    report = VerificationReport((0, 5), skipped=[0, 1, 2, 3, 4])
    assert not report.ok
    assert report.lines()[-1] == "FAIL"
    report = VerificationReport((0, 1), {0: 0}, certificate_checks=6)
    assert report.ok
    assert report.lines() == ["window 0..0: 1 points checked, 0 skipped", "certificate checked at 6 points", "PASS"]


class TestCheckCertificate:

    @staticmethod
    def constant_one() -> HolExtension:
        tower = Tower(ground_field())
        return HolExtension(tower, (), tower.one(), initial=lambda _point: ONE)

    def test_checked_points(self):
        ext = self.constant_one()
        gf = ext.ground
        # sigma(t) - t = 1
        count = check_certificate(ext, [ext.lifted(tail=1)], [gf.one()], ext.lifted(tail=gf.t), range(0, 6))
        assert count == 6

    def test_mismatch(self):
        ext = self.constant_one()
        gf = ext.ground
        with pytest.raises(VerificationFailed, match="certificate fails at t = 0"):
            check_certificate(ext, [ext.lifted(tail=1)], [gf.const(2)], ext.lifted(tail=gf.t), range(0, 6))

    def test_poles_are_skipped(self):
        ext = self.constant_one()
        gf = ext.ground
        t = gf.t
        # sigma(-1/t) + 1/t = 1/(t (t + 1)), poles at 0 and -1
        f = ext.lifted(tail=1 / (t * (t + 1)))
        count = check_certificate(ext, [f], [gf.one()], ext.lifted(tail=-1 / t), range(-1, 5))
        assert count == 4
