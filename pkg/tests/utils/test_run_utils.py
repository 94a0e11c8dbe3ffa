# -*- coding: utf-8 -*-
"""Unit tests."""
import logging

import pytest

from rhosum.errors import ResourceLimit
from rhosum.utils.run_utils import Deadline, parallel_map, thread_count


# pylint: disable=missing-function-docstring,missing-class-docstring


def test_thread_count(monkeypatch):
    monkeypatch.setenv("RHOSUM_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("RHOSUM_THREADS", "0")
    assert thread_count() == 1


def test_thread_count_invalid(monkeypatch, caplog):
    caplog.set_level(logging.DEBUG)
    monkeypatch.setenv("RHOSUM_THREADS", "many")
    # action
    actual = thread_count()
    # check
    assert actual >= 1
    assert caplog.messages[0] == "Ignoring invalid RHOSUM_THREADS='many'"


def test_parallel_map_keeps_order():
    assert parallel_map(lambda x: x * x, range(10), threads=4) == [x * x for x in range(10)]
    assert parallel_map(lambda x: x + 1, [1, 2], threads=1) == [2, 3]
    assert not parallel_map(lambda x: x, [], threads=4)


def test_parallel_map_raises():
    def func(x):
        if x == 3:
            raise ValueError("three")
        return x

    with pytest.raises(ValueError, match="three"):
        parallel_map(func, range(6), threads=2)


def test_deadline_none():
    deadline = Deadline(None)
    assert deadline.remaining() is None
    deadline.check("anything")


def test_deadline_exhausted(caplog):
    caplog.set_level(logging.DEBUG)
    now = [100.0]
    deadline = Deadline(5, clock=lambda: now[0])
    deadline.check()
    assert deadline.remaining() == 5
    # action
    now[0] = 106.0
    # check
    assert deadline.elapsed == 6
    with pytest.raises(ResourceLimit, match="time budget of 5 s exhausted in telescoping"):
        deadline.check("telescoping")
    assert caplog.messages[0] == "Timeout hit while running telescoping"
    assert ResourceLimit.exit_code == 4
