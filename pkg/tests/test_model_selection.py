import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rejfilter.errors import IncomparableRegistersError
from rejfilter.model_selection import (
    LogLikelihoodRegister,
    bayes_factor,
    register_increment,
    track_two_models,
    update_register,
)


def test_default_hedging_is_half():
    assert LogLikelihoodRegister().hedging == 0.5


def test_increments():
    assert register_increment(0, 100) == pytest.approx(math.log(0.5 / 101))
    assert register_increment(0, 100) == pytest.approx(-5.3083, abs=1e-4)
    assert register_increment(100, 100) == pytest.approx(math.log(100.5 / 101), rel=1e-15)
    assert register_increment(100, 100) == pytest.approx(-0.0049628, abs=1e-7)
    with pytest.raises(ValueError):
        register_increment(101, 100)
    with pytest.raises(ValueError):
        register_increment(0, 0)


def test_update_counts_updates():
    reg = update_register(LogLikelihoodRegister(), 10, 100)
    assert reg.updates_seen == 1
    assert reg.value == pytest.approx(math.log(10.5 / 101))


def test_bayes_factor_examples():
    a = LogLikelihoodRegister(value=-3.0, updates_seen=4)
    assert bayes_factor(a, a) == 1.0
    b = LogLikelihoodRegister(value=-3.0 - math.log(2), updates_seen=4)
    assert bayes_factor(a, b) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(IncomparableRegistersError):
        bayes_factor(a, LogLikelihoodRegister(updates_seen=3))


def test_overflow_is_handled():
    a = LogLikelihoodRegister(value=0.0, updates_seen=1)
    b = LogLikelihoodRegister(value=-1e4, updates_seen=1)
    assert bayes_factor(a, b) == math.inf
    assert bayes_factor(b, a) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=300))
def test_register_stays_finite(counts):
    reg = LogLikelihoodRegister()
    for n_a in counts:
        reg = update_register(reg, n_a, 50)
    assert math.isfinite(reg.value)
    zeros = LogLikelihoodRegister()
    for _ in counts:
        zeros = update_register(zeros, 0, 50)
    assert math.isfinite(zeros.value)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 1000), st.floats(0.01, 5.0))
def test_increment_strictly_increasing(m, beta):
    incs = [register_increment(n, m, beta) for n in range(m + 1)]
    assert all(b > a for a, b in zip(incs, incs[1:]))


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 0), st.floats(-50, 0))
def test_antisymmetry(la, lb):
    a = LogLikelihoodRegister(value=la, updates_seen=2)
    b = LogLikelihoodRegister(value=lb, updates_seen=2)
    assert bayes_factor(a, b) * bayes_factor(b, a) == pytest.approx(1.0, rel=1e-12)


def test_two_model_rows():
    rows = list(track_two_models(20, attempts=50, seed=3))
    assert [r[0] for r in rows] == list(range(1, 21))
    for k, la, lb, kh in rows:
        assert kh == pytest.approx(math.exp(la - lb))
    assert rows == list(track_two_models(20, attempts=50, seed=3))
