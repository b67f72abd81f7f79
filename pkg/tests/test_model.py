import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chromatic_mh import Event, ModelConfig, ValidationError, World, sample_world, tau_max
from chromatic_mh.model import (
    log_arrival_density,
    log_event_prior,
    log_joint,
    log_signal_likelihood,
    variance_profile,
)
from oracles import naive_log_joint, naive_signal_loglik

CFG = ModelConfig()


def ev(x, t, arrivals=None, id=0, cfg=CFG):
    if arrivals is None:
        arrivals = [t + abs(x - s) / cfg.v for s in cfg.stations]
    return Event(x, t, arrivals, id)


# -- config -------------------------------------------------------------------

def test_tau_max_default():
    assert tau_max(CFG) == 50
    assert CFG.tau_max == 50


def test_tau_max_faster_waves():
    assert tau_max(ModelConfig(v=4.0)) == 25


@pytest.mark.parametrize("kwargs", [
    {"x_max": 0.0},
    {"v": -1.0},
    {"var_event": 1.0},
    {"var_event": 0.5},
    {"stations": (33.0, 0.0)},
    {"stations": (0.0,)},
    {"stations": (0.0, 120.0)},
    {"sample_rate": 0.25, "T": 10.0},
    {"lambda_rate": float("nan")},
])
def test_config_rejects(kwargs):
    with pytest.raises(ValidationError):
        ModelConfig(**kwargs)


# -- prior and arrivals ------------------------------------------------------------

def test_prior_empty():
    assert log_event_prior([], CFG) == pytest.approx(-4.8, abs=1e-12)


def test_prior_one_event():
    expect = -4.8 + math.log(4.8) - math.log(100) - math.log(240)
    assert log_event_prior([ev(50, 100)], CFG) == pytest.approx(expect, abs=1e-12)


def test_prior_out_of_support():
    assert log_event_prior([ev(101, 100)], CFG) == -math.inf
    assert log_event_prior([ev(50, -0.1)], CFG) == -math.inf


def test_arrival_density_figure_events():
    e = ev(87, 169, [0, 0, 0, 175.5])
    peak = -math.log(CFG.sigma_arrival * math.sqrt(2 * math.pi))
    assert e.predicted_arrivals(CFG)[3] == 175.5
    assert log_arrival_density(e, 3, CFG) == pytest.approx(peak)
    assert ev(56, 99).predicted_arrivals(CFG)[2] == 104.0


def test_arrival_density_one_sigma():
    e = ev(50, 100, [100 + 25 + 2.0, 0, 0, 0])
    peak = -math.log(CFG.sigma_arrival * math.sqrt(2 * math.pi))
    assert log_arrival_density(e, 0, CFG) == pytest.approx(peak - 0.5)


# -- variance profile and signal likelihood ----------------------------------------

def test_variance_profile_empty():
    assert np.all(variance_profile([], CFG) == 1.0)


def test_variance_profile_single_window():
    e = Event(50, 0, [10.0, 500.0, 500.0, 500.0])
    var = variance_profile([e], CFG)
    assert np.all(var[0, 10:30] == 5.0)
    assert np.all(var[0, :10] == 1.0) and np.all(var[0, 30:] == 1.0)
    assert np.all(var[1:] == 1.0)


def test_variance_profile_overlap_and_additivity():
    a = Event(50, 0, [10.0, 300.0, 300.0, 300.0], 0)
    b = Event(50, 0, [25.0, 300.0, 300.0, 300.0], 1)
    var = variance_profile([a, b], CFG)
    assert np.all(var[0, 25:30] == 9.0)
    va, vb = variance_profile([a], CFG), variance_profile([b], CFG)
    np.testing.assert_array_equal(var, 1.0 + (va - 1.0) + (vb - 1.0))


def test_variance_profile_clipped_at_edges():
    e = Event(50, 230, [230.5, 250.0, -15.0, 239.0])
    var = variance_profile([e], CFG)
    assert var.shape == (4, 240)
    assert np.all(var[0, 231:] == 5.0)
    assert np.all(var[1] == 1.0)
    assert np.all(var[2, :5] == 5.0) and var[2, 5] == 1.0
    assert var[3, 239] == 5.0


def test_signal_likelihood_zero_signal():
    s = np.zeros((4, 240))
    assert log_signal_likelihood(s, [], CFG) == pytest.approx(-4 * 120 * math.log(2 * math.pi))


def test_signal_likelihood_unit_sample():
    s = np.zeros((4, 240))
    s[1, 7] = 1.0
    base = log_signal_likelihood(np.zeros((4, 240)), [], CFG)
    assert log_signal_likelihood(s, [], CFG) - base == pytest.approx(-0.5)


def test_signal_likelihood_window():
    w = sample_world(CFG, 3)
    full = log_signal_likelihood(w.signals, w.events, CFG)
    parts = (log_signal_likelihood(w.signals, w.events, CFG, (0, 100))
             + log_signal_likelihood(w.signals, w.events, CFG, (100, 240)))
    assert parts == pytest.approx(full, abs=1e-9)
    with pytest.raises(ValidationError):
        log_signal_likelihood(w.signals, w.events, CFG, (0, 241))


@pytest.mark.parametrize("seed", range(5))
def test_signal_likelihood_matches_naive_oracle(seed):
    w = sample_world(CFG, seed)
    assert log_signal_likelihood(w.signals, w.events, CFG) == pytest.approx(
        naive_signal_loglik(CFG, w.events, w.signals), abs=1e-8)


# -- log joint ------------------------------------------------------------------

def test_log_joint_empty_zero_signal():
    w = World(CFG, (), np.zeros((4, 240)))
    assert log_joint(w) == pytest.approx(-4.8 - 480 * math.log(2 * math.pi))


@pytest.mark.parametrize("seed", range(8))
def test_log_joint_recomposition(seed):
    w = sample_world(CFG, seed)
    lj = log_joint(w)
    assert math.isfinite(lj)
    parts = (log_event_prior(w.events, CFG)
             + sum(log_arrival_density(e, j, CFG) for e in w.events for j in range(4))
             + log_signal_likelihood(w.signals, w.events, CFG))
    assert lj == pytest.approx(parts, abs=1e-9)
    assert lj == pytest.approx(naive_log_joint(CFG, w.events, w.signals), abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(5))), st.integers(0, 2**31))
def test_signal_likelihood_exchangeable(order, seed):
    rng = np.random.default_rng(seed)
    events = [ev(rng.uniform(0, 100), rng.uniform(0, 240), id=i) for i in range(5)]
    s = rng.standard_normal((4, 240))
    a = log_signal_likelihood(s, events, CFG)
    b = log_signal_likelihood(s, [events[i] for i in order], CFG)
    assert a == pytest.approx(b, abs=1e-9)


# -- domain types ---------------------------------------------------------------

def test_world_rejects_bad_events():
    s = np.zeros((4, 240))
    with pytest.raises(ValidationError):
        World(CFG, (ev(150, 10),), s)
    with pytest.raises(ValidationError):
        World(CFG, (Event(50, 10, [1.0, 2.0]),), s)
    with pytest.raises(ValidationError):
        World(CFG, (ev(50, 10, id=1), ev(60, 10, id=1)), s)
    with pytest.raises(ValidationError):
        World(CFG, (), np.zeros((4, 239)))
    with pytest.raises(ValidationError):
        World(CFG, (), np.full((4, 240), np.nan))


def test_world_equality_and_immutability():
    w = sample_world(CFG, 1)
    assert w == sample_world(CFG, 1)
    assert w != sample_world(CFG, 2)
    assert not w.signals.flags.writeable
    with pytest.raises(AttributeError):
        w.events = ()
