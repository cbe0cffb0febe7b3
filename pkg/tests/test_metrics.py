import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_beams, random_channels
from oracles import ees_loop, rates_loop
from risee.channel import ChannelSet, draw_channels
from risee.config import Scenario, derived_static_power
from risee.metrics import evaluate, user_ee, user_rate


def _scalar(h):
    return ChannelSet(np.zeros((1, 1)), np.zeros((1, 1)), np.array([[h]]))


def test_rate_examples():
    cs = _scalar(2.0)
    assert user_rate(cs, np.zeros((1, 1)), np.array([[0.0]]), 4.0, 0) == 0.0
    assert math.isclose(user_rate(cs, np.zeros((1, 1)), np.array([[3.0]]), 4.0, 0), math.log2(10))
    # scaling the beam by c and the noise power by c^2 leaves the SINR alone
    assert math.isclose(user_rate(cs, np.zeros((1, 1)), np.array([[30.0]]), 400.0, 0), math.log2(10), rel_tol=1e-12)
    with pytest.raises(ValueError):
        user_rate(cs, np.zeros((1, 1)), np.array([[3.0]]), 0.0, 0)


def test_ee_examples():
    assert math.isclose(user_ee(3.3219, np.array([3.0]), 1.0, 1.0), 0.33219)
    assert user_ee(0.0, np.array([3.0]), 1.0, 1.0) == 0.0
    assert user_ee(2.0, np.array([3.0, 1.0]), 4.0, 0.0) == 0.5
    with pytest.raises(ValueError):
        user_ee(1.0, np.array([0.0]), 0.0, 1.0)


def test_symmetric_users_have_equal_ee():
    h = np.array([1.0 + 0.5j, -0.3j])
    cs = ChannelSet(np.zeros((1, 2)), np.zeros((2, 1)), np.vstack([h, h]))
    w = np.array([0.4, 0.2j])
    rep = evaluate(cs, np.zeros((1, 1)), np.column_stack([w, w]), Scenario(K=2, L=2, N=1))
    assert rep.ees[0] == rep.ees[1] == rep.min_ee


def test_evaluate_matches_loop_oracle(rng):
    for arch in ("LPD", "GPD", "GPBD", "NoRIS"):
        s = Scenario(K=3, L=3, N=4, architecture=arch, r_th=0.1)
        cs = random_channels(rng, 3, 3, 4)
        psi = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        W = random_beams(rng, 3, 3, s.P)
        rep = evaluate(cs, psi, W, s)
        rates = rates_loop(cs.F, cs.f, cs.g, psi, W, s.sigma2)
        ees = ees_loop(rates, W, derived_static_power(s), s.beta)
        assert np.max(np.abs(rep.rates - rates)) <= 1e-12
        assert np.max(np.abs(rep.ees - ees)) <= 1e-12
        assert rep.min_ee == np.min(rep.ees)
        assert math.isclose(rep.min_rate_slack, np.min(rates - 0.1), abs_tol=1e-12)
        assert math.isclose(rep.power_used, np.sum(np.abs(W) ** 2))


def test_noris_and_identity_differ_only_through_channel():
    s = Scenario(K=2, L=2, N=3)
    cs = draw_channels(s, 0)
    W = random_beams(np.random.default_rng(0), 2, 2, s.P)
    a = evaluate(cs, np.zeros((3, 3)), W, s)
    b = evaluate(ChannelSet(cs.F, cs.f, cs.g + cs.f @ cs.F), np.zeros((3, 3)), W, s)
    assert np.allclose(evaluate(cs, np.eye(3), W, s).rates, b.rates, rtol=1e-12)
    assert a.power_used == b.power_used


@given(seed=st.integers(0, 2**32 - 1), j=st.integers(0, 2), phi=st.floats(0, 2 * np.pi))
def test_rate_phase_invariance(seed, j, phi):
    rng = np.random.default_rng(seed)
    s = Scenario(K=2, L=3, N=2)
    cs = random_channels(rng, 2, 3, 2)
    psi = np.diag(np.exp(1j * rng.uniform(0, 6, 2)))
    W = random_beams(rng, 2, 3, s.P)
    W2 = W.copy()
    W2[:, j] *= np.exp(1j * phi)
    assert np.allclose(evaluate(cs, psi, W, s).rates, evaluate(cs, psi, W2, s).rates, rtol=0, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), dp=st.floats(1e-3, 10))
def test_ee_decreases_with_static_power(seed, dp):
    rng = np.random.default_rng(seed)
    s = Scenario(K=2, L=2, N=2)
    cs = random_channels(rng, 2, 2, 2)
    W = random_beams(rng, 2, 2, s.P)
    a = evaluate(cs, np.eye(2), W, s)
    b = evaluate(cs, np.eye(2), W, s.replace(P_t=s.P_t + dp))
    pos = a.ees > 0
    assert np.all(b.ees[pos] < a.ees[pos])
    assert a.min_ee <= np.min(a.ees)
