import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import covariance_loop
from risee.config import Architecture
from risee.ris import RisState, certify, gp_slack, incident_covariance, initial_psi


def _rand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_covariance_examples(rng):
    assert np.array_equal(incident_covariance(np.eye(3), np.zeros((3, 2))), np.zeros((3, 3)))
    e1 = np.array([1.0, 0, 0])
    assert np.array_equal(incident_covariance(np.eye(3), e1), np.outer(e1, e1))
    F, W = _rand(rng, 5, 3), _rand(rng, 3, 4)
    R = incident_covariance(F, W)
    assert np.linalg.norm(R - covariance_loop(F, W)) < 1e-12
    assert np.max(np.abs(R - R.conj().T)) <= 1e-12
    assert np.min(np.linalg.eigvalsh(R)) >= -1e-10 * np.trace(R).real
    with pytest.raises(ValueError):
        incident_covariance(F, _rand(rng, 4, 2))


def test_gp_slack_examples():
    R = np.diag([2.0, 3.0]).astype(complex)
    assert gp_slack(R, np.eye(2)) == 0.0
    assert gp_slack(R, np.zeros((2, 2))) == -5.0
    assert np.isclose(gp_slack(np.eye(2), np.diag([np.sqrt(2), 0.0])), 0.0, atol=1e-15)


def test_certify_examples(rng):
    N = 5
    theta = rng.uniform(0, 2 * np.pi, N)
    assert certify(RisState(np.diag(np.exp(1j * theta)), "LPD"))
    # with five elements the same amplification is paid for by the absorbing ones
    rep = certify(RisState(np.diag([1.5, 0.1, 0, 0, 0]).astype(complex), "GPD"), np.eye(N))
    assert rep.passed and np.isclose(rep.measures["gp_slack"], 2.25 + 0.01 - 5.0)
    N2 = 2
    psi = np.diag([1.5, 0.1]).astype(complex)
    rep = certify(RisState(psi, "GPD"), np.eye(N2))
    assert not rep.passed and rep.worst == "gp_slack"
    assert np.isclose(rep.measures["gp_slack"], 2.25 + 0.01 - 2.0)
    A = _rand(rng, 3, 3)
    rep = certify(RisState(0.1 * A, "GPBD"), np.eye(3))
    assert not rep.passed and rep.worst == "asymmetry"
    rep = certify(RisState(np.eye(3) + 0.1 * np.triu(A, 1), "GPD"), np.eye(3))
    assert not rep.passed and rep.worst == "offdiag_norm"


def test_zero_incident_power_is_vacuous():
    rep = certify(RisState(5 * np.eye(3), "GPD"), np.zeros((3, 3)))
    assert rep.passed


def test_initial_psi_certifies_everywhere(rng):
    F, W = _rand(rng, 4, 2), _rand(rng, 2, 3)
    R = incident_covariance(F, W)
    for arch in (Architecture.LPD, Architecture.GPD, Architecture.GPBD):
        assert certify(RisState(initial_psi(arch, 4), arch), R)
    assert not initial_psi(Architecture.NORIS, 4).any()


def _random_lpd(rng, N):
    return np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, N)))


def _random_gpd(rng, N, R):
    d = _rand(rng, N)
    psi = np.diag(d)
    s = gp_slack(R, psi)
    if s > 0:  # scale into the passive set
        psi = psi * np.sqrt(np.trace(R).real / (np.trace(R).real + s)) * (1 - 1e-9)
    return psi


def test_nesting_lpd_gpd_gpbd(rng):
    for _ in range(100):
        N = int(rng.integers(1, 9))
        K, L = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        R = incident_covariance(_rand(rng, N, K), _rand(rng, K, L))
        lpd = RisState(_random_lpd(rng, N), "LPD")
        assert certify(lpd)
        gpd = certify(RisState(lpd.psi, "GPD"), R)
        assert gpd.passed and gpd.measures["gp_slack"] <= 1e-10 * np.trace(R).real
        psi = _random_gpd(rng, N, R)
        assert certify(RisState(psi, "GPD"), R)
        assert certify(RisState(psi, "GPBD"), R)


@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 6))
def test_gp_slack_unitary_invariance(seed, N):
    rng = np.random.default_rng(seed)
    R = incident_covariance(_rand(rng, N, 2), _rand(rng, 2, 2))
    psi = _rand(rng, N, N)
    U, _ = np.linalg.qr(_rand(rng, N, N))
    assert abs(gp_slack(R, U @ psi) - gp_slack(R, psi)) <= 1e-10 * max(1.0, abs(gp_slack(R, psi)))


@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 6), lam=st.floats(0, 1))
def test_gp_slack_convex_along_lines(seed, N, lam):
    rng = np.random.default_rng(seed)
    R = incident_covariance(_rand(rng, N, 3), _rand(rng, 3, 2))
    p1, p2 = _rand(rng, N, N), _rand(rng, N, N)
    mid = gp_slack(R, lam * p1 + (1 - lam) * p2)
    chord = lam * gp_slack(R, p1) + (1 - lam) * gp_slack(R, p2)
    assert mid <= chord + 1e-10 * max(1.0, abs(chord))
