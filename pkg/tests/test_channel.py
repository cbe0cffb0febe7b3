import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import effective_channel_loop
from risee.channel import (ChannelSet, draw_channels, effective_channel, effective_channels, path_gain,
                           read_channel_dump, trial_rng, write_channel_dump)
from risee.config import Scenario


def test_shapes_and_finite(small):
    cs = draw_channels(small, 0)
    assert cs.F.shape == (4, 3) and cs.f.shape == (2, 4) and cs.g.shape == (2, 3)
    assert all(np.all(np.isfinite(a)) for a in (cs.F, cs.f, cs.g))


def test_determinism_and_trial_independence(small):
    a, b = draw_channels(small, 3), draw_channels(small, 3)
    assert a.digest() == b.digest()
    assert np.array_equal(a.F, b.F) and np.array_equal(a.f, b.f) and np.array_equal(a.g, b.g)
    assert draw_channels(small, 4).digest() != a.digest()
    assert draw_channels(small.replace(seed=8), 3).digest() != a.digest()


def test_architecture_does_not_change_channels(small):
    digests = {draw_channels(small.replace(architecture=a), 2).digest() for a in ("LPD", "GPD", "GPBD", "NoRIS")}
    assert len(digests) == 1


def test_trial_streams_are_order_independent():
    x = trial_rng(5, 10).standard_normal(4)
    trial_rng(5, 3).standard_normal(100)
    assert np.array_equal(trial_rng(5, 10).standard_normal(4), x)


def test_rayleigh_limit_zero_mean_large_sample():
    s = Scenario(K=2, L=1, N=2, rician_kappa=0.0)
    samples = []
    for t in range(10_000):
        cs = draw_channels(s, t)
        samples.append(cs.F[0, 0] / np.sqrt(cs.meta["gain_F"]))
    samples = np.array(samples)
    se = 1.0 / np.sqrt(samples.size)
    assert abs(samples.mean()) < 3 * se


def test_pure_los_limit():
    s = Scenario(K=3, L=2, N=6, rician_kappa=1e9)
    cs = draw_channels(s, 1)
    F_norm = cs.F / np.sqrt(cs.meta["gain_F"])
    H = cs.meta["F_los"]
    assert np.linalg.norm(F_norm - H) / np.linalg.norm(H) < 1e-3
    assert np.linalg.matrix_rank(H, tol=1e-9) == 1


def test_direct_link_variance_matches_path_gain():
    s = Scenario(K=1, L=1, N=1, users_radius=0.0)
    vals = []
    for t in range(10_000):
        cs = draw_channels(s, t)
        vals.append(cs.g[0, 0])
    vals = np.array(vals)
    expected = draw_channels(s, 0).meta["gain_g"][0]
    assert abs(np.mean(np.abs(vals) ** 2) / expected - 1) < 0.05


def test_path_gain_law():
    assert np.isclose(10 * np.log10(path_gain(10.0, 2.2, 35.0)), -(35 + 22))
    assert np.isclose(10 * np.log10(path_gain(100.0, 3.7, 35.0)), -(35 + 74))


def test_effective_channel_examples(rng):
    cs = ChannelSet(np.array([[3.0]]), np.array([[2.0]]), np.array([[1.0]]))
    assert effective_channel(cs, np.array([[0.5]]), 0)[0] == 4.0
    K, L, N = 3, 2, 4
    F = rng.standard_normal((N, K)) + 1j * rng.standard_normal((N, K))
    f = rng.standard_normal((L, N)) + 1j * rng.standard_normal((L, N))
    g = rng.standard_normal((L, K)) + 1j * rng.standard_normal((L, K))
    cs = ChannelSet(F, f, g)
    assert np.array_equal(effective_channel(cs, np.zeros((N, N)), 1), g[1])
    for l in range(L):
        assert np.max(np.abs(effective_channel(cs, np.eye(N), l) - effective_channel_loop(F, f[l], np.eye(N), g[l]))) < 1e-12
    with pytest.raises(ValueError):
        effective_channel(cs, np.eye(N + 1), 0)


@given(seed=st.integers(0, 2**32 - 1))
def test_effective_channel_is_affine_in_psi(seed):
    rng = np.random.default_rng(seed)
    K, L, N = 2, 3, 3
    cs = draw_channels(Scenario(K=K, L=L, N=N, seed=seed), 0)
    p1 = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    p2 = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    lhs = effective_channels(cs, p1 + p2) + cs.g
    rhs = effective_channels(cs, p1) + effective_channels(cs, p2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_channel_dump_round_trip(tmp_path, small):
    sets = [draw_channels(small, t) for t in range(3)]
    path = write_channel_dump(tmp_path / "ch.bin", sets)
    header = path.read_bytes().split(b"\n", 1)[0].decode()
    assert "K=3" in header and "L=2" in header and "N=4" in header and "records=3" in header
    back = read_channel_dump(path)
    assert [b.digest() for b in back] == [s.digest() for s in sets]
    raw = path.read_bytes().split(b"\n", 1)[1]
    first = np.frombuffer(raw[:16], dtype="<f8")
    assert first[0] == sets[0].F[0, 0].real and first[1] == sets[0].F[0, 0].imag
