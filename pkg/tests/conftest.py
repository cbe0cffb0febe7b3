import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from risee.channel import ChannelSet  # noqa: E402
from risee.config import Scenario  # noqa: E402

settings.register_profile("ci", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def random_channels(rng, K, L, N, scale=1.0) -> ChannelSet:
    def cn(*shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return ChannelSet(cn(N, K), cn(L, N), cn(L, K))


def random_beams(rng, K, L, P):
    W = rng.standard_normal((K, L)) + 1j * rng.standard_normal((K, L))
    return W * np.sqrt(P / np.sum(np.abs(W) ** 2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small():
    """A small scenario whose channels come from the regular generator."""
    return Scenario(K=3, L=2, N=4, seed=7)


@pytest.fixture
def criterion(request, capsys):
    """Record and print one acceptance line: ``criterion(name, ok, detail)``."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def report(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        lines.append(line)
        with capsys.disabled():
            print(f"\n    {line}")
        return ok
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
