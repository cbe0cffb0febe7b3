"""Rates, energy efficiencies and the max-min objective."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, effective_channels
from .config import Scenario, derived_static_power
from .ris import gp_slack, incident_covariance


@dataclass
class EEReport:
    rates: np.ndarray
    ees: np.ndarray
    min_ee: float
    min_rate_slack: float
    power_used: float
    gp_slack: float
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rates": [float(v) for v in self.rates],
            "ees": [float(v) for v in self.ees],
            "min_ee": float(self.min_ee),
            "min_rate_slack": float(self.min_rate_slack),
            "power_used": float(self.power_used),
            "gp_slack": float(self.gp_slack),
        }


def _as_columns(W, K: int) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    if W.ndim == 1:
        W = W[:, None]
    if W.shape[0] != K:
        raise ValueError(f"beamformers must have length K={K}, got {W.shape[0]}")
    return W


def rates_from_gains(G: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-user rates (bits/use) from the gain matrix G[l, j] = h_l w_j."""
    P = np.abs(G) ** 2
    signal = np.diag(P)
    interference = P.sum(axis=1) - signal
    return np.log2(1.0 + signal / (sigma2 + interference))


def all_rates(cs: ChannelSet, psi, W, sigma2: float) -> np.ndarray:
    W = _as_columns(W, cs.K)
    return rates_from_gains(effective_channels(cs, psi) @ W, sigma2)


def user_rate(cs: ChannelSet, psi, W, sigma2: float, l: int) -> float:
    """log2(1 + |h_l w_l|^2 / (sigma2 + sum_{j != l} |h_l w_j|^2)); interference is noise."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return float(all_rates(cs, psi, W, sigma2)[l])


def user_ee(rate: float, w_l, P_c: float, beta: float) -> float:
    denom = P_c + beta * float(np.vdot(w_l, w_l).real)
    if not denom > 0:
        raise ValueError(f"non-positive EE denominator {denom}")
    return rate / denom


def all_ees(rates: np.ndarray, W: np.ndarray, P_c: float, beta: float) -> np.ndarray:
    denom = P_c + beta * np.sum(np.abs(W) ** 2, axis=0)
    if np.any(denom <= 0):
        raise ValueError("non-positive EE denominator")
    return rates / denom


def min_ee(cs: ChannelSet, psi, W, s: Scenario) -> float:
    W = _as_columns(W, cs.K)
    rates = rates_from_gains(effective_channels(cs, psi) @ W, s.sigma2)
    return float(np.min(all_ees(rates, W, derived_static_power(s), s.beta)))


def evaluate(cs: ChannelSet, psi, W, s: Scenario, trace=None) -> EEReport:
    W = _as_columns(W, cs.K)
    rates = rates_from_gains(effective_channels(cs, psi) @ W, s.sigma2)
    ees = all_ees(rates, W, derived_static_power(s), s.beta)
    R = incident_covariance(cs.F, W)
    return EEReport(
        rates=rates,
        ees=ees,
        min_ee=float(np.min(ees)),
        min_rate_slack=float(np.min(rates - s.thresholds)),
        power_used=float(np.sum(np.abs(W) ** 2)),
        gp_slack=gp_slack(R, psi),
        trace=list(trace or []),
    )
