"""Alternating optimization of beamformers and RIS coefficients for max-min EE."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import ChannelSet, effective_channels
from .config import Architecture, Scenario
from .metrics import EEReport, evaluate, min_ee
from .ris import RisState, certify, incident_covariance, initial_psi
from .quadratic import QuadraticStack
from .solver import (MaxMinProblem, SolveStatus, SolverTolerances, dinkelbach_beam_step,
                     gp_beam_restriction, solve_maxmin, solve_psi_step)
from .surrogates import beams_to_real, build_beam_surrogate, build_psi_surrogate, real_to_beams

log = logging.getLogger(__name__)


class AoStatus(str, Enum):
    RUNNING = "running"
    CONVERGED = "converged"
    CAP = "cap"
    INFEASIBLE = "infeasible"


class InfeasibleError(RuntimeError):
    """No beamformer meets the rate thresholds from the initial point."""


@dataclass
class TraceRecord:
    iteration: int
    min_ee: float
    ees: list
    eta: float
    gp_slack: float
    w_accepted: bool = True
    psi_accepted: bool = True

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class AoState:
    iteration: int
    W: np.ndarray
    ris: RisState
    history: list = field(default_factory=list)  # min-EE after each outer iteration
    trace: list = field(default_factory=list)  # TraceRecord per outer iteration
    status: AoStatus = AoStatus.RUNNING

    @property
    def psi(self) -> np.ndarray:
        return self.ris.psi


def is_feasible(cs: ChannelSet, psi, W, s: Scenario, arch: Architecture, tol: float) -> bool:
    """Independent check of every constraint of the original problem."""
    if np.sum(np.abs(W) ** 2) > s.P * (1 + tol):
        return False
    rep = certify(RisState(psi, arch, tol), incident_covariance(cs.F, W))
    if not rep.passed:
        return False
    rates = evaluate(cs, psi, W, s).rates
    return bool(np.all(rates >= s.thresholds - tol))


def _restore_rates(cs: ChannelSet, psi, W, s: Scenario, tols: SolverTolerances, max_iter: int = 100):
    """Minorize-maximize min_l (r_l - r_l^th) under the power budget until it turns positive."""
    K, L = W.shape
    n = 2 * K * L
    r_th = s.thresholds
    power = QuadraticStack(np.eye(n)[None], np.zeros((1, n)), np.array([s.P]))
    margin = 1e-6 * max(1.0, float(np.max(r_th)))
    best = -np.inf
    for _ in range(max_iter):
        rates = evaluate(cs, psi, W, s).rates
        gap = float(np.min(rates - r_th))
        if gap >= margin:
            return W
        if gap <= best + 1e-10:
            break
        best = gap
        sur = build_beam_surrogate(cs, psi, W, s.sigma2)
        obj = sur.quadratics().shifted(-r_th)
        x, _ = solve_maxmin(MaxMinProblem(obj, power), beams_to_real(W), tols, anchor=np.zeros(n))
        W = real_to_beams(x, K, L)
    raise InfeasibleError(f"rate thresholds unreachable (best min_l r_l - r_th = {best:.4g})")


def initialize(cs: ChannelSet, s: Scenario) -> AoState:
    """Identity RIS (zero without RIS) and equal-power matched filters."""
    arch = s.architecture
    psi = initial_psi(arch, cs.N)
    H = effective_channels(cs, psi)
    W = H.conj().T.copy()
    norms = np.linalg.norm(W, axis=0)
    norms[norms == 0] = 1.0
    W = W / norms * np.sqrt(s.P / cs.L)
    if np.any(s.thresholds > 0):
        W = _restore_rates(cs, psi, W, s, SolverTolerances.from_scenario(s))
    state = AoState(0, W, RisState(psi, arch, s.feas_tol))
    rep = evaluate(cs, psi, W, s)
    state.history.append(rep.min_ee)
    state.trace.append(TraceRecord(0, rep.min_ee, rep.ees.tolist(), np.nan, rep.gp_slack))
    return state


def lpd_repair(psi_relaxed, prev_state: RisState, cs: ChannelSet, W, s: Scenario) -> RisState:
    """Project the relaxed diagonal onto the unit circle; keep the previous RIS if that is better."""
    d = np.diag(np.asarray(psi_relaxed)).astype(complex)
    mag = np.abs(d)
    unit = np.where(mag < 1e-12, 1.0 + 0j, d / np.where(mag < 1e-12, 1.0, mag))
    candidate = RisState(np.diag(unit), Architecture.LPD, prev_state.feas_tol)
    if min_ee(cs, candidate.psi, W, s) >= min_ee(cs, prev_state.psi, W, s):
        return candidate
    return prev_state


def ao_step(cs: ChannelSet, s: Scenario, state: AoState, tols: SolverTolerances | None = None) -> AoState:
    """One outer iteration: beamformer step, then RIS step (with repair for LPD)."""
    tols = tols or SolverTolerances.from_scenario(s)
    arch = s.architecture
    psi, W = state.psi, state.W
    current = min_ee(cs, psi, W, s)
    eta = np.nan

    extra = gp_beam_restriction(cs.F, psi, W) if arch.globally_passive else None
    sur = build_beam_surrogate(cs, psi, W, s.sigma2)
    W_new, eta, info = dinkelbach_beam_step(sur, s, W, extra_constraints=extra, tols=tols)
    w_ok = info.status is not SolveStatus.INFEASIBLE_START
    if w_ok:
        cand = min_ee(cs, psi, W_new, s)
        w_ok = cand >= current and is_feasible(cs, psi, W_new, s, arch, s.feas_tol)
    if w_ok:
        W, current = W_new, cand

    psi_ok = False
    if arch is not Architecture.NORIS:
        R = incident_covariance(cs.F, W)
        psur = build_psi_surrogate(cs, psi, W, s.sigma2)
        psi_new, pinfo = solve_psi_step(psur, arch, R, s, psi, tols=tols)
        if pinfo.diagnostics is not None and pinfo.diagnostics.status is not SolveStatus.INFEASIBLE_START:
            if arch is Architecture.LPD:
                repaired = lpd_repair(psi_new, state.ris, cs, W, s)
                psi_new = repaired.psi
            cand = min_ee(cs, psi_new, W, s)
            if cand >= current and is_feasible(cs, psi_new, W, s, arch, s.feas_tol):
                psi, current, psi_ok = psi_new, cand, True

    state.W = W
    state.ris = RisState(psi, arch, s.feas_tol)
    state.iteration += 1
    rep = evaluate(cs, psi, W, s)
    state.history.append(rep.min_ee)
    state.trace.append(TraceRecord(state.iteration, rep.min_ee, rep.ees.tolist(), float(eta),
                                   rep.gp_slack, bool(w_ok), bool(psi_ok)))
    log.debug("AO %d: min EE %.10g (w %s, psi %s)", state.iteration, rep.min_ee, w_ok, psi_ok)
    return state


def ao_run(cs: ChannelSet, s: Scenario, max_iter: int | None = None) -> tuple[AoState, EEReport]:
    """Alternate until the relative min-EE gain drops below ``ao_tol`` or the cap is hit."""
    cap = s.ao_max_iter if max_iter is None else int(max_iter)
    tols = SolverTolerances.from_scenario(s)
    try:
        state = initialize(cs, s)
    except InfeasibleError:
        psi = initial_psi(s.architecture, cs.N)
        state = AoState(0, np.zeros((cs.K, cs.L), dtype=complex), RisState(psi, s.architecture, s.feas_tol),
                        status=AoStatus.INFEASIBLE)
        return state, evaluate(cs, psi, state.W, s)

    while state.iteration < cap:
        before = state.history[-1]
        ao_step(cs, s, state, tols)
        after = state.history[-1]
        if after - before < s.ao_tol * max(abs(before), 1e-300):
            state.status = AoStatus.CONVERGED
            break
    else:
        state.status = AoStatus.CAP
    report = evaluate(cs, state.psi, state.W, s, trace=[t.to_dict() for t in state.trace])
    return state, report
