"""Feasibility sets of the three RIS architectures and their certification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Architecture

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class RisState:
    psi: np.ndarray
    arch: Architecture
    feas_tol: float = 1e-8

    def __post_init__(self):
        psi = np.array(self.psi, dtype=complex)
        if psi.ndim != 2 or psi.shape[0] != psi.shape[1]:
            raise ValueError("psi must be a square matrix")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "arch", Architecture.parse(self.arch))


@dataclass(frozen=True)
class FeasibilityReport:
    passed: bool
    arch: Architecture
    worst: str  # name of the quantity that decided the verdict
    violation: float  # worst violated amount, 0 when passed
    measures: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def incident_covariance(F: np.ndarray, W: np.ndarray) -> np.ndarray:
    """R = sum_l (F w_l)(F w_l)^H, with beamformers as the columns of W."""
    F = np.asarray(F)
    W = np.asarray(W)
    if W.ndim == 1:
        W = W[:, None]
    if F.shape[1] != W.shape[0]:
        raise ValueError(f"F is {F.shape} but beamformers have length {W.shape[0]}")
    V = F @ W
    R = V @ V.conj().T
    return 0.5 * (R + R.conj().T)


def gp_slack(R: np.ndarray, psi: np.ndarray) -> float:
    """Tr(R (psi^H psi - I)); non-positive means globally passive."""
    R = np.asarray(R)
    psi = np.asarray(psi)
    return float(np.real(np.trace(R @ (psi.conj().T @ psi))) - np.real(np.trace(R)))


def certify(state: RisState, R: np.ndarray | None = None) -> FeasibilityReport:
    """Check ``state.psi`` against the feasibility set of its architecture.

    GP slacks are judged relative to Tr(R); with no incident power the
    passivity constraint is vacuous.
    """
    psi, arch, tol = state.psi, state.arch, state.feas_tol
    N = psi.shape[0]
    off = psi - np.diag(np.diag(psi))
    measures = {
        "offdiag_norm": float(np.linalg.norm(off)),
        "asymmetry": float(np.max(np.abs(psi - psi.T))) if N else 0.0,
        "modulus_dev": float(np.max(np.abs(np.abs(np.diag(psi)) - 1.0))) if N else 0.0,
    }
    checks = []  # (name, violated amount)
    if arch is Architecture.NORIS:
        checks.append(("nonzero_psi", float(np.linalg.norm(psi))))
    if arch.is_diagonal:
        checks.append(("offdiag_norm", measures["offdiag_norm"]))
    if arch is Architecture.LPD:
        checks.append(("modulus_dev", max(0.0, measures["modulus_dev"] - tol)))
    if arch is Architecture.GPBD:
        checks.append(("asymmetry", max(0.0, measures["asymmetry"] - SYMMETRY_TOL)))
    if arch.globally_passive:
        if R is None:
            raise ValueError("globally passive certification needs the incident covariance")
        slack = gp_slack(R, psi)
        trace = float(np.real(np.trace(R)))
        measures["gp_slack"] = slack
        measures["trace_R"] = trace
        checks.append(("gp_slack", max(0.0, slack - tol * trace) if trace > 0 else 0.0))
    elif R is not None:
        measures["gp_slack"] = gp_slack(R, psi)

    worst, violation = max(checks, key=lambda c: c[1]) if checks else ("none", 0.0)
    return FeasibilityReport(violation == 0.0, arch, worst, violation, measures)


def initial_psi(arch: Architecture, N: int) -> np.ndarray:
    """Identity for every RIS architecture (unit modulus, symmetric, zero GP slack); zero without RIS."""
    if Architecture.parse(arch) is Architecture.NORIS:
        return np.zeros((N, N), dtype=complex)
    return np.eye(N, dtype=complex)
