"""Convex subproblem solvers.

``solve_maxmin`` maximizes the minimum of concave quadratics over an
intersection of concave-quadratic superlevel sets. It uses the epigraph
form (maximize t subject to f_l(x) >= t, g_i(x) >= 0) and a log-barrier
path-following method with exact damped Newton steps.

On top of it sit the two alternating-optimization steps: the generalized
Dinkelbach iteration for the beamformers and the single max-min solve for
the RIS coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.optimize

from .config import Architecture, Scenario, derived_static_power
from .quadratic import QuadraticStack, complex_to_real_coeffs, stack_real, sum_abs2
from .surrogates import BeamSurrogate, PsiSurrogate, beams_to_real, lpd_linearized_constraint, real_to_beams

log = logging.getLogger(__name__)

CENTERING_TOL = 0.1  # half squared Newton decrement accepted as "centered" before primal-dual steps
CENTERING_STEPS = 20  # Newton steps allowed for that centering before the weight is lowered


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration-cap"
    INFEASIBLE_START = "infeasible-start"


@dataclass(frozen=True)
class SolverTolerances:
    feas_tol: float = 1e-8
    stat_tol: float = 1e-6
    mu0: float = 1.0
    mu_factor: float = 10.0
    newton_tol: float = 1e-10
    max_newton: int = 80  # per barrier stage
    max_stages: int = 40
    method: str = "primal-dual"  # or "barrier"

    @classmethod
    def from_scenario(cls, s: Scenario) -> "SolverTolerances":
        return cls(feas_tol=s.feas_tol, stat_tol=s.stat_tol)


@dataclass(frozen=True)
class MaxMinProblem:
    objectives: QuadraticStack
    constraints: QuadraticStack

    def __post_init__(self):
        if self.objectives.size < 1:
            raise ValueError("need at least one objective")
        if self.constraints.dim != self.objectives.dim:
            raise ValueError("objective and constraint dimensions differ")

    @property
    def dim(self) -> int:
        return self.objectives.dim


@dataclass
class SolveDiagnostics:
    iterations: int
    value: float
    violation: float
    residual: float
    status: SolveStatus
    stage_values: list = field(default_factory=list)  # epigraph t at each centered point


def _strict_start(problem: MaxMinProblem, x0, anchor):
    if anchor is None:
        thetas = (1.0,)
    else:
        thetas = (1.0, 0.999, 0.99, 0.9, 0.5, 0.0)
    for theta in thetas:
        x = x0 if anchor is None else anchor + theta * (x0 - anchor)
        g = problem.constraints.value(x)
        margin = 1e-12 * (1.0 + np.abs(problem.constraints.c))
        if g.size == 0 or np.all(g > margin):
            return x
    return None


class _Epigraph:
    """All functions c_k(z) >= 0 of z = (x, t): f_l(x) - t for objectives, g_i(x) for constraints.

    Diagonal curvature matrices (box-like constraints) are kept as vectors.
    """

    def __init__(self, problem: MaxMinProblem):
        obj, con = problem.objectives, problem.constraints
        self.n = n = problem.dim
        self.p = obj.size
        self.m = obj.size + con.size
        A = np.concatenate([obj.A, con.A])
        self.b = np.concatenate([obj.b, con.b])
        self.c = np.concatenate([obj.c, con.c])
        diag = np.einsum("kii->ki", A)
        off = np.abs(A).sum(axis=(1, 2)) - np.abs(diag).sum(axis=1)
        curved = np.abs(A).sum(axis=(1, 2)) > 0
        self.dense = np.flatnonzero(curved & (off > 0))
        self.diagonal = np.flatnonzero(curved & (off == 0))
        self.A_dense = A[self.dense].reshape(self.dense.size * n, n)
        self.A_dense_sq = A[self.dense].reshape(self.dense.size, n * n)
        self.D = diag[self.diagonal]

    def apply(self, x):
        """Rows A_k x, shape (m, n)."""
        out = np.zeros((self.m, self.n))
        if self.dense.size:
            out[self.dense] = (self.A_dense @ x).reshape(self.dense.size, self.n)
        if self.diagonal.size:
            out[self.diagonal] = self.D * x
        return out

    def values(self, z):
        x = z[: self.n]
        Ax = self.apply(x)
        u = self.c + self.b @ x - Ax @ x
        u[: self.p] -= z[self.n]
        return u, Ax

    def jacobian(self, Ax):
        J = np.empty((self.m, self.n + 1))
        J[:, : self.n] = self.b - 2.0 * Ax
        J[: self.p, self.n] = -1.0
        J[self.p:, self.n] = 0.0
        return J

    def curvature(self, weights):
        """sum_k weights_k * 2 A_k, the x-block of minus the weighted Hessian."""
        out = np.zeros((self.n, self.n))
        if self.dense.size:
            out += (weights[self.dense] @ self.A_dense_sq).reshape(self.n, self.n)
        if self.diagonal.size:
            out[np.diag_indices(self.n)] += weights[self.diagonal] @ self.D
        return 2.0 * out


def _newton_solve(H, rhs):
    try:
        cf = scipy.linalg.cho_factor(H, check_finite=False)
        return scipy.linalg.cho_solve(cf, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        ridge = 1e-12 * max(1.0, np.trace(H) / H.shape[0])
        return np.linalg.lstsq(H + ridge * np.eye(H.shape[0]), rhs, rcond=None)[0]


def _initial_weight(ep: _Epigraph, z) -> float:
    """First centering weight for the primal-dual method: m / mu is a gap of 0.1 (1 + |t|)."""
    return ep.m / (0.1 * (1.0 + abs(float(z[ep.n]))))


def _center(ep: _Epigraph, z, mu: float, newton_tol: float, max_newton: int, stat_tol: float = 0.0):
    """Damped Newton on mu t + sum log c_k(z). Returns (z, iterations, centered, gradient norm).

    With ``stat_tol`` > 0 the dual residual |grad| / mu must also drop below it.
    """
    n = ep.n
    et = np.zeros(n + 1)
    et[n] = 1.0
    grad_norm = np.inf
    for it in range(1, max_newton + 1):
        u, Ax = ep.values(z)
        J = ep.jacobian(Ax)
        inv = 1.0 / u
        grad = mu * et + J.T @ inv
        H = (J.T * inv**2) @ J
        H[:n, :n] += ep.curvature(inv)
        d = _newton_solve(H, grad)
        lam2 = float(grad @ d)
        grad_norm = float(np.linalg.norm(grad))
        if lam2 / 2.0 <= newton_tol and (stat_tol <= 0 or grad_norm / mu <= stat_tol):
            return z, it, True, grad_norm
        Adx = ep.apply(d[:n])
        slope, curv = J @ d, Adx @ d[:n]
        step = min(1.0, 0.99 * _max_step(u, slope, curv))
        u_new = u + step * slope - step * step * curv
        base = mu * z[n] + np.sum(np.log(u))
        while (mu * (z[n] + step * d[n]) + np.sum(np.log(u_new)) < base + 0.01 * step * lam2
               and step > 1e-14):
            step *= 0.5
            u_new = u + step * slope - step * step * curv
        while step > 1e-14 and np.min(ep.values(z + step * d)[0]) <= 0:
            step *= 0.5  # rounding right at the boundary
        if step <= 1e-14:
            # no representable progress: centered as far as rounding allows if the decrement is tiny
            return z, it, lam2 / 2.0 <= newton_tol, grad_norm
        z = z + step * d
        if log.isEnabledFor(logging.DEBUG):
            log.debug("barrier newton %d t %.12g step %.3g decrement %.3g", it, z[n], step, lam2)
    return z, max_newton, False, grad_norm


def _barrier(ep: _Epigraph, z, tols: SolverTolerances):
    """Log-barrier path following: center, then mu *= factor, until m / mu <= stat_tol."""
    m = ep.m
    mu = tols.mu0
    total = 0
    capped = False
    stage_values = []
    grad_norm = np.inf
    for _stage in range(tols.max_stages):
        last = m / mu <= tols.stat_tol
        # on the last stage also insist on a small dual residual grad / mu
        z, it, centered, grad_norm = _center(ep, z, mu, tols.newton_tol, tols.max_newton,
                                             tols.stat_tol if last else 0.0)
        total += it
        capped = capped or not centered
        stage_values.append(float(z[ep.n]))
        if last:
            break
        mu *= tols.mu_factor
    else:
        capped = True
    residual = max(m / mu, grad_norm / mu)
    return z, total, capped, residual, stage_values


def _max_step(u, slope, curv):
    """Largest s with u + s slope - s^2 curv > 0 for every entry (curv >= 0)."""
    den = -slope + np.sqrt(slope * slope + 4.0 * np.maximum(curv, 0.0) * u)
    pos = den > 0
    if not np.any(pos):
        return np.inf
    return float(np.min(2.0 * u[pos] / den[pos]))


def _center_t(ep: _Epigraph, z, mu: float):
    """Move the epigraph variable to the barrier center along t for the current x."""
    u, _ = ep.values(z)
    f = u[: ep.p] + z[ep.n]
    fmin, p = float(np.min(f)), ep.p

    def phi(t):
        return float(np.sum(1.0 / (f - t))) - mu

    lo, hi = fmin - p / mu, fmin - 1.0 / mu
    z = z.copy()
    z[ep.n] = lo if lo == hi else scipy.optimize.brentq(phi, lo, hi, xtol=1e-14 * (1 + abs(fmin)))
    return z


def _primal_dual(ep: _Epigraph, z, tols: SolverTolerances):
    """Primal-dual interior point on the epigraph form (surrogate-gap driven).

    Starts from a (loosely) centered barrier point, whose multipliers are
    nearly dual feasible. When steps collapse the iterate is re-centered on
    the barrier path at the current gap.
    """
    n, m = ep.n, ep.m
    mu = _initial_weight(ep, z)
    total = 0
    for _ in range(8):
        # a cold start can sit far below the target gap; settle for a smaller weight then
        z = _center_t(ep, z, mu)
        z, it, centered, _ = _center(ep, z, mu, CENTERING_TOL, CENTERING_STEPS)
        total += it
        if centered:
            break
        mu /= tols.mu_factor
    u, Ax = ep.values(z)
    lam = 1.0 / (mu * u)
    stage_values = []
    residual = np.inf
    capped = True
    et = np.zeros(n + 1)
    et[n] = 1.0
    J = ep.jacobian(Ax)
    r_dual = -et - J.T @ lam  # gradient of -t - sum lam c
    recenters = 0
    for _ in range(tols.max_newton * tols.max_stages):
        gap = float(u @ lam)
        rd = float(np.linalg.norm(r_dual))
        residual = max(gap, rd)
        stage_values.append(float(z[n]))
        if gap <= tols.stat_tol and rd <= tols.stat_tol:
            capped = False
            break
        tau = tols.mu_factor * m / gap
        H = (J.T * (lam / u)) @ J
        H[:n, :n] += ep.curvature(lam)
        rhs = et + (1.0 / tau) * (J.T @ (1.0 / u))
        dz = _newton_solve(H, rhs)
        slope = J @ dz
        dlam = (1.0 / tau - lam * slope) / u - lam
        # every c_k is quadratic along the step: c_k(z + s dz) = u + s slope - s^2 curv
        Adx = ep.apply(dz[:n])
        curv = Adx @ dz[:n]
        neg = dlam < 0
        s_dual = float(np.min(-lam[neg] / dlam[neg])) if np.any(neg) else np.inf
        step = min(1.0, 0.99 * s_dual, 0.99 * _max_step(u, slope, curv))
        r_cent = lam * u - 1.0 / tau
        norm0 = np.sqrt(rd**2 + float(r_cent @ r_cent))
        while True:
            lam_new = lam + step * dlam
            z_new = z + step * dz
            u_new, Ax_new = ep.values(z_new)
            J_new = ep.jacobian(Ax_new)
            r_dual_new = -et - J_new.T @ lam_new
            rc = lam_new * u_new - 1.0 / tau
            if (np.min(u_new) > 0
                    and np.sqrt(float(r_dual_new @ r_dual_new) + float(rc @ rc)) <= (1 - 0.01 * step) * norm0):
                break
            step *= 0.5
            if step < 1e-14:
                break
        if step < 1e-14:
            break
        z, lam, u, Ax, J, r_dual = z_new, lam_new, u_new, Ax_new, J_new, r_dual_new
        total += 1
        if log.isEnabledFor(logging.DEBUG):
            log.debug("pd iteration %d t %.12g gap %.3g step %.3g", total, z[n], gap, step)
        if step < 0.05:
            # jammed near the boundary: re-center on the barrier path at the current gap
            mu = m / max(gap, 1e-300)
            z, extra, _, _ = _center(ep, z, mu, CENTERING_TOL, tols.max_newton)
            total += extra
            recenters += 1
            u, Ax = ep.values(z)
            lam = 1.0 / (mu * u)
            J = ep.jacobian(Ax)
            r_dual = -et - J.T @ lam
            if recenters > tols.max_stages:
                break
    return z, total, capped, residual, stage_values


def solve_maxmin(problem: MaxMinProblem, x0, tols: SolverTolerances | None = None, anchor=None,
                 method: str | None = None):
    """Maximize min_l f_l(x) subject to g_i(x) >= 0.

    ``x0`` must be feasible; if it is not strictly feasible the start is
    pulled toward ``anchor`` until it is. The returned point is never worse
    than a feasible ``x0``.
    """
    tols = tols or SolverTolerances()
    method = method or tols.method
    obj, con = problem.objectives, problem.constraints
    x0 = np.asarray(x0, dtype=float)
    q = con.size

    f0 = obj.value(x0)
    g0 = con.value(x0)
    x0_feasible = q == 0 or np.min(g0) >= -tols.feas_tol
    xs = _strict_start(problem, x0, None if anchor is None else np.asarray(anchor, dtype=float))
    if xs is None:
        viol = float(max(0.0, -np.min(g0))) if q else 0.0
        return x0.copy(), SolveDiagnostics(0, float(np.min(f0)), viol, np.inf, SolveStatus.INFEASIBLE_START)

    ep = _Epigraph(problem)
    fmin = float(np.min(obj.value(xs)))
    z = np.append(xs, fmin - 0.1 * max(abs(fmin), 1e-6))
    if method == "barrier":
        z, total, capped, residual, stages = _barrier(ep, z, tols)
    elif method == "primal-dual":
        z, total, capped, residual, stages = _primal_dual(ep, z, tols)
    else:
        raise ValueError(f"unknown method {method!r}")

    x = z[: ep.n]
    value = float(np.min(obj.value(x)))
    violation = float(max(0.0, -np.min(con.value(x)))) if q else 0.0
    converged = (not capped) and violation <= tols.feas_tol and residual <= tols.stat_tol
    status = SolveStatus.CONVERGED if converged else SolveStatus.ITERATION_CAP
    if x0_feasible and value < float(np.min(f0)):
        x, value = x0.copy(), float(np.min(f0))
        violation = float(max(0.0, -np.min(g0))) if q else 0.0
    return x.copy(), SolveDiagnostics(total, value, violation, residual, status, stages)


# --- beamformer step ------------------------------------------------------------------

@dataclass
class BeamStepInfo:
    etas: list
    certificate: float  # optimal value of the last parametric problem
    iterations: int
    status: SolveStatus
    solves: list = field(default_factory=list)


def _power_selectors(K: int, L: int) -> np.ndarray:
    """E[l] with x @ E[l] @ x = ||w_l||^2 in the real beam coordinates."""
    n = 2 * K * L
    E = np.zeros((L, n, n))
    for l in range(L):
        idx = np.r_[l * K:(l + 1) * K, K * L + l * K:K * L + (l + 1) * K]
        E[l, idx, idx] = 1.0
    return E


def gp_beam_restriction(F: np.ndarray, psi: np.ndarray, W_prev: np.ndarray) -> QuadraticStack | None:
    """Convex inner approximation, in the beamformers, of the global passivity constraint.

    The constraint reads sum_l w_l^H M w_l <= 0 with M = F^H (psi^H psi - I) F.
    Splitting M = M+ - M- into its positive and negative eigen-parts and replacing
    the convex term w^H M- w by its tangent at ``W_prev`` gives a convex
    constraint that implies the original one and is tight at ``W_prev``.
    Returns None when M has no positive eigenvalue, where every w satisfies it.
    """
    K, L = W_prev.shape
    FF = F.conj().T @ F
    M = F.conj().T @ (psi.conj().T @ psi) @ F - FF
    lam, U = np.linalg.eigh(0.5 * (M + M.conj().T))
    if lam[-1] <= 1e-12 * max(1.0, float(np.trace(FF).real)):
        return None
    pos, neg = np.maximum(lam, 0.0), np.maximum(-lam, 0.0)
    B = np.sqrt(pos)[:, None] * U.conj().T  # M+ = B^H B
    M_neg = (U * neg) @ U.conj().T
    blk = np.zeros((L * K, K * L), dtype=complex)
    for l in range(L):
        blk[l * K:(l + 1) * K, l * K:(l + 1) * K] = B
    Q, qv, _ = sum_abs2(complex_to_real_coeffs(blk), np.zeros(L * K, dtype=complex))
    G = M_neg @ W_prev
    lin_c = G.T.ravel()
    # 2 Re{(M- w_p)^H w} as a real linear form
    b_lin = 2.0 * np.concatenate([lin_c.real, lin_c.imag])
    const = -float(np.sum(np.conj(W_prev) * G).real)
    return QuadraticStack(Q[None], (b_lin - qv)[None], np.array([const]))


def dinkelbach_beam_step(surrogate: BeamSurrogate, scenario: Scenario, w_start,
                         extra_constraints: QuadraticStack | None = None,
                         tols: SolverTolerances | None = None, arch: Architecture | None = None):
    """Generalized Dinkelbach iteration on the surrogate max-min EE problem.

    Returns ``(W, eta, info)``; ``eta`` is the surrogate min-EE at ``W``.
    """
    tols = tols or SolverTolerances.from_scenario(scenario)
    K, L = surrogate.K, surrogate.L
    n = 2 * K * L
    P_c = derived_static_power(scenario, arch)
    beta = scenario.beta
    rates = surrogate.quadratics()
    E = _power_selectors(K, L)

    cons = QuadraticStack(np.eye(n)[None], np.zeros((1, n)), np.array([scenario.P]))
    r_th = scenario.thresholds
    active = np.flatnonzero(r_th > 0)
    if active.size:
        sub = QuadraticStack(rates.A[active], rates.b[active], rates.c[active] - r_th[active])
        cons = cons + sub
    if extra_constraints is not None and extra_constraints.size:
        cons = cons + extra_constraints

    def ratios(x):
        den = P_c + beta * np.einsum("i,lij,j->l", x, E, x)
        return rates.value(x) / den

    x = beams_to_real(np.asarray(w_start, dtype=complex).reshape(K, L))
    eta = float(np.min(ratios(x)))
    etas = [eta]
    certificate = np.inf
    status = SolveStatus.CONVERGED
    solves = []
    it = 0
    for it in range(1, scenario.gda_max_iter + 1):
        obj = QuadraticStack(rates.A + (eta * beta) * E, rates.b, rates.c - eta * P_c)
        x_new, diag = solve_maxmin(MaxMinProblem(obj, cons), x, tols, anchor=np.zeros(n))
        solves.append(diag)
        if diag.status is SolveStatus.INFEASIBLE_START:
            status = SolveStatus.INFEASIBLE_START
            break
        x = x_new
        certificate = float(np.min(obj.value(x)))
        eta_new = float(np.min(ratios(x)))
        etas.append(eta_new)
        if certificate <= scenario.gda_tol:
            eta = eta_new
            break
        eta = eta_new
    else:
        status = SolveStatus.ITERATION_CAP
    return real_to_beams(x, K, L), eta, BeamStepInfo(etas, certificate, it, status, solves)


# --- RIS step ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsiParam:
    """Affine real parametrization psi(x) = offset + sum_k x_k basis[k]."""

    basis: np.ndarray  # (n, N, N) complex
    offset: np.ndarray
    x0: np.ndarray
    symmetric: bool = False

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def psi(self, x) -> np.ndarray:
        out = self.offset + np.tensordot(x, self.basis, axes=1)
        if self.symmetric:
            out = 0.5 * (out + out.T)
        return out


def diagonal_param(psi_start) -> PsiParam:
    d = np.diag(psi_start).astype(complex)
    N = d.size
    basis = np.zeros((2 * N, N, N), dtype=complex)
    n = np.arange(N)
    basis[n, n, n] = 1.0
    basis[N + n, n, n] = 1j
    return PsiParam(basis, np.zeros((N, N), dtype=complex), stack_real(d))


def symmetric_full_param(psi_start) -> PsiParam:
    """Every upper-triangular entry of a symmetric psi as a free complex variable."""
    psi_start = np.asarray(psi_start, dtype=complex)
    N = psi_start.shape[0]
    iu = np.triu_indices(N)
    m = iu[0].size
    basis = np.zeros((2 * m, N, N), dtype=complex)
    for k, (i, j) in enumerate(zip(*iu)):
        basis[k, i, j] = basis[k, j, i] = 1.0
        basis[m + k, i, j] = basis[m + k, j, i] = 1j
    vals = psi_start[iu]
    return PsiParam(basis, np.zeros((N, N), dtype=complex), stack_real(vals), symmetric=True)


def _orth(M: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if M.size == 0:
        return M[:, :0]
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return U[:, :0]
    return U[:, : int(np.sum(s > rtol * s[0]))]


def symmetric_reduced_param(psi_start, V: np.ndarray, f: np.ndarray) -> PsiParam:
    """Symmetric updates of psi restricted to the directions the subproblem can see.

    The subproblem depends on psi only through psi @ V, i.e. through psi @ U
    with U an orthonormal basis of range(V). A symmetric psi can realize any
    psi @ U whose block U^T psi U is symmetric, and of the rest only the part
    visible to the users (span of the conjugated f_l, outside range(conj U))
    changes the rates; the remainder only consumes passivity budget and is
    removed from the offset. What is left is a small symmetric block S and a
    block X with q <= L rows.
    """
    psi_start = np.asarray(psi_start, dtype=complex)
    N = psi_start.shape[0]
    U = _orth(V)
    Uc = U.conj()
    perp = np.eye(N) - Uc @ U.T  # projector onto range(conj U)^perp
    Wf = _orth(perp @ f.conj().T)
    r, qd = U.shape[1], Wf.shape[1]

    Y = psi_start @ U
    Yperp = perp @ Y
    J = Yperp - Wf @ (Wf.conj().T @ Yperp)
    offset = psi_start - (Uc @ J.T + J @ U.conj().T)
    offset = 0.5 * (offset + offset.T)

    mats = []
    for a in range(r):
        for b in range(a, r):
            S = np.zeros((r, r), dtype=complex)
            S[a, b] = S[b, a] = 1.0
            mats.append(Uc @ S @ U.conj().T)
    for a in range(qd):
        for b in range(r):
            Z = np.outer(Wf[:, a], np.eye(r)[b])
            mats.append(Uc @ Z.T + Z @ U.conj().T)
    if mats:
        B = np.stack(mats)
        basis = np.concatenate([B, 1j * B])
    else:
        basis = np.zeros((0, N, N), dtype=complex)
    return PsiParam(basis, offset, np.zeros(basis.shape[0]), symmetric=True)


def gp_budget_stack(param: PsiParam, V: np.ndarray) -> QuadraticStack:
    """Tr(R) - sum_l ||psi(x) v_l||^2 >= 0, with R = V V^H."""
    BV = param.basis @ V  # (n, N, L)
    M = BV.reshape(param.dim, -1).T
    z0 = (param.offset @ V).ravel()
    Q, q, q0 = sum_abs2(M, z0)
    trace = float(np.sum(np.abs(V) ** 2))
    return QuadraticStack(Q[None], -q[None], np.array([trace - q0]))


@dataclass
class PsiStepInfo:
    diagnostics: SolveDiagnostics | None
    dim: int
    shrink: float = 1.0  # factor applied to the start to make it strictly passive


def solve_psi_step(surrogate: PsiSurrogate, arch: Architecture, R, scenario: Scenario, psi_start,
                   tols: SolverTolerances | None = None, param: PsiParam | None = None):
    """Maximize the weighted minimum of the RIS-block rate bounds over the architecture's set.

    With the beamformers fixed the EE denominators are constants, so one
    max-min solve suffices. LPD returns the relaxed (possibly non-unit-modulus)
    optimum; repairing it is left to the caller.
    """
    arch = Architecture.parse(arch)
    if arch is Architecture.NORIS:
        raise ValueError("no RIS to optimize")
    tols = tols or SolverTolerances.from_scenario(scenario)
    psi_start = np.array(psi_start, dtype=complex)
    W = surrogate.W
    V = surrogate.V
    trace = float(np.real(np.trace(R)))
    den = derived_static_power(scenario, arch) + scenario.beta * np.sum(np.abs(W) ** 2, axis=0)

    shrink = 1.0
    anchor = None
    if arch.globally_passive:
        if param is None:
            if arch is Architecture.GPD:
                psi_start = np.diag(np.diag(psi_start))
                param = diagonal_param(psi_start)
            else:
                param = symmetric_reduced_param(psi_start, V, surrogate.f)
        gp = gp_budget_stack(param, V)
        # pull the start strictly inside the passive set
        x0 = param.x0
        for _ in range(200):
            if trace <= 0 or gp.value(x0)[0] > 0:
                break
            shrink *= 0.99
            if arch is Architecture.GPD:
                x0 = shrink * param.x0
            else:
                param = PsiParam(param.basis, 0.99 * param.offset, 0.99 * param.x0, param.symmetric)
                x0 = param.x0
                gp = gp_budget_stack(param, V)
        cons = gp
    else:
        param = param or diagonal_param(psi_start)
        x0 = param.x0
        lin = lpd_linearized_constraint(np.diag(psi_start), scenario.lpd_epsilon)
        cons = lin.stack()
        anchor = (1.0 - scenario.lpd_epsilon / 4.0) * x0

    if param.dim == 0:
        return param.psi(x0), PsiStepInfo(None, 0, shrink)

    bounds = surrogate.quadratics(param.basis, param.offset)
    r_th = scenario.thresholds
    active = np.flatnonzero(r_th > 0)
    if active.size:
        cons = cons + QuadraticStack(bounds.A[active], bounds.b[active], bounds.c[active] - r_th[active])
    obj = bounds.scaled(1.0 / den)
    x, diag = solve_maxmin(MaxMinProblem(obj, cons), x0, tols, anchor=anchor)
    psi = param.psi(x)
    if arch.is_diagonal:
        psi = np.diag(np.diag(psi))
    return psi, PsiStepInfo(diag, param.dim, shrink)
