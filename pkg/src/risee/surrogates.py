"""Concave minorizers of the user rates and the linearized unit-modulus constraint.

For a user with desired term ``s = h w_l`` and total received power
``T = sigma2 + sum_j |h w_j|^2`` (so the interference-plus-noise is
``D = T - |s|^2``), the rate in nats is bounded below by

    ln(1 + a) - a + 2 Re{conj(s0) s} / D0 - a T / T0,   a = |s0|^2 / D0,

where the 0-subscripted values belong to the expansion point. The bound is
tight there, matches the gradient there, and is concave in anything that
enters ``s`` linearly and ``T`` as a convex quadratic. Both blocks (beamformers
with the RIS fixed, RIS with the beamformers fixed) have that structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, effective_channels
from .metrics import rates_from_gains
from .quadratic import QuadraticStack, complex_to_real_coeffs, stack_real, sum_abs2, unstack_real

LN2 = np.log(2.0)


@dataclass(frozen=True)
class RateBound:
    """Expansion-point constants shared by every user's minorizer."""

    s0: np.ndarray  # desired amplitude h_l w_l
    D0: np.ndarray  # sigma2 + interference
    T0: np.ndarray  # D0 + |s0|^2
    sinr: np.ndarray  # a_l (b_l for the RIS block)
    rate0: np.ndarray  # bits
    sigma2: float

    @classmethod
    def at(cls, G: np.ndarray, sigma2: float) -> "RateBound":
        P = np.abs(G) ** 2
        s0 = np.diag(G).copy()
        D0 = sigma2 + P.sum(axis=1) - np.abs(s0) ** 2
        sinr = np.abs(s0) ** 2 / D0
        return cls(s0, D0, D0 + np.abs(s0) ** 2, sinr, rates_from_gains(G, sigma2), sigma2)

    def evaluate(self, G: np.ndarray) -> np.ndarray:
        """Bound values (bits) given the gain matrix G[l, j] at the new point."""
        s = np.diag(G)
        T = self.sigma2 + np.sum(np.abs(G) ** 2, axis=1)
        nats = (np.log1p(self.sinr) - self.sinr
                + 2.0 * np.real(np.conj(self.s0) * s) / self.D0
                - self.sinr * T / self.T0)
        return nats / LN2

    def quadratics(self, E: np.ndarray, E0: np.ndarray) -> QuadraticStack:
        """Bounds as concave quadratics when G[l, j] = E[l, j] @ x + E0[l, j], x real."""
        L = E.shape[0]
        idx = np.arange(L)
        Q, q, q0 = sum_abs2(E, E0)
        coef = self.sinr / self.T0
        lin = 2.0 / self.D0
        b_sig = lin[:, None] * np.real(np.conj(self.s0)[:, None] * E[idx, idx])
        c_sig = lin * np.real(np.conj(self.s0) * E0[idx, idx])
        A = coef[:, None, None] * Q
        b = b_sig - coef[:, None] * q
        c = np.log1p(self.sinr) - self.sinr + c_sig - coef * (q0 + self.sigma2)
        return QuadraticStack(A / LN2, b / LN2, c / LN2)


# --- beamformer block -----------------------------------------------------------

def beams_to_real(W: np.ndarray) -> np.ndarray:
    """Real coordinates x = [Re u, Im u] with u the stacked columns w_1, ..., w_L."""
    return stack_real(np.asarray(W).T.ravel())


def real_to_beams(x: np.ndarray, K: int, L: int) -> np.ndarray:
    return unstack_real(x).reshape(L, K).T


@dataclass(frozen=True)
class BeamSurrogate:
    H: np.ndarray  # (L, K) effective channels at the fixed RIS
    W_prev: np.ndarray  # (K, L) expansion point
    bound: RateBound

    @property
    def K(self) -> int:
        return self.H.shape[1]

    @property
    def L(self) -> int:
        return self.H.shape[0]

    @property
    def sigma2(self) -> float:
        return self.bound.sigma2

    @property
    def a(self) -> np.ndarray:
        return self.bound.sinr

    def value(self, W: np.ndarray) -> np.ndarray:
        return self.bound.evaluate(self.H @ W)

    def true_rates(self, W: np.ndarray) -> np.ndarray:
        return rates_from_gains(self.H @ W, self.sigma2)

    def gradient(self, W: np.ndarray) -> np.ndarray:
        """d(bound_l)/d Re W + 1j d(bound_l)/d Im W, shape (L, K, L)."""
        G = self.H @ W
        bd = self.bound
        Hc = self.H.conj()
        grad = -(2.0 * (bd.sinr / bd.T0))[:, None, None] * G[:, None, :] * Hc[:, :, None]
        idx = np.arange(self.L)
        grad[idx, :, idx] += (2.0 * bd.s0 / bd.D0)[:, None] * Hc
        return grad / LN2

    def coefficients(self):
        """G[l, j] = E[l, j] @ x with x = beams_to_real(W)."""
        K, L = self.K, self.L
        C = np.zeros((L, L, K * L), dtype=complex)
        for j in range(L):
            C[:, j, j * K:(j + 1) * K] = self.H
        return complex_to_real_coeffs(C), np.zeros((L, L), dtype=complex)

    def quadratics(self) -> QuadraticStack:
        return self.bound.quadratics(*self.coefficients())


def build_beam_surrogate(cs: ChannelSet, psi_prev, w_prev, sigma2: float) -> BeamSurrogate:
    H = effective_channels(cs, psi_prev)
    W_prev = np.array(w_prev, dtype=complex).reshape(cs.K, -1)
    return BeamSurrogate(H, W_prev, RateBound.at(H @ W_prev, sigma2))


# --- RIS block --------------------------------------------------------------------

@dataclass(frozen=True)
class PsiSurrogate:
    f: np.ndarray  # (L, N)
    F: np.ndarray  # (N, K)
    g: np.ndarray  # (L, K)
    W: np.ndarray  # (K, L) fixed beamformers
    psi_prev: np.ndarray
    bound: RateBound

    @property
    def sigma2(self) -> float:
        return self.bound.sigma2

    @property
    def b(self) -> np.ndarray:
        return self.bound.sinr

    @property
    def V(self) -> np.ndarray:
        """Incident signal directions F w_l as columns."""
        return self.F @ self.W

    def gains(self, psi) -> np.ndarray:
        return (self.f @ psi @ self.F + self.g) @ self.W

    def value(self, psi) -> np.ndarray:
        return self.bound.evaluate(self.gains(psi))

    def true_rates(self, psi) -> np.ndarray:
        return rates_from_gains(self.gains(psi), self.sigma2)

    def gradient(self, psi) -> np.ndarray:
        """d(bound_l)/d Re psi + 1j d(bound_l)/d Im psi, shape (L, N, N)."""
        G = self.gains(psi)
        bd = self.bound
        V = self.V
        fc, Vc = self.f.conj(), V.conj()
        # sum_j G[l, j] conj(f_l) conj(v_j)^T
        mixed = np.einsum("lj,ln,mj->lnm", G, fc, Vc)
        grad = -(2.0 * bd.sinr / bd.T0)[:, None, None] * mixed
        grad += (2.0 * bd.s0 / bd.D0)[:, None, None] * np.einsum("ln,ml->lnm", fc, Vc)
        return grad / LN2

    def coefficients(self, basis: np.ndarray, offset: np.ndarray):
        """G[l, j] = E[l, j] @ x + E0[l, j] when psi(x) = offset + sum_k x_k basis[k]."""
        BV = basis @ self.V  # (n, N, L)
        E = np.moveaxis(self.f @ BV, 0, -1)  # (L, L, n)
        return E, self.gains(offset)

    def quadratics(self, basis: np.ndarray, offset: np.ndarray) -> QuadraticStack:
        return self.bound.quadratics(*self.coefficients(basis, offset))


def build_psi_surrogate(cs: ChannelSet, psi_prev, w_curr, sigma2: float) -> PsiSurrogate:
    W = np.array(w_curr, dtype=complex).reshape(cs.K, -1)
    psi_prev = np.array(psi_prev, dtype=complex)
    G = (cs.f @ psi_prev @ cs.F + cs.g) @ W
    return PsiSurrogate(cs.f, cs.F, cs.g, W, psi_prev, RateBound.at(G, sigma2))


# --- unit-modulus relaxation ------------------------------------------------------

@dataclass(frozen=True)
class LinearizedModulus:
    """Convex restriction of |psi_n| = 1 around a previous diagonal.

    ``|psi_n|^2 >= 1`` is replaced by its tangent minorant
    ``2 Re{conj(p_n) psi_n} - |p_n|^2 >= 1 - epsilon`` and kept together
    with ``|psi_n|^2 <= 1``.
    """

    prev: np.ndarray
    epsilon: float

    @property
    def rhs(self) -> float:
        return 1.0 - self.epsilon

    def lhs(self, psi_diag) -> np.ndarray:
        p = self.prev
        return 2.0 * np.real(np.conj(p) * psi_diag) - np.abs(p) ** 2

    def printed_lhs(self, psi_diag) -> np.ndarray:
        """The opposite-sign expansion |p|^2 - 2 Re{conj(p)(psi - p)}, kept for comparison."""
        p = self.prev
        return np.abs(p) ** 2 - 2.0 * np.real(np.conj(p) * (psi_diag - p))

    def satisfied(self, psi_diag, tol: float = 0.0) -> np.ndarray:
        return (self.lhs(psi_diag) >= self.rhs - tol) & (np.abs(psi_diag) ** 2 <= 1.0 + tol)

    def stack(self) -> QuadraticStack:
        """Both constraint families as concave functions >= 0 of x = [Re psi, Im psi]."""
        p = self.prev
        N = p.size
        A = np.zeros((2 * N, 2 * N, 2 * N))
        b = np.zeros((2 * N, 2 * N))
        c = np.zeros(2 * N)
        n = np.arange(N)
        A[n, n, n] = 1.0
        A[n, n + N, n + N] = 1.0
        c[:N] = 1.0
        b[N + n, n] = 2.0 * p.real
        b[N + n, N + n] = 2.0 * p.imag
        c[N:] = -np.abs(p) ** 2 - self.rhs
        return QuadraticStack(A, b, c)


def lpd_linearized_constraint(psi_prev_diag, epsilon: float) -> LinearizedModulus:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return LinearizedModulus(np.asarray(psi_prev_diag, dtype=complex).copy(), float(epsilon))
