"""Stacks of concave quadratics in a real variable.

Every surrogate objective and constraint in this package has the form

    f(x) = c + b @ x - x @ A @ x,    A symmetric PSD,

so a stack of them is stored as three arrays and evaluated in one shot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadraticStack:
    A: np.ndarray  # (m, n, n)
    b: np.ndarray  # (m, n)
    c: np.ndarray  # (m,)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if b.ndim == 1:
            b = b[None, :]
        if A.ndim == 2:
            A = A[None, :, :]
        m, n = b.shape
        if A.shape != (m, n, n) or c.shape != (m,):
            raise ValueError(f"inconsistent quadratic stack shapes {A.shape}, {b.shape}, {c.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def size(self) -> int:
        return self.b.shape[0]

    @property
    def dim(self) -> int:
        return self.b.shape[1]

    @classmethod
    def empty(cls, n: int) -> "QuadraticStack":
        return cls(np.zeros((0, n, n)), np.zeros((0, n)), np.zeros(0))

    @classmethod
    def affine(cls, b, c) -> "QuadraticStack":
        b = np.atleast_2d(np.asarray(b, dtype=float))
        return cls(np.zeros((b.shape[0], b.shape[1], b.shape[1])), b, np.atleast_1d(c))

    def value(self, x: np.ndarray) -> np.ndarray:
        Ax = self.A @ x
        return self.c + self.b @ x - Ax @ x

    def value_grad(self, x: np.ndarray):
        Ax = self.A @ x
        return self.c + self.b @ x - Ax @ x, self.b - 2.0 * Ax

    def __add__(self, other: "QuadraticStack") -> "QuadraticStack":
        """Concatenate two stacks (not a pointwise sum)."""
        return QuadraticStack(
            np.concatenate([self.A, other.A]),
            np.concatenate([self.b, other.b]),
            np.concatenate([self.c, other.c]),
        )

    def shifted(self, dc) -> "QuadraticStack":
        return QuadraticStack(self.A, self.b, self.c + dc)

    def scaled(self, s) -> "QuadraticStack":
        s = np.broadcast_to(np.asarray(s, dtype=float), self.c.shape)
        return QuadraticStack(self.A * s[:, None, None], self.b * s[:, None], self.c * s)


def sum_abs2(M: np.ndarray, z0: np.ndarray):
    """Coefficients of ``sum_p |M[p] @ x + z0[p]|**2`` for real ``x``.

    Returns ``(Q, q, q0)`` with the value ``x @ Q @ x + q @ x + q0``.
    ``M`` may carry leading batch axes: ``M`` is ``(..., p, n)``, ``z0`` is ``(..., p)``.
    """
    Mr, Mi = M.real, M.imag
    Q = np.swapaxes(Mr, -1, -2) @ Mr + np.swapaxes(Mi, -1, -2) @ Mi
    q = 2.0 * (np.einsum("...pn,...p->...n", Mr, z0.real) + np.einsum("...pn,...p->...n", Mi, z0.imag))
    q0 = np.sum(np.abs(z0) ** 2, axis=-1)
    return Q, q, q0


def complex_to_real_coeffs(C: np.ndarray) -> np.ndarray:
    """Map coefficients over a complex vector u to coefficients over x = [Re u, Im u]."""
    return np.concatenate([C, 1j * C], axis=-1)


def stack_real(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u).ravel()
    return np.concatenate([u.real, u.imag])


def unstack_real(x: np.ndarray) -> np.ndarray:
    half = x.size // 2
    return x[:half] + 1j * x[half:]
