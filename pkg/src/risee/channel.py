"""Channel realizations for the RIS-aided broadcast channel.

A trial draws the BS->RIS matrix F (Rician), the RIS->user rows f_l
(Rician) and the BS->user rows g_l (Rayleigh). All channels are divided
by the physical noise amplitude so that the rate formula works with the
normalized noise power ``Scenario.sigma2``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import Scenario


@dataclass(frozen=True)
class ChannelSet:
    F: np.ndarray  # (N, K)
    f: np.ndarray  # (L, N), row l is f_l
    g: np.ndarray  # (L, K), row l is g_l
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("F", "f", "g"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=complex)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be two-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        N, K = self.F.shape
        if self.f.shape[1] != N or self.g.shape[1] != K or self.f.shape[0] != self.g.shape[0]:
            raise ValueError(f"inconsistent channel shapes F{self.F.shape} f{self.f.shape} g{self.g.shape}")

    @property
    def K(self) -> int:
        return self.F.shape[1]

    @property
    def N(self) -> int:
        return self.F.shape[0]

    @property
    def L(self) -> int:
        return self.f.shape[0]

    def digest(self) -> str:
        """SHA-256 over the raw channel bytes; equal digests mean identical channels."""
        h = hashlib.sha256()
        for arr in (self.F, self.f, self.g):
            h.update(np.asarray(arr.shape, dtype="<i8").tobytes())
            h.update(arr.astype("<c16").tobytes())
        return h.hexdigest()


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, keyed by (seed, trial) only.

    SeedSequence spawn keys give a counter-style split: the stream of trial
    ``i`` does not depend on how many other trials were drawn or in which order.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial_index),)))


def steering(M: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response, broadside convention."""
    return np.exp(1j * np.pi * np.arange(M) * np.sin(angle))


def path_gain(d, exponent: float, ref_dB: float) -> np.ndarray:
    """Linear gain for PL(d)[dB] = ref_dB + 10*exponent*log10(d)."""
    d = np.maximum(np.asarray(d, dtype=float), 1.0)
    return 10.0 ** (-(ref_dB + 10.0 * exponent * np.log10(d)) / 10.0)


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channels(s: Scenario, trial_index: int) -> ChannelSet:
    rng = trial_rng(s.seed, trial_index)
    K, L, N = s.K, s.L, s.N

    radius = s.users_radius * np.sqrt(rng.uniform(size=L))
    phi = rng.uniform(0.0, 2 * np.pi, size=L)
    users = np.column_stack([s.users_cx + radius * np.cos(phi), s.users_cy + radius * np.sin(phi)])
    bs = np.array([s.bs_x, s.bs_y])
    ris = np.array([s.ris_x, s.ris_y])

    aod_bs, aoa_ris = rng.uniform(0.0, 2 * np.pi, size=2)
    aod_users = rng.uniform(0.0, 2 * np.pi, size=L)

    Hw = _cn(rng, (N, K))
    fw = _cn(rng, (L, N))
    gw = _cn(rng, (L, K))

    noise_w = 10.0 ** (s.noise_dBm / 10.0) * 1e-3
    gain_F = path_gain(np.linalg.norm(ris - bs), s.pl_exp_ris, s.pl_ref_dB) / noise_w
    gain_f = path_gain(np.linalg.norm(users - ris, axis=1), s.pl_exp_ris, s.pl_ref_dB)
    gain_g = path_gain(np.linalg.norm(users - bs, axis=1), s.pl_exp_direct, s.pl_ref_dB) / noise_w

    kappa = s.rician_kappa
    w_los, w_nlos = np.sqrt(kappa / (1 + kappa)), np.sqrt(1 / (1 + kappa))
    F_los = np.outer(steering(N, aoa_ris), steering(K, aod_bs).conj())
    f_los = np.stack([steering(N, a).conj() for a in aod_users])

    F = np.sqrt(gain_F) * (w_los * F_los + w_nlos * Hw)
    f = np.sqrt(gain_f)[:, None] * (w_los * f_los + w_nlos * fw)
    g = np.sqrt(gain_g)[:, None] * gw
    meta = {
        "users": users,
        "gain_F": gain_F,
        "gain_f": gain_f,
        "gain_g": gain_g,
        "F_los": F_los,
        "trial": int(trial_index),
    }
    return ChannelSet(F, f, g, meta)


def effective_channel(cs: ChannelSet, psi: np.ndarray, l: int) -> np.ndarray:
    """h_l(psi) = f_l psi F + g_l, a length-K row."""
    psi = np.asarray(psi)
    if psi.shape != (cs.N, cs.N):
        raise ValueError(f"psi must be {cs.N}x{cs.N}, got {psi.shape}")
    return cs.f[l] @ psi @ cs.F + cs.g[l]


def effective_channels(cs: ChannelSet, psi: np.ndarray) -> np.ndarray:
    """All rows h_l(psi) stacked into an (L, K) matrix."""
    psi = np.asarray(psi)
    if psi.shape != (cs.N, cs.N):
        raise ValueError(f"psi must be {cs.N}x{cs.N}, got {psi.shape}")
    return cs.f @ psi @ cs.F + cs.g


# --- channel dump files -------------------------------------------------------

_MAGIC = "RISEE-CHANNELS v1"


def write_channel_dump(path, channel_sets) -> Path:
    """Text header line, then per record F, f, g as little-endian complex128
    (real/imaginary interleaved), each row-major."""
    channel_sets = list(channel_sets)
    path = Path(path)
    if channel_sets:
        K, L, N = channel_sets[0].K, channel_sets[0].L, channel_sets[0].N
    else:
        K = L = N = 0
    with open(path, "wb") as fh:
        fh.write(f"{_MAGIC} K={K} L={L} N={N} records={len(channel_sets)}\n".encode("ascii"))
        for cs in channel_sets:
            if (cs.K, cs.L, cs.N) != (K, L, N):
                raise ValueError("all records in a dump must share dimensions")
            for arr in (cs.F, cs.f, cs.g):
                fh.write(arr.astype("<c16").tobytes(order="C"))
    return path


def read_channel_dump(path) -> list[ChannelSet]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        payload = fh.read()
    if not header.startswith(_MAGIC):
        raise ValueError(f"{path}: not a channel dump")
    dims = dict(tok.split("=") for tok in header[len(_MAGIC):].split())
    K, L, N, n = (int(dims[k]) for k in ("K", "L", "N", "records"))
    per = N * K + L * N + L * K
    data = np.frombuffer(payload, dtype="<c16")
    if data.size != n * per:
        raise ValueError(f"{path}: expected {n * per} complex values, found {data.size}")
    out = []
    for r in range(n):
        chunk = data[r * per:(r + 1) * per]
        F = chunk[: N * K].reshape(N, K)
        f = chunk[N * K: N * K + L * N].reshape(L, N)
        g = chunk[N * K + L * N:].reshape(L, K)
        out.append(ChannelSet(F.astype(complex), f.astype(complex), g.astype(complex)))
    return out
