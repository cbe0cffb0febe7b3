"""Experiment parameters: the Scenario record, its loader, and the static power model."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from enum import Enum
from typing import Any, Mapping

import numpy as np
import yaml


class Architecture(str, Enum):
    LPD = "LPD"
    GPD = "GPD"
    GPBD = "GPBD"
    NORIS = "NoRIS"

    @classmethod
    def parse(cls, value) -> "Architecture":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").upper()
        for arch in cls:
            if arch.value.upper() == key:
                return arch
        raise ValueError(f"unknown architecture {value!r}; expected one of LPD, GPD, GPBD, NoRIS")

    @property
    def is_diagonal(self) -> bool:
        return self in (Architecture.LPD, Architecture.GPD)

    @property
    def globally_passive(self) -> bool:
        return self in (Architecture.GPD, Architecture.GPBD)


class ConfigError(ValueError):
    """Malformed configuration document or invalid parameter value."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def dbm_to_watt(x: float) -> float:
    return 10.0 ** (x / 10.0) * 1e-3


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


@dataclass(frozen=True)
class Scenario:
    """Every physical and algorithmic knob of one experiment.

    Powers are in watts. Channels are normalized by the physical noise
    power ``noise_dBm`` when drawn, so ``sigma2`` is the noise power in
    those normalized units (1 by default) and ``P`` is the BS budget in W.
    """

    K: int = 5
    L: int = 5
    N: int = 20
    P: float = 10.0
    sigma2: float = 1.0
    noise_dBm: float = -80.0
    beta: float = 1.0
    P_t: float = 3.0
    P_ris0: float = 0.01
    P_risn: float = dbm_to_watt(1.0)
    r_th: tuple = ()
    rician_kappa: float = 3.0
    bs_x: float = 0.0
    bs_y: float = 0.0
    ris_x: float = 50.0
    ris_y: float = 0.0
    users_cx: float = 60.0
    users_cy: float = 10.0
    users_radius: float = 10.0
    pl_ref_dB: float = 35.0
    pl_exp_ris: float = 2.2
    pl_exp_direct: float = 3.7
    architecture: Architecture = Architecture.LPD
    seed: int = 2024
    ao_tol: float = 1e-5
    ao_max_iter: int = 100
    gda_tol: float = 1e-7
    gda_max_iter: int = 50
    feas_tol: float = 1e-8
    stat_tol: float = 1e-6
    lpd_epsilon: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture.parse(self.architecture))
        r = self.r_th
        if np.isscalar(r):
            r = (float(r),) * int(self.L)
        object.__setattr__(self, "r_th", tuple(float(v) for v in r))
        _validate(self)

    @property
    def thresholds(self) -> np.ndarray:
        if not self.r_th:
            return np.zeros(self.L)
        if len(self.r_th) == 1:
            return np.full(self.L, self.r_th[0])
        return np.asarray(self.r_th, dtype=float)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Architecture) else (list(v) if isinstance(v, tuple) else v)
        return out


_INT_FIELDS = {"K", "L", "N", "seed", "ao_max_iter", "gda_max_iter"}
_FIELD_NAMES = {f.name for f in fields(Scenario)}

# alias -> (field, converter)
_ALIASES = {
    "P_dB": ("P", db_to_linear),
    "P_dBW": ("P", db_to_linear),
    "P_t_dBm": ("P_t", dbm_to_watt),
    "P_ris0_dBm": ("P_ris0", dbm_to_watt),
    "P_risn_dBm": ("P_risn", dbm_to_watt),
}


def _validate(s: Scenario) -> None:
    for name in ("K", "L", "N"):
        if int(getattr(s, name)) < 1:
            raise ConfigError(f"{name} must be a positive integer, got {getattr(s, name)}", name)
    positive = {"P": s.P, "sigma2": s.sigma2}
    for name, v in positive.items():
        if not v > 0:
            raise ConfigError(f"{name} must be > 0, got {v}", name)
    nonneg = {"beta": s.beta, "P_t": s.P_t, "P_ris0": s.P_ris0, "P_risn": s.P_risn,
              "rician_kappa": s.rician_kappa, "users_radius": s.users_radius}
    for name, v in nonneg.items():
        if not v >= 0:
            raise ConfigError(f"{name} must be >= 0, got {v}", name)
    if len(s.r_th) not in (0, 1, s.L):
        raise ConfigError(f"r_th must be a scalar or a list of L={s.L} rates", "r_th")
    if any(not r >= 0 for r in s.r_th):
        raise ConfigError("r_th entries must be >= 0", "r_th")
    for name in ("ao_tol", "gda_tol", "feas_tol", "stat_tol"):
        if not getattr(s, name) > 0:
            raise ConfigError(f"{name} must be > 0", name)
    if not 0 < s.lpd_epsilon <= 1:
        raise ConfigError("lpd_epsilon must lie in (0, 1]", "lpd_epsilon")
    for name in ("ao_max_iter", "gda_max_iter"):
        if getattr(s, name) < 1:
            raise ConfigError(f"{name} must be >= 1", name)
    if not 0 <= s.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer", "seed")


def _coerce(key: str, value: Any):
    if key == "architecture":
        try:
            return Architecture.parse(value)
        except ValueError as exc:
            raise ConfigError(str(exc), key) from None
    if key == "r_th":
        if isinstance(value, (list, tuple)):
            return tuple(float(v) for v in value)
        return float(value)
    if isinstance(value, (list, dict)):
        raise ConfigError(f"{key} must be a scalar", key)
    try:
        if key in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot interpret {key}={value!r}", key) from None


def scenario_from_mapping(doc: Mapping[str, Any] | None, base: Scenario | None = None) -> Scenario:
    """Build a Scenario from flat key/value pairs layered over ``base`` (or defaults)."""
    doc = dict(doc or {})
    values: dict[str, Any] = {}
    for key, raw in doc.items():
        if key in _ALIASES:
            target, conv = _ALIASES[key]
            if target in doc:
                raise ConfigError(f"both {key} and {target} given", key)
            values[target] = conv(_coerce(target, raw))
        elif key in _FIELD_NAMES:
            values[key] = _coerce(key, raw)
        else:
            raise ConfigError(f"unknown configuration key {key!r}", key)
    # a new L invalidates inherited per-user thresholds
    if base is not None and "L" in values and "r_th" not in values and len(base.r_th) > 1:
        values["r_th"] = ()
    base = base or Scenario()
    try:
        return dataclasses.replace(base, **values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_scenario(text: str, base: Scenario | None = None) -> Scenario:
    """Parse a YAML/JSON document of top-level scalar keys into a validated Scenario."""
    try:
        doc = yaml.safe_load(text) if text and text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed configuration document: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a mapping of keys to values")
    return scenario_from_mapping(doc, base)


def circuit_elements(arch: Architecture, N: int) -> int:
    """Number of powered circuit elements; the BD design is fully connected."""
    arch = Architecture.parse(arch)
    if arch is Architecture.NORIS:
        return 0
    if arch is Architecture.GPBD:
        return N * (N - 1) // 2
    return N


def ris_static_power(s: Scenario, arch: Architecture | None = None) -> float:
    arch = s.architecture if arch is None else Architecture.parse(arch)
    if arch is Architecture.NORIS:
        return 0.0
    return s.P_ris0 + circuit_elements(arch, s.N) * s.P_risn


def derived_static_power(s: Scenario, arch: Architecture | None = None) -> float:
    """Per-user static power P_c = P_t + P_RIS / L."""
    return s.P_t + ris_static_power(s, arch) / s.L
