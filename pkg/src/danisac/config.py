"""System configuration: every scalar parameter of the simulated network.

All values are stored in SI units (W, s, Hz, m, rad).  Power levels that are
conventionally quoted in dBm (noise floor, power budget, echo/interference
thresholds) are converted once, here, and carried as Watts; `*_dbm` override
keys are accepted by the config-file parser for convenience.

Quality-of-service parameters (required rate, echo floor, interference
ceiling, power budget, fronthaul cap, beamwidth, mismatch tolerance, radar
cross-section) are homogeneous across users/targets/RRHs, matching the
reference experiment setup, so they are plain scalars.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .units import dbm_to_watt

__all__ = ["SystemConfig", "parse_config_file", "apply_overrides", "DBM_KEYS"]


@dataclass(frozen=True)
class SystemConfig:
    # Structure
    J: int = 3            # RRHs
    K: int = 3            # users
    L: int = 3            # sensing locations (L <= J)
    N_T: int = 6          # antennas per RRH

    # Frame timing
    T: float = 1e-3       # frame length (s)
    M: int = 100          # sensing rounds per frame
    t_min: float = 1e-7   # minimum pulse width (s)

    # Fronthaul
    W_F: float = 10e6     # fronthaul bandwidth (Hz)
    N_b: int = 4          # quantization bits per echo sample
    delta_R: float = 10.0  # range resolution (m)
    C_maxF: float = 5.5   # per-link fronthaul capacity (bits/s/Hz)

    # Quality of service
    R_req: float = 2.0                        # per-user rate (bits/s/Hz)
    P_req: float = dbm_to_watt(-90.0)         # echo power floor (W)
    P_tol: float = dbm_to_watt(-100.0)        # clutter ceiling (W)
    P_maxT: float = dbm_to_watt(46.5)         # per-RRH power budget (W)

    # Beam pattern
    psi: float = math.pi / 6  # ideal beamwidth (rad)
    I: int = 360              # angular grid size (full circle)
    eps_bar: float = 0.1      # normalized mismatch tolerance

    # Propagation
    # Effective scattering gain per location: radar cross-section folded with
    # receive processing gain.  Sized so the echo floor stays reachable under
    # the beam-shape tolerance across the whole scenario distribution (pair
    # distances up to ~800 m) at both swept array sizes.
    gamma: float = 1e4
    omega: float = 0.5        # normalized antenna spacing
    PL_ref_db: float = 40.0   # path loss at 1 m (dB)
    alpha_comm: float = 3.0   # user-channel path loss exponent
    alpha_sense: float = 2.0  # sensing-channel path loss exponent
    gain_model: str = "reference"  # "reference" | "freespace"
    f_c: float = 0.0          # carrier (Hz); required for "freespace"
    sigma_U: float = dbm_to_watt(-104.0)    # user noise power (W)
    sigma_RRH: float = dbm_to_watt(-104.0)  # RRH noise power (W), Monte Carlo oracle only
    c: float = 3e8            # speed of light (m/s), engineering convention

    # Layout
    side: float = 500.0        # RRH triangle side (m), CP at centroid
    disc_radius: float = 500.0  # user/target disc radius around CP (m)
    d_clamp: float = 1.0       # minimum node-to-RRH distance (m)

    # Algorithm
    mu: float = 1e3        # binary-selection penalty factor
    mu_growth: float = 1.0  # geometric penalty growth per iteration (1.0 = off)
    delta: float = 1e-3    # convergence tolerance on the relative objective change
    ao_iter_cap: int = 100  # alternating-optimization iteration cap
    solver_tol: float = 1e-8   # conic solver certificate tolerance
    solver_iter_cap: int = 200  # conic solver iteration cap

    def __post_init__(self):
        if not (1 <= self.L <= self.J):
            raise ValueError(f"need 1 <= L <= J, got L={self.L}, J={self.J}")
        if self.K < 0 or self.N_T < 1 or self.M < 1 or self.I < 2:
            raise ValueError("K >= 0, N_T >= 1, M >= 1, I >= 2 required")
        for name in ("T", "t_min", "W_F", "delta_R", "C_maxF", "R_req", "P_req",
                     "P_tol", "P_maxT", "psi", "eps_bar", "gamma", "omega",
                     "sigma_U", "sigma_RRH", "c", "side", "disc_radius", "mu",
                     "delta", "solver_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.N_b < 1:
            raise ValueError("N_b must be >= 1")
        if not self.t_min < self.T / self.M:
            raise ValueError("t_min must be smaller than one sensing round T/M")
        if not self.delta < 1.0:
            raise ValueError("delta must be well below 1")
        if self.gain_model not in ("reference", "freespace"):
            raise ValueError(f"unknown gain_model {self.gain_model!r}")
        if self.gain_model == "freespace" and self.f_c <= 0:
            raise ValueError("freespace gain model requires a positive f_c")

    @property
    def ntj(self) -> int:
        """Total transmit antennas across all RRHs."""
        return self.N_T * self.J


_INT_FIELDS = {"J", "K", "L", "N_T", "M", "N_b", "I", "ao_iter_cap", "solver_iter_cap"}
_STR_FIELDS = {"gain_model"}

# Convenience override keys taking values in dBm instead of Watts.
DBM_KEYS = {
    "P_req_dbm": "P_req",
    "P_tol_dbm": "P_tol",
    "P_maxT_dbm": "P_maxT",
    "sigma_U_dbm": "sigma_U",
    "sigma_RRH_dbm": "sigma_RRH",
}

_FIELD_NAMES = {f.name for f in dataclasses.fields(SystemConfig)}


def _coerce(key: str, raw: str):
    if key in _STR_FIELDS:
        return raw
    if key in _INT_FIELDS:
        return int(raw)
    return float(raw)


def _resolve(key: str, raw):
    """Map an override key/value onto a (field, typed value) pair."""
    if key in DBM_KEYS:
        return DBM_KEYS[key], dbm_to_watt(float(raw))
    if key not in _FIELD_NAMES:
        raise ValueError(f"unknown config key {key!r}")
    if isinstance(raw, str):
        return key, _coerce(key, raw)
    return key, raw


def parse_config_file(path: str, base: "SystemConfig | None" = None) -> SystemConfig:
    """Build a SystemConfig from a flat `key = value` file.

    Blank lines and lines starting with '#' are ignored.  Keys must be
    SystemConfig field names or one of the `*_dbm` convenience keys; anything
    else is a hard error (typos must not silently pass).  Unlisted fields
    keep their defaults (or the values of `base` when given).
    """
    fields: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            try:
                field, value = _resolve(key, raw)
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
            if field in fields:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            fields[field] = value
    return dataclasses.replace(base if base is not None else SystemConfig(), **fields)


def apply_overrides(config: SystemConfig, overrides: dict) -> SystemConfig:
    """Return a new config with the given overrides applied.

    String values (as delivered by CLI `key=value` arguments) are coerced to
    the field's type; `*_dbm` convenience keys are converted to Watts.
    """
    fields = dict(_resolve(k, v) for k, v in overrides.items())
    return dataclasses.replace(config, **fields)
