"""Domain model: geometry, channels, pairing, and ideal beam patterns.

A central processor (CP) coordinates J remote radio heads (RRHs) placed on
an equilateral triangle around it.  K single-antenna users and L sensing
locations are dropped uniformly in a disc around the CP.  Each sensing
location is paired with one RRH (greedy nearest assignment); during the
sensing phase that RRH illuminates its location with a directional beam and
listens for the echo.

Channel conventions
-------------------
* User channels are Rayleigh: per-RRH blocks of i.i.d. CN(0,1) fading scaled
  by a reference-distance path loss amplitude (no array steering; rich
  scattering assumed).
* Sensing channels are pure line-of-sight: g = sqrt(beta) * a(phi) with a
  uniform-linear-array steering vector a and a round-trip-relevant gain
  beta = gamma * 10^(-PL_ref/10) / d^alpha_sense (or the free-space
  (c / 4 pi f_c)^2 / d^2 alternative).
* Each RRH's linear array is rotated so that its paired location sits at
  local angle 0, the array's best-resolution direction.  All angles-of-
  departure are stored in the array's local frame.  A linear array cannot
  distinguish directions phi and pi - phi (its response depends on sin phi
  only), so beam-pattern matching is restricted to the half plane the array
  faces; the pattern grid carried per pair covers local directions with
  cos(theta) >= 0.  Without this restriction a single-lobe ideal pattern is
  unsynthesizable at tight mismatch tolerances: any achieved pattern would
  put an equal-gain mirror lobe into the stop band.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

__all__ = [
    "ScenarioGeometry", "PairingMap", "IdealBeamPattern", "PairPattern",
    "Scenario", "steering_vector", "sensing_channel", "ideal_pattern",
    "pair_targets", "generate_scenario", "build_scenario",
    "serialize_scenario", "load_scenario", "pathloss_gain",
]

# Inclusive-edge guard for beam-pattern membership (rad).  Keeps grid points
# that sit exactly on the half-beamwidth boundary inside the pass band.
_EDGE_TOL = 1e-9


def steering_vector(phi: float, n_t: int, omega: float = 0.5) -> np.ndarray:
    """Uniform linear array response toward angle phi.

    Element n (0-based) is exp(j * 2 pi * omega * n * sin(phi)); element 0 is
    always 1 and every element has unit modulus.
    """
    n = np.arange(n_t)
    return np.exp(2j * np.pi * omega * n * math.sin(phi))


def pathloss_gain(d: float, alpha: float, config: SystemConfig) -> float:
    """Power gain of a link at distance d under the configured loss model."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if config.gain_model == "freespace":
        rho0 = (config.c / (4.0 * math.pi * config.f_c)) ** 2
        return rho0 / d ** 2
    return 10.0 ** (-config.PL_ref_db / 10.0) / d ** alpha


def sensing_channel(d: float, phi: float, gamma: float, config: SystemConfig) -> np.ndarray:
    """Line-of-sight sensing channel g = sqrt(beta) * a(phi).

    beta folds the target's radar cross-section gamma into the one-hop gain,
    so the round-trip echo scales with beta^2.  ||g||^2 == beta * N_T.
    """
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if gamma <= 0:
        raise ValueError(f"cross-section must be positive, got {gamma}")
    beta = gamma * pathloss_gain(d, config.alpha_sense, config)
    return math.sqrt(beta) * steering_vector(phi, config.N_T, config.omega)


def _circular_distance(theta: np.ndarray, center: float) -> np.ndarray:
    d = np.mod(theta - center, 2.0 * math.pi)
    return np.minimum(d, 2.0 * math.pi - d)


@dataclass(frozen=True)
class IdealBeamPattern:
    """Binary ideal pattern on an angular grid: 1 inside the beam, 0 outside."""
    directions: np.ndarray  # (n,) rad
    values: np.ndarray      # (n,) uint8 in {0, 1}

    @property
    def n_pass(self) -> int:
        return int(self.values.sum())


def ideal_pattern(phi_ll: float, psi: float, I: int) -> IdealBeamPattern:
    """Ideal beam pattern on the full-circle grid theta_i = 2 pi (i-1) / I.

    A direction is inside the beam iff its circular angular distance to
    phi_ll is at most psi / 2 (boundary inclusive).
    """
    if not 0.0 < psi < 2.0 * math.pi:
        raise ValueError(f"need 0 < psi < 2 pi, got {psi}")
    if I < 2:
        raise ValueError(f"need I >= 2, got {I}")
    theta = 2.0 * math.pi * np.arange(I) / I
    values = (_circular_distance(theta, phi_ll) <= psi / 2.0 + _EDGE_TOL)
    out = IdealBeamPattern(theta, values.astype(np.uint8))
    if out.n_pass == 0:
        raise AssertionError("ideal pattern must contain at least one pass direction")
    return out


@dataclass(frozen=True)
class ScenarioGeometry:
    """Node placement and derived distances/bearings (global frame)."""
    rrh_pos: np.ndarray      # (J, 2) m
    cp_pos: np.ndarray       # (2,) m
    user_pos: np.ndarray     # (K, 2) m
    target_pos: np.ndarray   # (L, 2) m
    d_user: np.ndarray       # (J, K) m, clamped
    d_target: np.ndarray     # (J, L) m, clamped


@dataclass(frozen=True)
class PairingMap:
    """Injective assignment of target index -> RRH index."""
    assignment: tuple

    def rrh_for(self, l: int) -> int:
        return self.assignment[l]


def pair_targets(geometry: ScenarioGeometry) -> PairingMap:
    """Greedy globally-nearest target-RRH pairing.

    Repeatedly commits the unassigned (target, RRH) pair at minimum distance;
    exact distance ties break by lowest target index, then lowest RRH index.
    """
    J = geometry.rrh_pos.shape[0]
    L = geometry.target_pos.shape[0]
    if L > J:
        raise ValueError(f"cannot pair {L} targets to {J} RRHs")
    candidates = sorted(
        (geometry.d_target[j, l], l, j) for l in range(L) for j in range(J)
    )
    assigned: dict = {}
    used_rrh: set = set()
    for _, l, j in candidates:
        if l in assigned or j in used_rrh:
            continue
        assigned[l] = j
        used_rrh.add(j)
        if len(assigned) == L:
            break
    return PairingMap(tuple(assigned[l] for l in range(L)))


@dataclass(frozen=True)
class PairPattern:
    """Per-pair matching data: front-half grid, ideal values, steering rows.

    directions are local angles theta with cos(theta) >= 0 (the half plane
    the array faces); a_grid[i] = a(theta_i) for the pair's RRH array;
    eps is the absolute mismatch budget eps_bar * n_pass.
    """
    directions: np.ndarray  # (n_dir,) rad, local frame
    values: np.ndarray      # (n_dir,) uint8
    a_grid: np.ndarray      # (n_dir, N_T) complex
    eps: float

    @property
    def n_pass(self) -> int:
        return int(self.values.sum())

    @property
    def pass_idx(self) -> np.ndarray:
        return np.nonzero(self.values == 1)[0]

    @property
    def stop_idx(self) -> np.ndarray:
        return np.nonzero(self.values == 0)[0]


@dataclass(frozen=True)
class Scenario:
    """Immutable system realization: geometry, channels, pairing, patterns."""
    config: SystemConfig
    seed: object            # int or None (hand-built scenarios)
    geometry: ScenarioGeometry
    fading: np.ndarray      # (K, N_T J) complex CN(0,1) user fading
    h: np.ndarray           # (K, N_T J) complex user channels
    pairing: PairingMap
    array_rot: np.ndarray   # (J,) rad, global bearing mapped to local angle 0
    d_sense: np.ndarray     # (L, L) m, RRH-of-pair-l to location q, clamped
    phi_local: np.ndarray   # (L, L) rad, local AoD at RRH of pair l toward location q
    beta: np.ndarray        # (L, L) one-hop gains
    g: np.ndarray           # (L, L, N_T) complex, g[l, q]
    G: np.ndarray           # (L, L, L, N_T, N_T) complex, G[l, p, q] = g[l,p] g[q,p]^H
    patterns: tuple         # L PairPattern entries

    @property
    def pair_distance(self) -> np.ndarray:
        """d_ll of each pair (RRH to its own location)."""
        return np.array([self.d_sense[l, l] for l in range(len(self.patterns))])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def front_grid(I: int) -> np.ndarray:
    """Local grid directions in the array's forward half plane.

    Subset of the full circle grid 2 pi (i-1) / I with cos(theta) >= 0
    (both endfire directions included).
    """
    theta = 2.0 * math.pi * np.arange(I) / I
    return theta[np.cos(theta) >= -1e-12]


def build_scenario(config: SystemConfig, user_pos: np.ndarray, target_pos: np.ndarray,
                   fading: np.ndarray, seed=None) -> Scenario:
    """Deterministically assemble a Scenario from placed nodes and raw fading."""
    J, K, L, N_T = config.J, config.K, config.L, config.N_T
    user_pos = np.asarray(user_pos, dtype=float).reshape(K, 2)
    target_pos = np.asarray(target_pos, dtype=float).reshape(L, 2)
    fading = np.asarray(fading, dtype=complex).reshape(K, config.ntj)

    # RRHs on an equilateral triangle, CP at the centroid (origin).
    cp = np.zeros(2)
    r_vertex = config.side / math.sqrt(3.0)
    angles = math.pi / 2.0 + 2.0 * math.pi * np.arange(J) / 3.0
    rrh_pos = r_vertex * np.stack([np.cos(angles), np.sin(angles)], axis=1)

    def dist(a, b):
        return max(float(np.hypot(*(a - b))), config.d_clamp)

    d_user = np.array([[dist(rrh_pos[j], user_pos[k]) for k in range(K)] for j in range(J)])
    d_target = np.array([[dist(rrh_pos[j], target_pos[l]) for l in range(L)] for j in range(J)])
    geometry = ScenarioGeometry(_freeze(rrh_pos), _freeze(cp), _freeze(user_pos.copy()),
                                _freeze(target_pos.copy()), _freeze(d_user), _freeze(d_target))

    pairing = pair_targets(geometry)

    # User channels: per-RRH path loss amplitude times raw fading.
    h = np.empty((K, config.ntj), dtype=complex)
    for k in range(K):
        for j in range(J):
            amp = math.sqrt(pathloss_gain(d_user[j, k], config.alpha_comm, config))
            h[k, j * N_T:(j + 1) * N_T] = amp * fading[k, j * N_T:(j + 1) * N_T]

    # Array orientations: paired location at local angle 0.
    array_rot = np.zeros(J)
    for l in range(L):
        j = pairing.rrh_for(l)
        dv = target_pos[l] - rrh_pos[j]
        array_rot[j] = math.atan2(dv[1], dv[0]) % (2.0 * math.pi)

    # Sensing channels between paired RRHs and all locations, local frame.
    d_sense = np.empty((L, L))
    phi_local = np.empty((L, L))
    beta = np.empty((L, L))
    g = np.empty((L, L, N_T), dtype=complex)
    for l in range(L):
        j = pairing.rrh_for(l)
        for q in range(L):
            dv = target_pos[q] - rrh_pos[j]
            d_sense[l, q] = dist(rrh_pos[j], target_pos[q])
            phi_local[l, q] = (math.atan2(dv[1], dv[0]) - array_rot[j]) % (2.0 * math.pi)
            beta[l, q] = config.gamma * pathloss_gain(d_sense[l, q], config.alpha_sense, config)
            g[l, q] = math.sqrt(beta[l, q]) * steering_vector(phi_local[l, q], N_T, config.omega)

    G = np.empty((L, L, L, N_T, N_T), dtype=complex)
    for l in range(L):
        for p in range(L):
            for q in range(L):
                G[l, p, q] = np.outer(g[l, p], g[q, p].conj())

    # Per-pair ideal patterns on the forward half-plane grid; the paired
    # location sits at local angle 0 by construction.
    dirs = front_grid(config.I)
    patterns = []
    for l in range(L):
        values = (_circular_distance(dirs, 0.0) <= config.psi / 2.0 + _EDGE_TOL).astype(np.uint8)
        a_grid = np.stack([steering_vector(t, N_T, config.omega) for t in dirs])
        eps = config.eps_bar * float(values.sum())
        patterns.append(PairPattern(_freeze(dirs.copy()), _freeze(values),
                                    _freeze(a_grid), eps))

    return Scenario(config, seed, geometry, _freeze(fading.copy()), _freeze(h), pairing,
                    _freeze(array_rot), _freeze(d_sense), _freeze(phi_local), _freeze(beta),
                    _freeze(g), _freeze(G), tuple(patterns))


def generate_scenario(config: SystemConfig, seed: int) -> Scenario:
    """Random scenario: users/targets uniform in the disc, Rayleigh fading.

    Draw order (fixed for reproducibility): user radii, user angles, target
    radii, target angles, fading real parts, fading imaginary parts.  The
    same (config, seed) always yields a bit-identical scenario.
    """
    rng = np.random.default_rng(seed)
    R = config.disc_radius

    def draw_disc(n):
        r = R * np.sqrt(rng.random(n))
        ang = 2.0 * math.pi * rng.random(n)
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)

    user_pos = draw_disc(config.K)
    target_pos = draw_disc(config.L)
    re = rng.standard_normal((config.K, config.ntj))
    im = rng.standard_normal((config.K, config.ntj))
    fading = (re + 1j * im) / math.sqrt(2.0)
    return build_scenario(config, user_pos, target_pos, fading, seed=seed)


# ---------------------------------------------------------------------------
# Text serialization: human-readable, full precision, byte-deterministic.
# Primary data (positions, fading, seed) fully determines the scenario; the
# derived channels are embedded as well for external inspection and are
# verified against a rebuild on load.
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_cvec(v: np.ndarray) -> str:
    return " ".join(f"{_fmt(c.real)} {_fmt(c.imag)}" for c in v)


def serialize_scenario(sc: Scenario) -> str:
    cfg = sc.config
    out = io.StringIO()
    w = out.write
    w("danisac-scenario 1\n")
    w(f"seed {sc.seed if sc.seed is not None else 'none'}\n")
    w(f"J {cfg.J}\nK {cfg.K}\nL {cfg.L}\nN_T {cfg.N_T}\n")
    w(f"cp {_fmt(sc.geometry.cp_pos[0])} {_fmt(sc.geometry.cp_pos[1])}\n")
    for j in range(cfg.J):
        w(f"rrh {j} {_fmt(sc.geometry.rrh_pos[j, 0])} {_fmt(sc.geometry.rrh_pos[j, 1])} "
          f"{_fmt(sc.array_rot[j])}\n")
    for k in range(cfg.K):
        w(f"user {k} {_fmt(sc.geometry.user_pos[k, 0])} {_fmt(sc.geometry.user_pos[k, 1])}\n")
    for l in range(cfg.L):
        w(f"target {l} {_fmt(sc.geometry.target_pos[l, 0])} {_fmt(sc.geometry.target_pos[l, 1])}\n")
    for l in range(cfg.L):
        w(f"pair {l} {sc.pairing.rrh_for(l)}\n")
    for k in range(cfg.K):
        w(f"fading {k} {_fmt_cvec(sc.fading[k])}\n")
    for k in range(cfg.K):
        w(f"h {k} {_fmt_cvec(sc.h[k])}\n")
    for l in range(cfg.L):
        for q in range(cfg.L):
            w(f"g {l} {q} {_fmt_cvec(sc.g[l, q])}\n")
    return out.getvalue()


def load_scenario(text: str, config: SystemConfig) -> Scenario:
    """Rebuild a Scenario from its serialized form (and verify channels)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "danisac-scenario 1":
        raise ValueError("not a recognized scenario serialization")
    fields: dict = {}
    for ln in lines[1:]:
        parts = ln.split()
        fields.setdefault(parts[0], []).append(parts[1:])
    for name in ("J", "K", "L", "N_T"):
        val = int(fields[name][0][0])
        if val != getattr(config, name):
            raise ValueError(f"scenario {name}={val} does not match config {getattr(config, name)}")
    seed_raw = fields["seed"][0][0]
    seed = None if seed_raw == "none" else int(seed_raw)

    def positions(key, n):
        rows = sorted(fields[key], key=lambda p: int(p[0]))
        if len(rows) != n:
            raise ValueError(f"expected {n} {key} rows, got {len(rows)}")
        return np.array([[float(p[1]), float(p[2])] for p in rows])

    user_pos = positions("user", config.K)
    target_pos = positions("target", config.L)
    fading = np.empty((config.K, config.ntj), dtype=complex)
    for row in fields["fading"]:
        k = int(row[0])
        vals = np.array([float(x) for x in row[1:]])
        fading[k] = vals[0::2] + 1j * vals[1::2]

    sc = build_scenario(config, user_pos, target_pos, fading, seed=seed)
    for row in fields["h"]:
        k = int(row[0])
        vals = np.array([float(x) for x in row[1:]])
        ref = vals[0::2] + 1j * vals[1::2]
        if not np.allclose(ref, sc.h[k], rtol=1e-10, atol=1e-300):
            raise ValueError(f"serialized user channel {k} inconsistent with rebuild")
    for row in fields.get("g", []):
        l, q = int(row[0]), int(row[1])
        vals = np.array([float(x) for x in row[2:]])
        ref = vals[0::2] + 1j * vals[1::2]
        if not np.allclose(ref, sc.g[l, q], rtol=1e-10, atol=1e-300):
            raise ValueError(f"serialized sensing channel ({l},{q}) inconsistent with rebuild")
    return sc
