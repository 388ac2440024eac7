"""Performance metrics and constraint evaluation.

Every quantity the optimizer constrains or minimizes is computable here
directly from a scenario and an allocation, independently of how the
optimizer represents it internally: user rates, echo power, clutter
interference, beam-pattern mismatch, radar range window, fronthaul loads,
transmit powers, and the total energy objective.  check_feasibility ties
them together into a labeled per-constraint report.

Constraint numbering used in reports:
  C1  per-user effective rate over the frame meets the QoS floor
  C2  per-pair received echo power >= P_req
  C3  per-pair clutter interference <= P_tol
  C4  per-pair beam mismatch <= eps
  C5  per-RRH communication-phase transmit power <= P_maxT
  C6  per-pair sensing-phase transmit power <= P_maxT
  C7  sensing covariances positive semidefinite
  C8  per-RRH communication-phase fronthaul load <= C_maxF
  C9  sensing-phase fronthaul load <= C_maxF
  C10 pulse width >= t_min
  C11 pair distance inside the radar range window [R_min, R_max]
  C12 time split strictly inside (0, 1)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .model import Scenario, steering_vector
from .units import dbm_to_watt, watt_to_dbm

__all__ = [
    "AllocationSolution", "ConstraintRow", "ConstraintReport",
    "achievable_rate", "rate_vector", "echo_power", "clutter_interference",
    "beam_mismatch", "sensing_range", "comm_fronthaul_load",
    "sensing_fronthaul_load", "total_energy", "comm_energy", "sense_energy",
    "support_threshold", "check_feasibility", "dbm_to_watt", "watt_to_dbm",
]


@dataclass
class AllocationSolution:
    """One resource-allocation decision for a scenario.

    Beamformers may be present in vector form (w: K x N_T*J), matrix form
    (W: K x N_T*J x N_T*J), or both (after extraction).  zeta is the relaxed
    or rounded RRH-user selection, rows indexed by RRH.
    """
    eta: float
    t_p: float
    S: np.ndarray                    # (L, N_T, N_T) Hermitian PSD
    xi: np.ndarray                   # (L,) positive scalings
    zeta: np.ndarray                 # (J, K) in [0, 1]
    w: np.ndarray | None = None      # (K, N_T*J) complex
    W: np.ndarray | None = None      # (K, N_T*J, N_T*J) Hermitian PSD

    def validate(self, config: SystemConfig) -> None:
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0,1), got {self.eta}")
        if self.t_p < 0:
            raise ValueError(f"t_p must be nonnegative, got {self.t_p}")
        if self.S.shape != (config.L, config.N_T, config.N_T):
            raise ValueError(f"S has shape {self.S.shape}")
        if self.xi.shape != (config.L,) or np.any(self.xi <= 0):
            raise ValueError("xi must be positive per pair")
        if self.zeta.shape != (config.J, config.K):
            raise ValueError(f"zeta has shape {self.zeta.shape}")
        if np.any(self.zeta < -1e-9) or np.any(self.zeta > 1 + 1e-9):
            raise ValueError("zeta entries must lie in [0, 1]")
        if self.w is not None and self.w.shape != (config.K, config.ntj):
            raise ValueError(f"w has shape {self.w.shape}")
        if self.W is not None and self.W.shape != (config.K, config.ntj, config.ntj):
            raise ValueError(f"W has shape {self.W.shape}")

    def copy(self) -> "AllocationSolution":
        return AllocationSolution(
            self.eta, self.t_p, self.S.copy(), self.xi.copy(), self.zeta.copy(),
            None if self.w is None else self.w.copy(),
            None if self.W is None else self.W.copy())

    def per_user_power(self) -> np.ndarray:
        """||w_k||^2 (or Tr W_k) per user, in W."""
        if self.w is not None:
            return np.einsum("ki,ki->k", self.w.conj(), self.w).real
        if self.W is not None:
            return np.einsum("kii->k", self.W).real
        raise ValueError("solution carries neither w nor W")


@dataclass
class ConstraintRow:
    label: str
    value: float
    bound: float
    sense: str          # "<=" or ">="
    slack: float        # nonnegative iff satisfied exactly
    ok: bool


@dataclass
class ConstraintReport:
    rows: list = field(default_factory=list)
    objective: float = 0.0
    tol_rel: float = 1e-6

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def worst(self) -> "ConstraintRow | None":
        if not self.rows:
            return None
        return min(self.rows, key=lambda r: r.slack)

    def failing(self) -> list:
        return [r for r in self.rows if not r.ok]

    def to_text(self) -> str:
        lines = [f"objective {self.objective:.17g}", f"tol_rel {self.tol_rel:.17g}"]
        for r in self.rows:
            lines.append(f"{r.label}\t{r.value:.17g}\t{r.sense}\t{r.bound:.17g}"
                         f"\t{r.slack:.17g}\t{'pass' if r.ok else 'FAIL'}")
        lines.append(f"overall {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def add(self, label: str, value: float, sense: str, bound: float) -> None:
        if sense == "<=":
            slack = bound - value
        elif sense == ">=":
            slack = value - bound
        else:
            raise ValueError(f"sense must be <= or >=, got {sense!r}")
        # Relative tolerance against the bound; absolute fallback at bound 0.
        tol = self.tol_rel * abs(bound) if bound != 0 else 1e-12
        self.rows.append(ConstraintRow(label, float(value), float(bound), sense,
                                       float(slack), bool(slack >= -tol)))


# ---------------------------------------------------------------------------
# Individual metrics
# ---------------------------------------------------------------------------

def achievable_rate(k: int, h: np.ndarray, w: np.ndarray, sigma2: float) -> float:
    """Downlink rate of user k in bits/s/Hz under beamformers w (K rows)."""
    hk = h[k]
    gains = np.abs(w.conj() @ hk) ** 2
    interference = float(gains.sum() - gains[k])
    return math.log2(1.0 + gains[k] / (interference + sigma2))


def rate_vector(h: np.ndarray, w: np.ndarray, sigma2: float) -> np.ndarray:
    return np.array([achievable_rate(k, h, w, sigma2) for k in range(h.shape[0])])


def echo_power(l: int, scenario: Scenario, S_l: np.ndarray) -> float:
    """Received echo power of pair l: Tr(G S G^H) for the round-trip G."""
    G = scenario.G[l, l, l]
    return float(np.trace(G @ S_l @ G.conj().T).real)


def clutter_interference(l: int, scenario: Scenario, S: np.ndarray) -> float:
    """Interference power at the receiver of pair l.

    Sums, over every other pair q: the echoes of pair q's signal off all
    location pairs, the own signal's echoes off unintended locations, and
    the cross term between the desired echo and the own-signal clutter.
    Real part of the trace sum; all S PSD makes the total nonnegative.
    """
    L = S.shape[0]
    G = scenario.G
    total = 0.0 + 0.0j
    for q in range(L):
        if q == l:
            continue
        for p in range(L):
            for pp in range(L):
                total += np.trace(G[l, p, q] @ S[q] @ G[l, pp, q].conj().T)
        for qp in range(L):
            total += np.trace(G[l, q, l] @ S[l] @ G[l, qp, l].conj().T)
        total += np.trace(G[l, l, l] @ S[l] @ G[l, q, l].conj().T)
    return float(total.real)


def _pattern_gains(S: np.ndarray, pattern, omega: float) -> np.ndarray:
    a_grid = getattr(pattern, "a_grid", None)
    if a_grid is None:
        n_t = S.shape[0]
        a_grid = np.stack([steering_vector(t, n_t, omega) for t in pattern.directions])
    return np.einsum("id,de,ie->i", a_grid.conj(), S, a_grid).real


def beam_mismatch(S: np.ndarray, xi: float, pattern, omega: float = 0.5) -> float:
    """Total absolute deviation between the xi-scaled ideal pattern and the gains.

    The scaling xi brings the unit-level ideal mask to the power scale of the
    actual pattern, so the budget is spent in achieved-gain units: a beam is
    allowed to deviate in proportion to how strongly it radiates.  (Scaling
    the gains onto the fixed unit mask instead would demand a shape accuracy
    that a small array cannot deliver at any power: for a 6-element uniform
    linear array the best achievable unit-level deviation over the forward
    grid is about 0.34 per pass direction, more than three times the default
    tolerance.)
    """
    gains = _pattern_gains(S, pattern, omega)
    return float(np.sum(np.abs(xi * pattern.values.astype(float) - gains)))


def sensing_range(eta: float, T: float, M: int, t_p: float, c: float = 3e8):
    """Blind range and maximum range of one sensing round."""
    slot = eta * T / M
    if not 0 < t_p < slot:
        raise ValueError(f"need 0 < t_p < eta*T/M, got t_p={t_p}, slot={slot}")
    return c * t_p / 2.0, c * (slot - t_p) / 2.0


def support_threshold(config: SystemConfig) -> float:
    """Amplitude below which a per-RRH beamformer block counts as unused."""
    return 1e-6 * math.sqrt(config.P_maxT)


def comm_fronthaul_load(j: int, solution: AllocationSolution,
                        config: SystemConfig, use_support: bool = False) -> float:
    """Communication-phase fronthaul load of RRH j in bits/s/Hz.

    Served users each contribute their QoS rate, concentrated into the
    (1-eta) fraction of the frame.  Service is indicated by zeta (relaxed
    form) or, with use_support, by the norm of the RRH's beamformer block.
    """
    if use_support:
        if solution.w is None:
            raise ValueError("support-form load needs vector beamformers")
        N = config.N_T
        blk = solution.w[:, j * N:(j + 1) * N]
        served = np.linalg.norm(blk, axis=1) > support_threshold(config)
        count = float(np.sum(served))
    else:
        count = float(np.sum(solution.zeta[j]))
    return count * config.R_req / (1.0 - solution.eta)


def sensing_fronthaul_load(eta: float, t_p: float, config: SystemConfig) -> float:
    """Sensing-phase fronthaul load in bits/s/Hz (same for every pair).

    Quantized echo samples of the range window, N_b bits per sample at range
    resolution Delta_R, shipped over the listening window of each round.
    """
    r_min, r_max = sensing_range(eta, config.T, config.M, t_p, config.c)
    listen = eta * config.T / config.M - t_p
    return (r_max - r_min) * config.N_b / (config.delta_R * listen * config.W_F)


def comm_energy(solution: AllocationSolution, config: SystemConfig) -> float:
    return (1.0 - solution.eta) * config.T * float(np.sum(solution.per_user_power()))


def sense_energy(solution: AllocationSolution, config: SystemConfig) -> float:
    tr = float(np.einsum("lii->l", solution.S).real.sum())
    return config.M * solution.t_p * tr


def total_energy(solution: AllocationSolution, config: SystemConfig) -> float:
    """Objective: transmit energy of both phases over one frame, in Joule."""
    return comm_energy(solution, config) + sense_energy(solution, config)


# ---------------------------------------------------------------------------
# Feasibility report
# ---------------------------------------------------------------------------

def check_feasibility(solution: AllocationSolution, scenario: Scenario,
                      config: SystemConfig, tol_rel: float = 1e-6) -> ConstraintReport:
    """Evaluate every constraint on an extracted (vector-form) solution."""
    solution.validate(config)
    if solution.w is None:
        raise ValueError("check_feasibility expects vector-form beamformers")
    J, K, L, N = config.J, config.K, config.L, config.N_T
    rep = ConstraintReport(tol_rel=tol_rel)
    rep.objective = total_energy(solution, config)
    eta, t_p = solution.eta, solution.t_p

    rate_floor = config.R_req / (1.0 - eta)
    for k in range(K):
        rep.add(f"C1[{k}]", achievable_rate(k, scenario.h, solution.w, config.sigma_U),
                ">=", rate_floor)
    for l in range(L):
        rep.add(f"C2[{l}]", echo_power(l, scenario, solution.S[l]), ">=", config.P_req)
    for l in range(L):
        rep.add(f"C3[{l}]", clutter_interference(l, scenario, solution.S), "<=", config.P_tol)
    for l in range(L):
        pat = scenario.patterns[l]
        rep.add(f"C4[{l}]", beam_mismatch(solution.S[l], solution.xi[l], pat, config.omega),
                "<=", pat.eps)
    for j in range(J):
        blk = solution.w[:, j * N:(j + 1) * N]
        rep.add(f"C5[{j}]", float(np.sum(np.abs(blk) ** 2)), "<=", config.P_maxT)
    for l in range(L):
        rep.add(f"C6[{l}]", float(np.trace(solution.S[l]).real), "<=", config.P_maxT)
    for l in range(L):
        eigs = np.linalg.eigvalsh(solution.S[l])
        tr = max(float(np.trace(solution.S[l]).real), 0.0)
        rep.add(f"C7[{l}]", float(eigs[0]), ">=", -1e-9 * tr)
    for j in range(J):
        rep.add(f"C8[{j}]", comm_fronthaul_load(j, solution, config), "<=", config.C_maxF)
    if 0 < t_p < eta * config.T / config.M:
        rep.add("C9", sensing_fronthaul_load(eta, t_p, config), "<=", config.C_maxF)
        r_min, r_max = sensing_range(eta, config.T, config.M, t_p, config.c)
        for l in range(L):
            d = scenario.d_sense[l, l]
            rep.add(f"C11lo[{l}]", d, ">=", r_min)
            rep.add(f"C11hi[{l}]", d, "<=", r_max)
    else:
        # Degenerate timing: no listening window at all.
        rep.add("C9", math.inf, "<=", config.C_maxF)
        for l in range(L):
            rep.add(f"C11hi[{l}]", scenario.d_sense[l, l], "<=", 0.0)
    rep.add("C10", t_p, ">=", config.t_min)
    rep.add("C12lo", eta, ">=", 0.0)
    rep.add("C12hi", eta, "<=", 1.0)
    return rep
