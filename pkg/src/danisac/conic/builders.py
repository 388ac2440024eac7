"""Builders translating the two alternating-optimization blocks into conic form.

Block 1 (beams and selection): at a fixed time split eta, pulse width t_p,
and pattern scalings xi, the energy objective is linear in the beamforming
covariances {W_k}, sensing covariances {S_l}, and relaxed selections zeta,
and every constraint is affine over Hermitian PSD blocks, so the rank-relaxed
subproblem is an SDP.  The per-user rate floors turn into SINR thresholds
through the monotone map chi = 2^(R/(1-eta)) - 1, and the absolute values in
the beam-mismatch budget split into auxiliary nonnegative scalars (stop-band
deviations need no auxiliaries: the scaled ideal mask is zero there and a PSD
covariance has nonnegative gains, so |xi*0 - g| = g exactly).

Block 2 (timing and selection): with beams fixed, the remaining problem in
(eta, t_p, zeta) becomes a small LP after clearing the positive denominators
from the rate floors and the sensing fronthaul cap.  The pattern scalings xi
do not appear in the LP; fit_scaling solves their one-dimensional piecewise
linear fit exactly by a weighted median.

The binary-selection penalty mu * sum zeta(1 - zeta), linearized at the
previous iterate, contributes mu * sum[zeta - 2 zeta_prev zeta + zeta_prev^2]
to both objectives; the constant part is kept so reported objectives line up
across iterations.
"""
from __future__ import annotations

import math

import numpy as np

from ..config import SystemConfig
from ..metrics import _pattern_gains
from ..model import Scenario
from .problem import ConicProblem

__all__ = [
    "InfeasibleSubproblem", "build_block1", "build_block2", "fit_scaling",
    "rate_exponent", "matrix_rates", "echo_coefficient", "clutter_coefficients",
    "power_selector", "eta_lower_bound", "XI_MIN", "ETA_CAP",
]

# Strict positivity floor for the pattern scaling and the open-interval cap
# on the sensing fraction inside block 2.
XI_MIN = 1e-8
ETA_CAP = 1.0 - 1e-6

# Largest admissible exponent in 2^(R/(1-eta)); beyond this the SINR
# threshold exceeds the double-precision integer range and the subproblem
# is numerically meaningless.
_EXP_CAP = 52.0


class InfeasibleSubproblem(RuntimeError):
    """A subproblem is provably infeasible before any solve."""


def rate_exponent(r_req: float, eta: float) -> float:
    """SINR threshold chi = 2^(r/(1-eta)) - 1 for rate r over the comm fraction."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0,1), got {eta}")
    expo = r_req / (1.0 - eta)
    if expo >= _EXP_CAP:
        raise ValueError(
            f"eta={eta} leaves a comm fraction so small that the SINR "
            f"threshold exponent {expo:.3g} exceeds the {_EXP_CAP:.0f}-bit cap")
    return 2.0 ** expo - 1.0


def power_selector(j: int, config: SystemConfig) -> np.ndarray:
    """Diagonal selector picking RRH j's antenna block out of the stacked array."""
    D = np.zeros((config.ntj, config.ntj))
    N = config.N_T
    D[j * N:(j + 1) * N, j * N:(j + 1) * N] = np.eye(N)
    return D


def echo_coefficient(l: int, scenario: Scenario) -> np.ndarray:
    """Hermitian Q_l with echo power = Tr(Q_l S_l) for pair l."""
    G = scenario.G[l, l, l]
    return G.conj().T @ G


def clutter_coefficients(l: int, scenario: Scenario) -> list:
    """Hermitian matrices B_q with clutter at pair l = sum_q Tr(B_q S_q).

    Mirrors the trace sum of the clutter evaluator term by term: echoes of
    other pairs' signals off all locations, plus the own signal's stray
    reflections; taking the real part of the complex trace sum equals using
    the Hermitian part of the accumulated coefficient.
    """
    G = scenario.G
    L = G.shape[0]
    N = G.shape[-1]
    coeffs = [np.zeros((N, N), dtype=complex) for _ in range(L)]
    own = np.zeros((N, N), dtype=complex)
    echo_sum = np.sum(G[l, :, l], axis=0)
    for q in range(L):
        if q == l:
            continue
        F = np.sum(G[l, :, q], axis=0)
        coeffs[q] += F.conj().T @ F
        own += echo_sum.conj().T @ G[l, q, l] + G[l, q, l].conj().T @ G[l, l, l]
    coeffs[l] = 0.5 * (own + own.conj().T)
    return coeffs


def matrix_rates(scenario: Scenario, W: np.ndarray, sigma2: float) -> np.ndarray:
    """Per-user achievable rates with beamformers in covariance form."""
    K = W.shape[0]
    rates = np.empty(K)
    for k in range(K):
        hk = scenario.h[k]
        gains = np.maximum(
            [float(np.real(hk.conj() @ W[r] @ hk)) for r in range(K)], 0.0)
        interference = float(gains.sum() - gains[k])
        rates[k] = math.log2(1.0 + gains[k] / (interference + sigma2))
    return rates


def eta_lower_bound(scenario: Scenario, config: SystemConfig) -> float:
    """Smallest eta for which the radar range window can contain every pair.

    Each sensing round must fit the shortest admissible pulse plus the
    round trip to the farthest paired location.
    """
    d_max = float(np.max(scenario.pair_distance))
    return config.M / config.T * (config.t_min + 2.0 * d_max / config.c)


def _check_zeta_prev(zeta_prev, config: SystemConfig) -> np.ndarray:
    zp = np.asarray(zeta_prev, dtype=float)
    if zp.shape != (config.J, config.K):
        raise ValueError(f"zeta_prev must have shape (J,K), got {zp.shape}")
    if not np.all(np.isfinite(zp)):
        raise ValueError("zeta_prev entries must be finite")
    return zp


def _add_scaled(prob: ConicProblem, label: str, terms: dict, sense: str,
                rhs: float, scale: float) -> None:
    """Add a constraint row divided by a positive scale.

    The physical bounds span fourteen orders of magnitude (clutter ceiling
    1e-13 W against power budgets of tens of W); normalizing every row to an
    O(1) bound keeps each one individually meaningful under the solver's
    norm-wise residual tolerance.
    """
    prob.add_constraint(label, {n: v / scale for n, v in terms.items()},
                        sense, rhs / scale)


def _penalty_terms(prob: ConicProblem, terms: dict, zeta_prev: np.ndarray,
                   config: SystemConfig) -> float:
    """Declare zeta scalars, add linearized penalty terms, return the constant."""
    J, K = config.J, config.K
    for j in range(J):
        for k in range(K):
            name = prob.add_nonneg(f"zeta[{j},{k}]")
            terms[name] = config.mu * (1.0 - 2.0 * zeta_prev[j, k])
    return config.mu * float(np.sum(zeta_prev ** 2))


def _zeta_box_rows(prob: ConicProblem, config: SystemConfig) -> None:
    for j in range(config.J):
        for k in range(config.K):
            prob.add_constraint(f"C14a[{j},{k}]", {f"zeta[{j},{k}]": 1.0}, "<=", 1.0)


def build_block1(scenario: Scenario, config: SystemConfig, eta: float,
                 t_p: float, xi, zeta_prev) -> ConicProblem:
    """SDP over beam covariances and selections at a fixed time split.

    Variables: Hermitian PSD W_k (side N_T*J) per user, S_l (side N_T) per
    sensing pair, selections zeta in [0,1], and one auxiliary nonnegative
    scalar per pass-band direction for the mismatch absolute values.  The
    rank constraints on W_k are dropped (semidefinite relaxation).
    """
    cfg = config
    J, K, L, N = cfg.J, cfg.K, cfg.L, cfg.N_T
    chi = rate_exponent(cfg.R_req, eta)
    slot = eta * cfg.T / cfg.M
    if not 0.0 < t_p < slot:
        raise ValueError(f"need 0 < t_p < eta*T/M, got t_p={t_p}, slot={slot}")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (L,) or np.any(xi <= 0) or not np.all(np.isfinite(xi)):
        raise ValueError("xi must be a positive finite vector of length L")
    zeta_prev = _check_zeta_prev(zeta_prev, cfg)

    prob = ConicProblem()
    for k in range(K):
        prob.add_hermitian_block(f"W[{k}]", cfg.ntj)
    for l in range(L):
        prob.add_hermitian_block(f"S[{l}]", N)

    obj = {}
    for k in range(K):
        obj[f"W[{k}]"] = (1.0 - eta) * cfg.T * np.eye(cfg.ntj)
    for l in range(L):
        obj[f"S[{l}]"] = cfg.M * t_p * np.eye(N)
    constant = _penalty_terms(prob, obj, zeta_prev, cfg)
    for l in range(L):
        for i in scenario.patterns[l].pass_idx:
            prob.add_nonneg(f"u[{l},{i}]")
    prob.set_objective(obj, constant)

    # C1: per-user SINR thresholds, affine after multiplying out the
    # interference denominator.
    for k in range(K):
        hk = scenario.h[k]
        Hk = np.outer(hk, hk.conj())
        terms = {f"W[{k}]": Hk}
        for r in range(K):
            if r != k:
                terms[f"W[{r}]"] = -chi * Hk
        prob.add_constraint(f"C1[{k}]", terms, ">=", chi * cfg.sigma_U)

    # C2/C3: echo floor and clutter ceiling per pair.
    for l in range(L):
        prob.add_constraint(f"C2[{l}]", {f"S[{l}]": echo_coefficient(l, scenario)},
                            ">=", cfg.P_req)
    if L >= 2:
        for l in range(L):
            coeffs = clutter_coefficients(l, scenario)
            prob.add_constraint(f"C3[{l}]",
                                {f"S[{q}]": coeffs[q] for q in range(L)},
                                "<=", cfg.P_tol)

    # C4: beam mismatch budget against the xi-scaled ideal mask.  Pass-band
    # deviations |xi - gain| use the two-sided auxiliary split; stop-band
    # targets are zero, so those absolute values are just the (nonnegative)
    # gains and enter exactly through the summed stop-band quadratic form.
    for l in range(L):
        pat = scenario.patterns[l]
        a = pat.a_grid
        budget = {}
        for i in pat.pass_idx:
            Ai = np.outer(a[i], a[i].conj())
            target = xi[l] * float(pat.values[i])
            prob.add_constraint(f"C4+[{l},{i}]",
                                {f"S[{l}]": Ai, f"u[{l},{i}]": 1.0}, ">=", target)
            prob.add_constraint(f"C4-[{l},{i}]",
                                {f"S[{l}]": Ai, f"u[{l},{i}]": -1.0}, "<=", target)
            budget[f"u[{l},{i}]"] = 1.0
        stop = pat.stop_idx
        if stop.size:
            B = a[stop]
            budget[f"S[{l}]"] = B.T @ B.conj()
        prob.add_constraint(f"C4[{l}]", budget, "<=", pat.eps)

    # C5/C6: per-RRH power budgets in the two phases.
    if K:
        for j in range(J):
            D = power_selector(j, cfg)
            prob.add_constraint(f"C5[{j}]", {f"W[{k}]": D for k in range(K)},
                                "<=", cfg.P_maxT)
    for l in range(L):
        prob.add_constraint(f"C6[{l}]", {f"S[{l}]": np.eye(N)}, "<=", cfg.P_maxT)

    # C8: comm fronthaul caps at the fixed eta; C13 ties beam power to the
    # selections; C14a closes the zeta box.
    rate_floor = cfg.R_req / (1.0 - eta)
    for j in range(J):
        if K:
            prob.add_constraint(
                f"C8[{j}]", {f"zeta[{j},{k}]": rate_floor for k in range(K)},
                "<=", cfg.C_maxF)
    for j in range(J):
        D = power_selector(j, cfg)
        for k in range(K):
            prob.add_constraint(
                f"C13[{j},{k}]",
                {f"W[{k}]": D, f"zeta[{j},{k}]": -cfg.P_maxT}, "<=", 0.0)
    _zeta_box_rows(prob, cfg)
    return prob


def build_block2(scenario: Scenario, config: SystemConfig, W: np.ndarray,
                 S: np.ndarray, zeta_prev) -> ConicProblem:
    """LP over the time split, pulse width, and selections at fixed beams.

    The per-user rate floors become exact upper bounds eta <= 1 - R/R_k(W);
    the sensing fronthaul cap is multiplied through its positive listening
    window.  Raises InfeasibleSubproblem when some user's rate cannot reach
    the floor at any time split.
    """
    cfg = config
    J, K, L = cfg.J, cfg.K, cfg.L
    W = np.asarray(W, dtype=complex).reshape(K, cfg.ntj, cfg.ntj)
    S = np.asarray(S, dtype=complex).reshape(L, cfg.N_T, cfg.N_T)
    zeta_prev = _check_zeta_prev(zeta_prev, cfg)

    rates = matrix_rates(scenario, W, cfg.sigma_U)
    bad = [k for k in range(K) if rates[k] <= cfg.R_req]
    if bad:
        detail = ", ".join(f"user {k}: {rates[k]:.4g}" for k in bad)
        raise InfeasibleSubproblem(
            f"no time split meets the rate floor {cfg.R_req} at the given "
            f"beamformers ({detail})")

    p_comm = float(np.einsum("kii->", W).real)
    p_sense = float(np.einsum("lii->", S).real)

    prob = ConicProblem()
    prob.add_free("eta")
    prob.add_free("t_p")
    obj = {"eta": -cfg.T * p_comm, "t_p": cfg.M * p_sense}
    constant = cfg.T * p_comm + _penalty_terms(prob, obj, zeta_prev, cfg)
    prob.set_objective(obj, constant)

    for k in range(K):
        prob.add_constraint(f"C1[{k}]", {"eta": 1.0}, "<=",
                            1.0 - cfg.R_req / rates[k])

    # C8 cleared of the comm fraction: sum_k zeta R + C_maxF eta <= C_maxF.
    for j in range(J):
        terms = {f"zeta[{j},{k}]": cfg.R_req for k in range(K)}
        terms["eta"] = cfg.C_maxF
        prob.add_constraint(f"C8[{j}]", terms, "<=", cfg.C_maxF)

    # C9 cleared of the listening window: c N_b (slot - 2 t_p) <=
    # 2 dR W_F C_maxF (slot - t_p) with slot = eta T / M.
    cap = 2.0 * cfg.delta_R * cfg.W_F * cfg.C_maxF
    prob.add_constraint(
        "C9",
        {"eta": (cfg.c * cfg.N_b - cap) * cfg.T / cfg.M,
         "t_p": cap - 2.0 * cfg.c * cfg.N_b},
        "<=", 0.0)

    prob.add_constraint("C10", {"t_p": 1.0}, ">=", cfg.t_min)
    for l in range(L):
        d = scenario.d_sense[l, l]
        prob.add_constraint(f"C11lo[{l}]", {"t_p": 1.0}, "<=", 2.0 * d / cfg.c)
        prob.add_constraint(f"C11hi[{l}]", {"eta": cfg.T / cfg.M, "t_p": -1.0},
                            ">=", 2.0 * d / cfg.c)
    prob.add_constraint("C12lo", {"eta": 1.0}, ">=",
                        eta_lower_bound(scenario, cfg))
    prob.add_constraint("C12hi", {"eta": 1.0}, "<=", ETA_CAP)

    for j in range(J):
        D = power_selector(j, cfg)
        for k in range(K):
            p_jk = float(np.real(np.einsum("ii->", D @ W[k] @ D)))
            prob.add_constraint(f"C13[{j},{k}]", {f"zeta[{j},{k}]": cfg.P_maxT},
                                ">=", p_jk)
    _zeta_box_rows(prob, cfg)
    return prob


def fit_scaling(S: np.ndarray, pattern, omega: float = 0.5,
                xi_min: float = XI_MIN) -> float:
    """Exact scaling that best matches the ideal mask to the gains of S.

    Minimizes sum_i |xi P_i - g_i| over xi >= xi_min.  The objective is
    piecewise linear and convex in xi with kinks at g_i / P_i, so the
    minimizer is the weighted median of those breakpoints under weights P_i;
    stop-band directions (P_i = 0) contribute constants and drop out.  With
    a binary mask this is the plain median of the pass-band gains.
    """
    gains = np.maximum(_pattern_gains(S, pattern, omega), 0.0)
    targets = pattern.values.astype(float)
    mask = targets > 0.0
    if not np.any(mask):
        return float(xi_min)
    breaks = gains[mask] / targets[mask]
    weights = targets[mask]
    order = np.argsort(breaks, kind="stable")
    breaks, weights = breaks[order], weights[order]
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return float(max(breaks[idx], xi_min))
