import math

import numpy as np
import pytest
from helpers_mc import mc_clutter, random_clutter_instance

from danisac.config import SystemConfig
from danisac.metrics import (
    AllocationSolution,
    achievable_rate,
    beam_mismatch,
    check_feasibility,
    clutter_interference,
    comm_energy,
    comm_fronthaul_load,
    echo_power,
    rate_vector,
    sense_energy,
    sensing_fronthaul_load,
    sensing_range,
    total_energy,
)
from danisac.model import build_scenario, generate_scenario, ideal_pattern


def vertex_scenario(n_t=1, j=1, k=1):
    """Target sitting on its RRH (distance clamps to 1 m, beta = 1 at defaults)."""
    cfg = SystemConfig(J=j, K=k, L=1, N_T=n_t)
    vert = cfg.side / math.sqrt(3.0) * np.array([math.cos(math.pi / 2), math.sin(math.pi / 2)])
    return cfg, build_scenario(cfg, np.zeros((k, 2)), vert.reshape(1, 2),
                               np.ones((k, cfg.ntj)))


# ---------------------------------------------------------------------------
# achievable_rate
# ---------------------------------------------------------------------------

def test_rate_single_user_unit_snr():
    h = np.array([[1.0 + 0j]])
    w = np.array([[1.0 + 0j]])
    assert achievable_rate(0, h, w, sigma2=1.0) == pytest.approx(1.0, rel=1e-12)


def test_rate_single_user_snr_three():
    h = np.array([[1.0 + 0j]])
    w = np.array([[math.sqrt(3.0) + 0j]])
    assert achievable_rate(0, h, w, sigma2=1.0) == pytest.approx(2.0, rel=1e-12)


def test_rate_with_interferer():
    # Signal power 2 sigma^2, one interferer at sigma^2: log2(1 + 2/(1+1)) = 1.
    h = np.array([[1.0 + 0j, 0.0], [0.0, 1.0 + 0j]])
    w = np.array([[math.sqrt(2.0), 0.0], [1.0, 1.0]], dtype=complex)
    assert achievable_rate(0, h, w, sigma2=1.0) == pytest.approx(1.0, rel=1e-12)


def test_rate_monotone_in_own_power():
    rng = np.random.default_rng(0)
    h = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
    w = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
    base = achievable_rate(1, h, w, 0.5)
    w2 = w.copy()
    w2[1] *= 1.3
    assert achievable_rate(1, h, w2, 0.5) > base


def test_rate_vector_matches_scalar():
    rng = np.random.default_rng(1)
    h = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    w = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    rv = rate_vector(h, w, 0.3)
    for k in range(2):
        assert rv[k] == pytest.approx(achievable_rate(k, h, w, 0.3), rel=1e-14)


# ---------------------------------------------------------------------------
# echo_power
# ---------------------------------------------------------------------------

def test_echo_scalar_channel():
    cfg, sc = vertex_scenario(n_t=1)
    assert sc.beta[0, 0] == pytest.approx(1.0, rel=1e-12)
    P = 7.5
    assert echo_power(0, sc, np.array([[P + 0j]])) == pytest.approx(P, rel=1e-12)


def test_echo_zero_signal():
    cfg, sc = vertex_scenario(n_t=2)
    assert echo_power(0, sc, np.zeros((2, 2), dtype=complex)) == 0.0


def test_echo_identity_covariance():
    # beta = 1, a = [1, 1]: beta^2 * N_T * a^H I a = 1 * 2 * 2 = 4.
    cfg, sc = vertex_scenario(n_t=2)
    assert echo_power(0, sc, np.eye(2, dtype=complex)) == pytest.approx(4.0, rel=1e-12)


def test_echo_closed_form_random():
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=4)
    rng = np.random.default_rng(2)
    for l in range(cfg.L):
        A = rng.standard_normal((cfg.N_T, cfg.N_T)) + 1j * rng.standard_normal((cfg.N_T, cfg.N_T))
        S = A @ A.conj().T
        a = sc.g[l, l] / math.sqrt(sc.beta[l, l])
        expect = sc.beta[l, l] ** 2 * cfg.N_T * float((a.conj() @ S @ a).real)
        assert echo_power(l, sc, S) == pytest.approx(expect, rel=1e-10)


def test_echo_linear_in_S():
    cfg, sc = vertex_scenario(n_t=2)
    rng = np.random.default_rng(3)
    A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    S1, S2 = A @ A.conj().T, B @ B.conj().T
    assert echo_power(0, sc, S1 + S2) == pytest.approx(
        echo_power(0, sc, S1) + echo_power(0, sc, S2), rel=1e-12)
    assert echo_power(0, sc, 2.5 * S1) == pytest.approx(2.5 * echo_power(0, sc, S1), rel=1e-12)


# ---------------------------------------------------------------------------
# clutter_interference
# ---------------------------------------------------------------------------

def test_clutter_single_pair_is_zero():
    cfg, sc = vertex_scenario(n_t=2)
    S = np.eye(2, dtype=complex)[None]
    assert clutter_interference(0, sc, S) == 0.0


def test_clutter_zero_signal():
    cfg = SystemConfig(J=2, K=1, L=2, N_T=2)
    sc = generate_scenario(cfg, seed=0)
    assert clutter_interference(0, sc, np.zeros((2, 2, 2), dtype=complex)) == 0.0


def test_clutter_linear_in_other_signal():
    sc, S = random_clutter_instance(0, L=2, n_t=2)
    base = clutter_interference(0, sc, S)
    S2 = S.copy()
    S2[1] *= 3.0
    boosted = clutter_interference(0, sc, S2)
    only_own = S.copy()
    only_own[1] = 0.0
    own_part = clutter_interference(0, sc, only_own)
    # I_0 = own_part + <Phi, S_1>; tripling S_1 triples the second piece.
    assert boosted - own_part == pytest.approx(3.0 * (base - own_part), rel=1e-10)


def test_clutter_matches_monte_carlo():
    for idx, (L, n_t) in enumerate([(2, 2), (3, 2), (2, 3)]):
        sc, S = random_clutter_instance(idx, L=L, n_t=n_t)
        for l in range(L):
            analytic = clutter_interference(l, sc, S)
            mc = mc_clutter(sc, l, S, n_draws=100_000, seed=50 + idx)
            assert mc == pytest.approx(analytic, rel=0.02), (idx, l)


# ---------------------------------------------------------------------------
# beam_mismatch
# ---------------------------------------------------------------------------

def test_mismatch_flat_gain():
    # N_T = 1: gain is 1 in every direction; mismatch is 1 per stop direction.
    pat = ideal_pattern(0.0, 2 * math.pi / 3, 30)  # 10 pass of 30... compute below
    n_pass = pat.n_pass
    n_stop = len(pat.values) - n_pass
    got = beam_mismatch(np.array([[1.0 + 0j]]), 1.0, pat)
    assert got == pytest.approx(n_stop, rel=1e-12)


def test_mismatch_perfect_match_and_zero_S():
    pat = ideal_pattern(0.0, math.pi / 6, 360)
    n_t = 1
    # N_T = 1 gives gain TrS in every direction; on an all-ones pattern the
    # scaled mask xi*1 = 2 matches the gain 2 exactly.
    full = ideal_pattern(0.0, 2 * math.pi - 1e-9, 8)
    assert beam_mismatch(np.array([[2.0 + 0j]]), 2.0, full) == pytest.approx(0.0, abs=1e-12)
    assert beam_mismatch(np.zeros((n_t, n_t), dtype=complex), 1.0, pat) == pytest.approx(
        pat.n_pass, rel=1e-12)


def test_mismatch_uses_pair_grid():
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=6)
    pat = sc.patterns[0]
    S = np.eye(cfg.N_T, dtype=complex)
    # gains are a^H a = N_T in every direction
    expect = float(np.sum(np.abs(0.5 * pat.values - cfg.N_T * np.ones_like(pat.values, dtype=float))))
    assert beam_mismatch(S, 0.5, pat) == pytest.approx(expect, rel=1e-12)


def test_mismatch_convex_midpoint():
    rng = np.random.default_rng(5)
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=7)
    pat = sc.patterns[1]
    for _ in range(10):
        A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        B = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        S1, S2 = A @ A.conj().T, B @ B.conj().T
        mid = beam_mismatch((S1 + S2) / 2, 1.0, pat)
        assert mid <= (beam_mismatch(S1, 1.0, pat) + beam_mismatch(S2, 1.0, pat)) / 2 + 1e-9
        x1, x2 = rng.uniform(0.1, 3, size=2)
        midxi = beam_mismatch(S1, (x1 + x2) / 2, pat)
        assert midxi <= (beam_mismatch(S1, x1, pat) + beam_mismatch(S1, x2, pat)) / 2 + 1e-9


# ---------------------------------------------------------------------------
# sensing_range / fronthaul loads
# ---------------------------------------------------------------------------

def test_range_reference_point():
    r_min, r_max = sensing_range(0.5, 1e-3, 100, 1e-7)
    assert r_min == pytest.approx(15.0, rel=1e-12)
    assert r_max == pytest.approx(735.0, rel=1e-12)


def test_range_symmetric_split():
    r_min, r_max = sensing_range(0.5, 1e-3, 100, 0.5e-3 / 100 / 2)
    assert r_min == pytest.approx(r_max, rel=1e-12)


def test_range_rejects_degenerate():
    with pytest.raises(ValueError):
        sensing_range(0.5, 1e-3, 100, 5e-6)
    with pytest.raises(ValueError):
        sensing_range(0.5, 1e-3, 100, 0.0)


def test_range_limit_full_frame():
    r_min, r_max = sensing_range(1.0 - 1e-12, 1e-3, 100, 1e-12)
    assert r_min < 1e-3
    assert r_max == pytest.approx(1500.0, rel=1e-6)


def make_solution(cfg, eta=0.5, t_p=1e-7, zeta=None, w=None, S=None):
    L, N = cfg.L, cfg.N_T
    return AllocationSolution(
        eta=eta, t_p=t_p,
        S=np.zeros((L, N, N), dtype=complex) if S is None else S,
        xi=np.ones(L),
        zeta=np.zeros((cfg.J, cfg.K)) if zeta is None else zeta,
        w=np.zeros((cfg.K, cfg.ntj), dtype=complex) if w is None else w)


def test_comm_load_examples():
    cfg = SystemConfig(J=1, K=3, L=1, N_T=1)
    zeta = np.array([[1.0, 1.0, 0.0]])
    sol = make_solution(cfg, eta=0.5, zeta=zeta)
    assert comm_fronthaul_load(0, sol, cfg) == pytest.approx(8.0, rel=1e-12)
    sol.zeta[:] = 0.0
    assert comm_fronthaul_load(0, sol, cfg) == 0.0
    sol.zeta[:] = 1.0
    sol.eta = 1e-15
    assert comm_fronthaul_load(0, sol, cfg) == pytest.approx(6.0, rel=1e-9)


def test_comm_load_support_form():
    cfg = SystemConfig(J=2, K=2, L=2, N_T=2)
    w = np.zeros((2, 4), dtype=complex)
    w[0, 0:2] = 1.0   # user 0 served by RRH 0 only
    w[1, 2:4] = 1.0   # user 1 served by RRH 1 only
    sol = make_solution(cfg, eta=0.5, w=w)
    assert comm_fronthaul_load(0, sol, cfg, use_support=True) == pytest.approx(4.0)
    assert comm_fronthaul_load(1, sol, cfg, use_support=True) == pytest.approx(4.0)


def test_sensing_load_reference_point():
    cfg = SystemConfig()
    got = sensing_fronthaul_load(0.5, 1e-7, cfg)
    assert got == pytest.approx(2880.0 / 490.0, rel=1e-12)


def test_sensing_load_zero_and_linear_in_bits():
    cfg = SystemConfig()
    assert sensing_fronthaul_load(0.5, 0.5e-3 / 100 / 2, cfg) == pytest.approx(0.0, abs=1e-12)
    cfg8 = SystemConfig(N_b=8)
    assert sensing_fronthaul_load(0.5, 1e-7, cfg8) == pytest.approx(
        2 * sensing_fronthaul_load(0.5, 1e-7, cfg), rel=1e-12)


def test_sensing_load_eta_shape():
    # Longer sensing slots stretch both the range span (numerator) and the
    # listening window (denominator); the load rises toward the asymptote
    # c*N_b / (2*Delta_R*W_F) and is continuous in t_p on its domain.
    cfg = SystemConfig()
    loads = [sensing_fronthaul_load(e, 1e-7, cfg) for e in (0.2, 0.4, 0.6, 0.8)]
    assert all(a < b for a, b in zip(loads, loads[1:]))
    asymptote = cfg.c * cfg.N_b / (2 * cfg.delta_R * cfg.W_F)
    assert asymptote == pytest.approx(6.0)
    assert all(v < asymptote for v in loads)
    base = sensing_fronthaul_load(0.5, 1e-7, cfg)
    near = sensing_fronthaul_load(0.5, 1e-7 * (1 + 1e-9), cfg)
    assert near == pytest.approx(base, rel=1e-6)


# ---------------------------------------------------------------------------
# total_energy
# ---------------------------------------------------------------------------

def test_energy_reference_point():
    cfg = SystemConfig(K=1, L=1, J=1, N_T=1)
    w = np.array([[math.sqrt(10.0) + 0j]])
    S = np.array([[[1000.0 + 0j]]])
    sol = make_solution(cfg, eta=0.9, t_p=1e-7, w=w, S=S)
    assert comm_energy(sol, cfg) == pytest.approx(1e-3, rel=1e-12)
    assert sense_energy(sol, cfg) == pytest.approx(1e-2, rel=1e-12)
    assert total_energy(sol, cfg) == pytest.approx(1.1e-2, rel=1e-12)


def test_energy_zero_cases():
    cfg = SystemConfig(K=1, L=1, J=1, N_T=1)
    sol = make_solution(cfg)
    assert total_energy(sol, cfg) == 0.0
    sol2 = make_solution(cfg, eta=1 - 1e-16, t_p=0.0,
                         w=np.array([[3.0 + 0j]]), S=np.array([[[5.0 + 0j]]]))
    assert total_energy(sol2, cfg) == pytest.approx(0.0, abs=1e-12)


def test_energy_affine_in_traces():
    cfg = SystemConfig(K=2, L=2, J=2, N_T=2)
    rng = np.random.default_rng(8)
    w = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    S = np.stack([np.eye(2, dtype=complex), 2 * np.eye(2, dtype=complex)])
    sol = make_solution(cfg, eta=0.7, t_p=2e-7, w=w, S=S)
    e0 = total_energy(sol, cfg)
    sol.S = 3 * S
    e1 = total_energy(sol, cfg)
    # sensing part scales by 3, comm part unchanged
    cs = comm_energy(sol, cfg)
    assert e1 - cs == pytest.approx(3 * (e0 - cs), rel=1e-12)


def test_matrix_and_vector_energy_agree():
    cfg = SystemConfig(K=2, L=1, J=1, N_T=3)
    rng = np.random.default_rng(9)
    w = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    sol_v = make_solution(cfg, w=w)
    sol_m = AllocationSolution(eta=0.5, t_p=1e-7, S=sol_v.S, xi=np.ones(1),
                               zeta=np.zeros((1, 2)),
                               W=np.stack([np.outer(wk, wk.conj()) for wk in w]))
    assert total_energy(sol_m, cfg) == pytest.approx(total_energy(sol_v, cfg), rel=1e-12)


# ---------------------------------------------------------------------------
# check_feasibility
# ---------------------------------------------------------------------------

def test_report_zero_power_solution():
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=11)
    sol = make_solution(cfg)
    rep = check_feasibility(sol, sc, cfg)
    status = {r.label: r.ok for r in rep.rows}
    assert not status["C1[0]"] and not status["C2[0]"]
    assert status["C3[0]"] and status["C5[0]"] and status["C6[0]"] and status["C7[0]"]
    assert status["C10"] and status["C12lo"] and status["C12hi"]
    assert not rep.passed
    assert rep.objective == 0.0


def test_report_c11_perturbation_flips_timing_rows():
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=11)
    d_max = max(sc.d_sense[l, l] for l in range(cfg.L))
    d_min = min(sc.d_sense[l, l] for l in range(cfg.L))
    # Timing that satisfies C9/C10/C11 comfortably.
    t_p = max(cfg.t_min, 13.0 / 12.0 * 2 * d_max / cfg.c / 12.0)
    eta_ok = cfg.M / cfg.T * (13.0 / 12.0) * (2 * d_max / cfg.c) * 1.05
    sol = make_solution(cfg, eta=eta_ok, t_p=max(cfg.t_min, eta_ok * cfg.T / (13 * cfg.M)))
    assert d_min > 15.0
    rep1 = check_feasibility(sol, sc, cfg)
    ok1 = {r.label: r.ok for r in rep1.rows}
    assert ok1["C9"] and ok1["C10"]
    assert all(ok1[f"C11lo[{l}]"] and ok1[f"C11hi[{l}]"] for l in range(cfg.L))
    # Shrink eta so the farthest pair's echo no longer fits the round.
    sol_bad = make_solution(cfg, eta=eta_ok / 2, t_p=sol.t_p)
    rep2 = check_feasibility(sol_bad, sc, cfg)
    ok2 = {r.label: r.ok for r in rep2.rows}
    flipped = {lbl for lbl in ok1 if ok1[lbl] and not ok2[lbl]}
    assert any(lbl.startswith("C11hi") for lbl in flipped)
    assert all(lbl.startswith(("C11", "C9")) for lbl in flipped)


def test_report_text_round_trip_fields():
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=11)
    rep = check_feasibility(make_solution(cfg), sc, cfg)
    text = rep.to_text()
    assert text.startswith("objective ")
    assert "overall FAIL" in text
    assert text.count("\n") == len(rep.rows) + 3
    for row in rep.rows:
        assert row.label in text


def test_report_slack_sign_convention():
    cfg = SystemConfig()
    sc = generate_scenario(cfg, seed=11)
    rep = check_feasibility(make_solution(cfg), sc, cfg)
    for r in rep.rows:
        if r.sense == "<=":
            assert r.slack == pytest.approx(r.bound - r.value, rel=1e-12, abs=1e-300)
        else:
            assert r.slack == pytest.approx(r.value - r.bound, rel=1e-12, abs=1e-300)


def test_report_rejects_matrix_only_solution():
    cfg = SystemConfig(K=1, L=1, J=1, N_T=2)
    sc = generate_scenario(cfg, seed=0)
    sol = AllocationSolution(eta=0.5, t_p=1e-7, S=np.zeros((1, 2, 2), dtype=complex),
                             xi=np.ones(1), zeta=np.zeros((1, 1)),
                             W=np.zeros((1, 2, 2), dtype=complex))
    with pytest.raises(ValueError):
        check_feasibility(sol, sc, cfg)
