"""Monte Carlo oracle for the clutter interference metric.

Independent reduction of the sensing-phase signal model: draw the Gaussian
sensing waveforms, form the received desired-echo and clutter vectors
explicitly, and estimate the interference as the expected excess received
power over the desired echo alone,

    I_l  =  E ||desired + clutter||^2  -  E ||desired||^2,

which includes the cross term between the desired echo and the own-signal
clutter that a clutter-only power average would miss.
"""
import numpy as np


def draw_gaussian(rng, chol, n):
    dim = chol.shape[0]
    z = (rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))) / np.sqrt(2.0)
    return z @ chol.conj().T


def mc_clutter(scenario, l, S, n_draws=100_000, seed=1234):
    """Monte Carlo estimate of the interference power at the receiver of pair l."""
    L = S.shape[0]
    G = scenario.G
    rng = np.random.default_rng(seed)
    chols = []
    for q in range(L):
        # Stabilized Cholesky factor of S_q (S PSD up to round-off).
        w, V = np.linalg.eigh(S[q])
        w = np.clip(w, 0.0, None)
        chols.append(V * np.sqrt(w))
    s = [draw_gaussian(rng, chols[q], n_draws) for q in range(L)]

    desired = s[l] @ G[l, l, l].conj().T
    received = desired.copy()
    for q in range(L):
        if q == l:
            continue
        F = np.sum(G[l, :, q], axis=0)
        received += s[q] @ F.conj().T
        received += s[l] @ G[l, q, l].conj().T
    p_total = np.mean(np.sum(np.abs(received) ** 2, axis=1))
    p_desired = np.mean(np.sum(np.abs(desired) ** 2, axis=1))
    return float(p_total - p_desired)


def random_clutter_instance(idx, L=2, n_t=2):
    """Seeded random scenario + sensing covariances for oracle comparisons."""
    from danisac.config import SystemConfig
    from danisac.model import generate_scenario

    cfg = SystemConfig(J=max(L, 2), K=1, L=L, N_T=n_t)
    sc = generate_scenario(cfg, seed=9000 + idx)
    rng = np.random.default_rng(idx)
    S = np.empty((L, n_t, n_t), dtype=complex)
    for q in range(L):
        A = rng.standard_normal((n_t, n_t)) + 1j * rng.standard_normal((n_t, n_t))
        S[q] = A @ A.conj().T
    # Scale so echo and clutter land at comparable, well-conditioned magnitudes.
    scale = 1.0 / max(np.abs(sc.beta).max() ** 2, 1e-300)
    return sc, S * scale
