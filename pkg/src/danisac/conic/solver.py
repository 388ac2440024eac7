"""Interior-point solver for the standard-form cone programs built here.

The method is a homogeneous self-dual embedding: iterate on
(x, y, z, tau, kappa) driving

    A x - tau b = 0,   A' y + z - tau c = 0,   c' x - b' y + kappa = 0,

with x in K, z in K* and tau, kappa >= 0.  At a solution either tau > 0
(rescale by 1/tau for an optimal primal-dual pair) or kappa > 0, in which
case b' y > 0 certifies primal infeasibility and c' x < 0 certifies dual
infeasibility (an unbounded primal).  Steps are Mehrotra
predictor-corrector Newton directions under Nesterov-Todd scaling, so one
real symmetric-cone core serves the nonnegative orthant and all PSD blocks
uniformly.

Each Newton solve eliminates z and the cone part of x, leaving a bordered
Schur system in (free x, y) that is LU-factored once per iteration and
reused for the predictor, the corrector, and the extra right-hand side of
the two-solve tau update; iterative refinement against the unregularized
matrix recovers the accuracy lost to the static regularization.

Input data is Ruiz-equilibrated first (each PSD block scaled by one scalar
so the cone geometry survives), but every reported certificate - primal
residual, dual residual, relative gap - is recomputed on the original,
unscaled data, so "optimal" always means the returned values themselves
satisfy the tolerance.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigvalsh, lu_factor, lu_solve, solve_triangular, svd

from . import kernels
from .embedding import smat, svec
from .problem import CompiledConic, ConicProblem

_TAU_COLLAPSE = 1e-10
_STEP_DAMP = 0.99
_MIN_STEP = 1e-7
_REFINE_PASSES = 4


@dataclass
class ConicSolution:
    """Solver outcome: status, values, and independently checkable certificates."""

    status: str
    objective: Optional[float]
    dual_objective: Optional[float]
    values: Dict[str, object] = field(default_factory=dict)
    primal_residual: float = np.inf
    dual_residual: float = np.inf
    rel_gap: float = np.inf
    iterations: int = 0
    detail: str = ""
    # Raw standard-form vectors at the reported point, for auditing the
    # certificates against the compiled data.
    x_raw: Optional[np.ndarray] = None
    y_raw: Optional[np.ndarray] = None
    z_raw: Optional[np.ndarray] = None

    def value(self, name: str):
        return self.values[name]

    @property
    def certificates(self):
        return (self.primal_residual, self.dual_residual, self.rel_gap)


def _ruiz_equilibrate(A: np.ndarray, psd, n_scalar_cols: int, passes: int = 5):
    """Row/column scalings balancing A; PSD blocks share one column scalar."""
    m, N = A.shape
    e_r = np.ones(m)
    e_c = np.ones(N)
    W = A.copy()
    for _ in range(passes):
        row_max = np.max(np.abs(W), axis=1)
        row_max[row_max == 0.0] = 1.0
        dr = 1.0 / np.sqrt(row_max)
        W *= dr[:, None]
        e_r *= dr
        col_max = np.max(np.abs(W), axis=0)
        dc = np.ones(N)
        head = col_max[:n_scalar_cols].copy()
        head[head == 0.0] = 1.0
        dc[:n_scalar_cols] = 1.0 / np.sqrt(head)
        for p in psd:
            mx = col_max[p.cols].max()
            dc[p.cols] = 1.0 / np.sqrt(mx if mx > 0.0 else 1.0)
        W *= dc[None, :]
        e_c *= dc
    return e_r, e_c


def _chol_interior(M: np.ndarray) -> np.ndarray:
    """Cholesky with one jittered retry: iterates can graze the cone boundary
    to rounding error near convergence without being outside it."""
    try:
        return cholesky(M, lower=True)
    except LinAlgError:
        n = M.shape[0]
        eps = 1e-13 * max(float(np.trace(M)) / n, 1e-300)
        return cholesky(M + eps * np.eye(n), lower=True)


def _max_step_nonneg(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0.0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _max_step_psd(L: np.ndarray, dM: np.ndarray) -> float:
    """Largest alpha with M + alpha*dM PSD, M = L L' given by its Cholesky factor."""
    P = solve_triangular(L, dM, lower=True)
    W = solve_triangular(L, P.T, lower=True)
    wmin = float(eigvalsh(0.5 * (W + W.T))[0])
    if wmin >= 0.0:
        return np.inf
    return -1.0 / wmin


def solve(problem, tol: float = 1e-8, max_iter: int = 200) -> ConicSolution:
    """Solve a ConicProblem (or precompiled form) to the given certificate tolerance."""
    compiled = problem if isinstance(problem, CompiledConic) else problem.compile()
    A0 = compiled.A
    b0 = compiled.b
    c0 = compiled.c
    const = compiled.constant
    m, N = A0.shape
    if m == 0:
        raise ValueError("problem has no constraints")
    nf = compiled.n_free
    nn = compiled.n_nonneg
    psd = compiled.psd
    if nn + len(psd) == 0:
        raise ValueError("problem declares no cone variables")
    nu = nn + sum(p.emb_side for p in psd)
    sl_nn = slice(nf, nf + nn)

    # Equilibrated working copy; certificates are checked on the originals.
    e_r, e_c = _ruiz_equilibrate(A0, psd, nf + nn)
    A = A0 * e_r[:, None] * e_c[None, :]
    b = b0 * e_r
    cs = c0 * e_c
    c_norm = np.abs(cs).max() if N else 1.0
    s_obj = 1.0 / max(1.0, c_norm)
    c = cs * s_obj
    Af = A[:, :nf]
    Ann = A[:, sl_nn]
    scaled_mats = []
    for p in psd:
        s_b = e_c[p.cols.start]
        rs = e_r[p.rows] * s_b
        scaled_mats.append(
            (np.ascontiguousarray(p.Cmats * rs[:, None, None]),
             np.ascontiguousarray(p.Arows * rs[:, None]))
        )

    nb1 = float(1.0 + np.linalg.norm(b0))
    nc1 = float(1.0 + np.linalg.norm(c0))

    # Interior start: identity in every cone, zero elsewhere.
    x = np.zeros(N)
    if nn:
        x[sl_nn] = 1.0
    for p in psd:
        x[p.cols] = svec(np.eye(p.emb_side))
    z = x.copy()
    y = np.zeros(m)
    tau = 1.0
    kappa = 1.0

    best_score = np.inf
    best = None  # (pres, dres, gap, pobj, dobj, xhat)
    stall = 0
    no_progress = 0
    status = "numerical-failure"
    detail = "iteration cap reached"
    iters_done = 0

    def finish(status, it, detail="", xhat=None, pres=np.inf, dres=np.inf, gap=np.inf,
               pobj=None, dobj=None, yhat=None, zhat=None):
        values = compiled.extract(xhat) if xhat is not None else {}
        return ConicSolution(
            status=status,
            objective=None if pobj is None else pobj + const,
            dual_objective=None if dobj is None else dobj + const,
            values=values,
            primal_residual=pres,
            dual_residual=dres,
            rel_gap=gap,
            iterations=it,
            detail=detail,
            x_raw=None if xhat is None else np.array(xhat),
            y_raw=None if yhat is None else np.array(yhat),
            z_raw=None if zhat is None else np.array(zhat),
        )

    for it in range(max_iter):
        iters_done = it
        # Matrix forms of the PSD coordinates.
        Xm = [smat(x[p.cols]) for p in psd]
        Zm = [smat(z[p.cols]) for p in psd]
        mu = (float(x[nf:] @ z[nf:]) + tau * kappa) / (nu + 1)

        # Certificates on the original data.
        x_o = e_c * x
        y_o = (e_r * y) / s_obj
        z_o = z / e_c / s_obj
        xhat = x_o / tau
        yhat = y_o / tau
        zhat = z_o / tau
        pres = float(np.linalg.norm(A0 @ xhat - b0)) / nb1
        dres = float(np.linalg.norm(A0.T @ yhat + zhat - c0)) / nc1
        pobj = float(c0 @ xhat)
        dobj = float(b0 @ yhat)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if not (np.isfinite(pres) and np.isfinite(dres) and np.isfinite(gap)):
            status, detail = "numerical-failure", "non-finite residuals"
            break
        score = max(pres, dres, gap)
        if score < 0.9 * best_score:
            no_progress = 0
        else:
            no_progress += 1
        if score < best_score:
            best_score = score
            best = (pres, dres, gap, pobj, dobj, xhat.copy(), yhat.copy(), zhat.copy())
        if score <= tol:
            return finish("optimal", it, "", xhat, pres, dres, gap, pobj, dobj, yhat, zhat)
        if no_progress >= 10:
            status, detail = "numerical-failure", "residuals stalled above tolerance"
            break

        if it > 0:
            by = float(b0 @ y_o)
            if by > 0.0:
                u = y_o / by
                v = z_o / by
                r_inf = float(np.linalg.norm(A0.T @ u + v))
                if r_inf <= tol * (1.0 + np.linalg.norm(u)) * nc1:
                    return finish("infeasible", it,
                                  "primal-infeasible: A'y + z = 0, b'y = 1, residual %.3e" % r_inf)
            cx = float(c0 @ x_o)
            if cx < 0.0:
                u = x_o / (-cx)
                r_inf = float(np.linalg.norm(A0 @ u))
                if r_inf <= tol * (1.0 + np.linalg.norm(u)) * nb1:
                    return finish("infeasible", it,
                                  "dual-infeasible: A x = 0, c'x = -1, residual %.3e (primal unbounded)" % r_inf)
            if tau < _TAU_COLLAPSE * max(1.0, kappa):
                by = float(b0 @ y_o)
                cx = float(c0 @ x_o)
                if by > 0.0 and np.linalg.norm(A0.T @ (y_o / by) + z_o / by) <= 1e-6 * (1.0 + np.linalg.norm(y_o / by)) * nc1:
                    return finish("infeasible", it, "primal-infeasible (tau collapse)")
                if cx < 0.0 and np.linalg.norm(A0 @ (x_o / (-cx))) <= 1e-6 * (1.0 + np.linalg.norm(x_o / (-cx))) * nb1:
                    return finish("infeasible", it, "dual-infeasible (tau collapse)")
                status, detail = "numerical-failure", "tau collapsed without a clean certificate"
                break

        # Nesterov-Todd scaling per cone.
        try:
            scal = []
            for Xb, Zb in zip(Xm, Zm):
                Lx = _chol_interior(Xb)
                Lz = _chol_interior(Zb)
                U, s, Vt = svd(Lz.T @ Lx)
                rs = np.sqrt(s)
                R = (Lx @ Vt.T) / rs[None, :]
                Rti = (Lz @ U) / rs[None, :]
                scal.append((Lx, Lz, R, Rti, R @ R.T, s))
        except LinAlgError:
            status, detail = "numerical-failure", "lost cone interiority"
            break
        d_nn = x[sl_nn] / z[sl_nn] if nn else np.zeros(0)

        def h_apply(v):
            out = np.zeros(N)
            if nn:
                out[sl_nn] = d_nn * v[sl_nn]
            for p, sc in zip(psd, scal):
                out[p.cols] = kernels.apply_scaling(sc[4], v[p.cols])
            return out

        # Schur complement of the cone part, bordered by the free columns.
        M = np.zeros((m, m))
        if nn:
            M += (Ann * d_nn[None, :]) @ Ann.T
        for p, sc, (Cm, Ar) in zip(psd, scal, scaled_mats):
            if p.rows.size:
                P = kernels.congruence_pack(sc[4], Cm)
                M[np.ix_(p.rows, p.rows)] += Ar @ P.T
        M = 0.5 * (M + M.T)

        K0 = np.zeros((nf + m, nf + m))
        if nf:
            K0[:nf, nf:] = Af.T
            K0[nf:, :nf] = Af
        K0[nf:, nf:] = M
        reg = 1e-12 * (1.0 + float(np.abs(np.diag(M)).max()))
        Kreg = K0.copy()
        if nf:
            Kreg[:nf, :nf] -= reg * np.eye(nf)
        Kreg[nf:, nf:] += reg * np.eye(m)
        try:
            lu = lu_factor(Kreg)
        except (LinAlgError, ValueError):
            status, detail = "numerical-failure", "singular Newton system"
            break

        def ksolve(r1, r2):
            rhs = np.concatenate([r1, r2])
            sol = lu_solve(lu, rhs)
            for _ in range(_REFINE_PASSES):
                sol = sol + lu_solve(lu, rhs - K0 @ sol)
            return sol[:nf], sol[nf:]

        hc = h_apply(c)
        dxf1, dy1 = ksolve(c[:nf], A @ hc + b)
        ATdy1 = A.T @ dy1
        dxc1 = h_apply(ATdy1) - hc

        hx = A @ x - tau * b
        hy = A.T @ y + z - tau * c
        hg = float(c @ x - b @ y + kappa)

        def direction(e_vec, d_tk):
            Hhy = h_apply(hy)
            u0 = e_vec + Hhy
            dxf0, dy0 = ksolve(-hy[:nf], -hx - A @ u0)
            ATdy0 = A.T @ dy0
            dxc0 = u0 + h_apply(ATdy0)
            a0 = float(c[:nf] @ dxf0 + c @ dxc0 - b @ dy0)
            a1 = float(c[:nf] @ dxf1 + c @ dxc1 - b @ dy1) - kappa / tau
            if abs(a1) < 1e-300:
                return None
            dtau = (-hg - d_tk / tau - a0) / a1
            dy = dy0 + dtau * dy1
            dx = dxc0 + dtau * dxc1
            dx[:nf] = dxf0 + dtau * dxf1
            dz = -hy - (ATdy0 + dtau * ATdy1) + dtau * c
            dz[:nf] = 0.0
            dkappa = (d_tk - kappa * dtau) / tau
            return dx, dy, dz, dtau, dkappa

        def max_step(dx, dz, dtau, dkappa):
            amax = np.inf
            if nn:
                amax = min(amax, _max_step_nonneg(x[sl_nn], dx[sl_nn]))
                amax = min(amax, _max_step_nonneg(z[sl_nn], dz[sl_nn]))
            for p, sc in zip(psd, scal):
                amax = min(amax, _max_step_psd(sc[0], smat(dx[p.cols])))
                amax = min(amax, _max_step_psd(sc[1], smat(dz[p.cols])))
            if dtau < 0.0:
                amax = min(amax, -tau / dtau)
            if dkappa < 0.0:
                amax = min(amax, -kappa / dkappa)
            return amax

        e_aff = -x.copy()
        e_aff[:nf] = 0.0
        aff = direction(e_aff, -tau * kappa)
        if aff is None or not all(np.all(np.isfinite(np.atleast_1d(v))) for v in aff):
            status, detail = "numerical-failure", "degenerate Newton direction"
            break
        dxa, dya, dza, dta, dka = aff
        a_aff = min(1.0, max_step(dxa, dza, dta, dka))
        mu_aff = (
            float((x[nf:] + a_aff * dxa[nf:]) @ (z[nf:] + a_aff * dza[nf:]))
            + (tau + a_aff * dta) * (kappa + a_aff * dka)
        ) / (nu + 1)
        sigma = min(1.0, max(0.0, (max(mu_aff, 0.0) / mu) ** 3))

        e_comb = np.zeros(N)
        if nn:
            xs = x[sl_nn]
            zs = z[sl_nn]
            e_comb[sl_nn] = (sigma * mu - xs * zs - dxa[sl_nn] * dza[sl_nn]) / zs
        for p, sc in zip(psd, scal):
            _, _, R, Rti, _, lam = sc
            dXa = smat(dxa[p.cols])
            dZa = smat(dza[p.cols])
            Xt = Rti.T @ dXa @ Rti
            Zt = R.T @ dZa @ R
            Dm = -0.5 * (Xt @ Zt + Zt @ Xt)
            Dm[np.diag_indices_from(Dm)] += sigma * mu - lam * lam
            E = 2.0 * Dm / (lam[:, None] + lam[None, :])
            e_comb[p.cols] = svec(R @ E @ R.T)
        d_tk = sigma * mu - tau * kappa - dta * dka

        comb = direction(e_comb, d_tk)
        if comb is None or not all(np.all(np.isfinite(np.atleast_1d(v))) for v in comb):
            status, detail = "numerical-failure", "degenerate Newton direction"
            break
        dx, dy, dz, dtau, dkappa = comb
        alpha = min(1.0, _STEP_DAMP * max_step(dx, dz, dtau, dkappa))
        if alpha < _MIN_STEP:
            stall += 1
            if stall >= 3:
                status, detail = "numerical-failure", "step length collapsed"
                break
        else:
            stall = 0
        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa
    else:
        iters_done = max_iter

    if best is not None:
        pres, dres, gap, pobj, dobj, xhat, yhat, zhat = best
        return finish("numerical-failure", iters_done, detail, xhat, pres, dres, gap,
                      pobj, dobj, yhat, zhat)
    return finish("numerical-failure", iters_done, detail)
