"""L1-penalized logistic regression.

Each fit runs an outer quadratic-approximation loop: build weighted
least-squares data at the current probabilities (weights p(1-p), clamped
away from zero), solve the penalized subproblem with the weighted
coordinate-descent kernel, and step-halve whenever the true penalized
negative log-likelihood would increase, which keeps the outer loop
monotone without line-search machinery.  The intercept is unpenalized and
refreshed in closed form inside each sweep.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .core import Coefficients, DesignMatrix, LambdaGrid, ResponseVector
from .errors import DegenerateResponse
from .lasso import (KktReport, PathSolution, SolverConfig, Strategy, _excess,
                    _Prep)
from .screening import strong_logistic

from dataclasses import dataclass

_PROB_CLAMP = 1e-5


@dataclass
class LogisticState:
    """Fitted coefficients, intercept, probabilities and objective value."""

    beta: Coefficients
    intercept: float
    probs: np.ndarray
    penalized_negloglik: float


def _sigmoid(eta):
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _penalized_nll(eta, yv, beta, lam1, lam2=0.0):
    nll = float(np.logaddexp(0.0, eta).sum() - yv @ eta)
    return nll + lam1 * float(np.abs(beta).sum()) \
        + 0.5 * lam2 * float(beta @ beta)


def _check_binary(y: ResponseVector):
    if not y.binary:
        raise DegenerateResponse("logistic fits need a binary response")
    ybar = float(y.values.mean())
    if ybar == 0.0 or ybar == 1.0:
        raise DegenerateResponse("binary response is constant")
    return ybar


class _WlsSolver:
    """Weighted CD subproblem plumbing for one design."""

    def __init__(self, prep: _Prep):
        self.prep = prep
        if prep.is_sparse:
            self.csc_sq = prep.csc.multiply(prep.csc).tocsc()

    def weighted_diag(self, w, active):
        """Per-column sum of w * x_ij^2 (full-length array, filled where
        needed)."""
        prep = self.prep
        xtw = np.zeros(prep.p)
        if prep.is_sparse:
            sq = np.asarray(self.csc_sq.T @ w).ravel()
            wv = np.asarray(prep.csc.T @ w).ravel()
            wsum = float(w.sum())
            xtw_all = sq - 2.0 * prep.offsets * wv + prep.offsets**2 * wsum
            xtw[active] = xtw_all[active]
            self._wcolsum = wv
        else:
            if active.size:
                xtw[active] = np.einsum(
                    "i,ij->j", w, self.prep.dense[:, active])
            # reuse xtw's slot semantics; dense kernel ignores wcolsum
        return xtw

    def solve(self, w, z, beta, b0, active, lam1, lam2, tol, max_sweeps):
        """Returns (sweeps, converged, b0, true_working_residual).

        Uses the same active-set cycling as the squared-error engine:
        converge on the nonzero subset, confirm with a full sweep.
        """
        prep = self.prep
        ker = kernels.active()
        wsum = float(w.sum())
        if prep.is_sparse:
            xtw = self.weighted_diag(w * 1.0, active)
            state = {"r": z - b0 - prep.csc @ beta,
                     "shift": float(prep.offsets @ beta), "b0": b0}
            state["swr"] = float(w @ state["r"])

            def run(act, cap):
                sweeps, ok, state["swr"], state["shift"], state["b0"] = \
                    ker.cd_sparse_weighted(
                        prep.data, prep.indices, prep.indptr, prep.offsets,
                        w, self._wcolsum, wsum, xtw, prep.n, beta,
                        state["r"], act, lam1, lam2, tol, cap,
                        state["swr"], state["shift"], state["b0"], True)
                return sweeps, ok

            def resid():
                return state["r"] + state["shift"]
        else:
            xtw = np.zeros(prep.p)
            if active.size:
                xtw[active] = w @ (prep.dense[:, active] ** 2)
            state = {"r": z - b0 - prep.dense @ beta, "b0": b0}

            def run(act, cap):
                sweeps, ok, state["b0"] = ker.cd_dense_weighted(
                    prep.dense, w, xtw, wsum, beta, state["r"], act, lam1,
                    lam2, tol, cap, state["b0"], True)
                return sweeps, ok

            def resid():
                return state["r"]

        total = 0
        converged = False
        while total < max_sweeps:
            nz = active[beta[active] != 0.0]
            if nz.size and nz.size < active.size:
                sweeps, ok = run(nz, max_sweeps - total)
                total += sweeps
                if not ok:
                    break
            sweeps, quiet = run(active, 1)
            total += sweeps
            if quiet:
                converged = True
                break
        return total, converged, state["b0"], resid()


def _logistic_excess(g, beta_sub, lam):
    return _excess(g, beta_sub, lam, 0.0)


def _fit_on_set(prep, wls, yv, lam, beta, b0, active, config,
                lam_ref=None):
    """Quadratic-approximation outer loop restricted to ``active``.

    Returns (b0, eta, sweeps, converged).  ``beta`` is updated in place.
    Convergence requires both an objective plateau and the restricted
    stationarity conditions to hold well inside the verification band.
    """
    eta = b0 + prep.matvec(beta)
    obj = _penalized_nll(eta, yv, beta, lam)
    total_sweeps = 0
    tol = config.cd_tolerance
    target = 0.1 * config.kkt_tolerance * lam
    converged = False
    for _ in range(config.max_irls):
        probs = _sigmoid(eta)
        pc = np.clip(probs, _PROB_CLAMP, 1.0 - _PROB_CLAMP)
        w = pc * (1.0 - pc)
        z = eta + (yv - pc) / w

        cd_active = active
        if config.irls_screening and active.size:
            ref = lam if lam_ref is None else lam_ref
            r_work = z - eta
            gw = _xt_weighted(prep, w * r_work, active)
            keep = (np.abs(gw) >= 2.0 * lam - ref) | (beta[active] != 0.0)
            cd_active = active[keep]

        beta_new = beta.copy()
        sweeps, ok, b0_new, r_true = wls.solve(
            w, z, beta_new, b0, cd_active, lam, 0.0, tol, config.max_sweeps)
        total_sweeps += sweeps
        if config.irls_screening and cd_active.size < active.size:
            # pull in working-set coordinates the inner rule missed
            rest = np.setdiff1d(active, cd_active)
            gw = _xt_weighted(prep, w * r_true, rest)
            bad = np.abs(gw) > lam * (1.0 + config.kkt_tolerance)
            if np.any(bad):
                sweeps, ok, b0_new, r_true = wls.solve(
                    w, z, beta_new, b0_new, active, lam, 0.0, tol,
                    config.max_sweeps)
                total_sweeps += sweeps
        eta_new = z - r_true

        obj_new = _penalized_nll(eta_new, yv, beta_new, lam)
        halvings = 0
        while obj_new > obj + 1e-12 * (1.0 + abs(obj)) and halvings < 30:
            beta_new = 0.5 * (beta_new + beta)
            b0_new = 0.5 * (b0_new + b0)
            eta_new = 0.5 * (eta_new + eta)
            obj_new = _penalized_nll(eta_new, yv, beta_new, lam)
            halvings += 1

        if not (np.isfinite(obj_new) and np.all(np.isfinite(eta_new))):
            raise FloatingPointError("logistic objective left finite range")

        delta_obj = obj - obj_new
        beta[:] = beta_new
        b0, eta, obj = b0_new, eta_new, obj_new

        if delta_obj < config.cd_tolerance:
            probs = _sigmoid(eta)
            if active.size:
                g = _xt_subset(prep, yv - probs, active)
                exc = _logistic_excess(g, beta[active], lam)
                grad_ok = float(exc.max()) <= target
            else:
                grad_ok = True
            icpt_ok = abs(float(np.sum(yv - probs))) \
                <= 0.5 * prep.n * config.kkt_tolerance
            if grad_ok and icpt_ok:
                converged = True
                break
            tol *= 0.1
    return b0, eta, total_sweeps, converged


def _xt_subset(prep, v, idx):
    if idx.size == 0:
        return np.zeros(0)
    if prep.is_sparse:
        out = np.asarray(prep.csc[:, idx].T @ v).ravel()
        return out - prep.offsets[idx] * float(v.sum())
    return prep.dense[:, idx].T @ v


def _xt_weighted(prep, v, idx):
    return _xt_subset(prep, v, idx)


def _xt_all(prep, v):
    if prep.is_sparse:
        out = np.asarray(prep.csc.T @ v).ravel()
        return out - prep.offsets * float(v.sum())
    return prep.dense.T @ v


def fit_logistic(x_e: DesignMatrix, y: ResponseVector, lam: float,
                 warm: LogisticState | None = None,
                 config: SolverConfig | None = None) -> LogisticState:
    """Fit one penalized logistic problem over all columns of ``x_e``."""
    config = config or SolverConfig()
    ybar = _check_binary(y)
    prep = _Prep(x_e)
    wls = _WlsSolver(prep)
    if warm is not None:
        beta = warm.beta.to_dense(prep.p)
        b0 = warm.intercept
    else:
        beta = np.zeros(prep.p)
        b0 = float(np.log(ybar / (1.0 - ybar)))
    active = np.arange(prep.p, dtype=np.int64)
    b0, eta, _, _ = _fit_on_set(prep, wls, y.values, lam, beta, b0, active,
                                config)
    probs = _sigmoid(eta)
    return LogisticState(
        beta=Coefficients.from_dense(beta, intercept=b0), intercept=b0,
        probs=probs, penalized_negloglik=_penalized_nll(eta, y.values, beta,
                                                        lam))


def kkt_check_logistic(x: DesignMatrix, y: ResponseVector,
                       state: LogisticState, lam: float, scope=None,
                       tol: float = 1e-7) -> KktReport:
    """Subgradient check X'(y - p) = lam sign(beta) plus intercept
    optimality; a violated intercept is reported as index -1."""
    p = x.n_cols
    beta = state.beta.to_dense(p)
    eta = state.intercept + x.matvec(beta)
    probs = _sigmoid(eta)
    scope = np.arange(p, dtype=np.int64) if scope is None \
        else np.asarray(scope, dtype=np.int64)
    g = x.inner_products(y.values - probs)[scope]
    exc = _logistic_excess(g, beta[scope], lam)
    bad = scope[exc > tol * lam]
    max_excess = float(exc.max()) if scope.size else 0.0
    icpt_gap = abs(float(np.sum(y.values - probs)))
    if icpt_gap > x.n_rows * tol:
        bad = np.concatenate([np.array([-1], dtype=np.int64), bad])
    return KktReport(violating_indices=bad, max_excess=max_excess,
                     tolerance=tol, lam1=lam)


def solve_path_logistic(x: DesignMatrix, y: ResponseVector,
                        grid: LambdaGrid,
                        config: SolverConfig | None = None) -> PathSolution:
    """Pathwise logistic fit with the same strategies and two-level KKT
    verification as the squared-error path solver."""
    config = config or SolverConfig()
    ybar = _check_binary(y)
    prep = _Prep(x)
    wls = _WlsSolver(prep)
    p = prep.p
    yv = y.values
    tol_rel = config.kkt_tolerance

    beta = np.zeros(p)
    b0 = float(np.log(ybar / (1.0 - ybar)))
    eta = np.full(prep.n, b0)
    g_prev = _xt_all(prep, yv - ybar)
    c_prev_abs = np.abs(g_prev)
    lam_prev = float(c_prev_abs.max())
    ever_active = np.zeros(p, dtype=bool)

    n_grid = len(grid)
    coefs: list[Coefficients] = []
    objective = np.zeros(n_grid)
    strong_sizes = np.zeros(n_grid, dtype=np.int64)
    ever_sizes = np.zeros(n_grid, dtype=np.int64)
    viol_strong = np.zeros(n_grid, dtype=np.int64)
    viol_full = np.zeros(n_grid, dtype=np.int64)
    sweeps_used = np.zeros(n_grid, dtype=np.int64)
    converged = np.ones(n_grid, dtype=bool)

    for k, lam in enumerate(grid.values):
        lam = float(lam)
        ref = max(lam_prev, lam)
        strong = strong_logistic(c_prev_abs, lam, ref, sequential=True)
        strong_keep = strong.keep.copy()
        strong_sizes[k] = strong.n_kept
        ever_sizes[k] = int(ever_active.sum())

        in_e = np.zeros(p, dtype=bool)
        strat = config.strategy
        if strat is Strategy.NAIVE:
            in_e[:] = True
        elif strat is Strategy.EVER_ACTIVE_ONLY:
            in_e |= ever_active
        elif strat is Strategy.STRONG_ONLY:
            in_e |= strong_keep
        else:
            in_e |= ever_active
        in_e |= beta != 0.0

        g_final = None
        for _ in range(p + 2):
            active = np.nonzero(in_e)[0].astype(np.int64)
            b0, eta, sw, ok = _fit_on_set(prep, wls, yv, lam, beta, b0,
                                          active, config, lam_ref=lam_prev)
            sweeps_used[k] += sw
            if not ok:
                converged[k] = False
            probs = _sigmoid(eta)
            resid = yv - probs

            if strat is Strategy.COMBINED:
                cand = np.nonzero(strong_keep & ~in_e)[0].astype(np.int64)
                if cand.size:
                    g_sub = _xt_subset(prep, resid, cand)
                    bad = np.abs(g_sub) > lam * (1.0 + tol_rel)
                    if np.any(bad):
                        viol_strong[k] += int(bad.sum())
                        in_e[cand[bad]] = True
                        continue

            g_all = _xt_all(prep, resid)
            bad_full = ~in_e & (np.abs(g_all) > lam * (1.0 + tol_rel))
            if np.any(bad_full):
                viol_full[k] += int(bad_full.sum())
                in_e[bad_full] = True
                if strat is Strategy.COMBINED:
                    ever_active |= bad_full
                    strong_keep |= strong_logistic(
                        np.abs(g_all), lam, ref, sequential=True).keep
                continue
            g_final = g_all
            break
        else:
            converged[k] = False
            g_final = _xt_all(prep, yv - _sigmoid(eta))

        coefs.append(Coefficients.from_dense(beta, intercept=b0))
        objective[k] = _penalized_nll(eta, yv, beta, lam)
        ever_active |= beta != 0.0
        c_prev_abs = np.abs(g_final)
        lam_prev = lam

    return PathSolution(
        lambdas=grid.values.copy(), coefs=coefs, objective=objective,
        strong_sizes=strong_sizes, ever_active_sizes=ever_sizes,
        kkt_violations_strong=viol_strong, kkt_violations_full=viol_full,
        sweeps_used=sweeps_used, converged=converged, n_cols=p,
        family="logistic",
    )
