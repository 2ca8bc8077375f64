"""Pathwise coordinate-descent solver for lasso / elastic-net problems.

The path solver fits a decreasing penalty grid with warm starts and one of
four working-set strategies:

* ``NAIVE``: solve over all p predictors at every grid point.
* ``EVER_ACTIVE_ONLY``: solve over the ever-active set, then loop a full
  KKT check, pulling violators in until clean.
* ``STRONG_ONLY``: same loop seeded with the sequential-strong-rule
  survivors instead of the ever-active set.
* ``COMBINED``: solve over the ever-active set, check KKT over the strong
  set first (violations here are common and cheap to fix), then over all
  predictors (violations here are rare), growing the sets as needed.

Whatever the strategy, the returned coefficients satisfy a full-scope KKT
check at every grid point, so screening is a speedup, never an
approximation.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Coefficients, DesignMatrix, LambdaGrid, ResponseVector
from .errors import MaxSweepsExceeded
from .screening import ScreenMask, strong_en, strong_sequential


class Strategy(str, enum.Enum):
    NAIVE = "naive"
    EVER_ACTIVE_ONLY = "ever_active"
    STRONG_ONLY = "strong"
    COMBINED = "combined"


@dataclass
class SolverConfig:
    """Tolerances and path layout shared by all solvers.

    ``cd_tolerance`` bounds the largest coefficient change per sweep;
    ``kkt_tolerance`` is relative to the current penalty so the small-end
    of the path is not spuriously flagged.  ``alpha`` is the elastic-net
    mixing weight (1.0 means pure L1): at penalty ``lam`` the solver uses
    ``alpha * lam`` on the L1 term and ``(1 - alpha) * lam`` on the ridge
    term.
    """

    cd_tolerance: float = 1e-8
    max_sweeps: int = 100_000
    kkt_tolerance: float = 1e-7
    grid_size: int = 100
    grid_ratio: float = 1e-3
    strategy: Strategy = Strategy.COMBINED
    alpha: float = 1.0
    grid_spacing: str = "log"
    max_irls: int = 200
    irls_screening: bool = False

    def __post_init__(self):
        if isinstance(self.strategy, str):
            self.strategy = Strategy(self.strategy)
        if self.cd_tolerance <= 0 or self.kkt_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if not (0 < self.grid_ratio < 1):
            raise ValueError("grid_ratio must lie in (0, 1)")
        if self.grid_size < 1:
            raise ValueError("grid_size must be at least 1")
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must lie in (0, 1]")
        if self.grid_spacing not in ("log", "linear"):
            raise ValueError("grid_spacing must be 'log' or 'linear'")


@dataclass
class KktReport:
    """Stationarity check result; empty iff max_excess <= tolerance * lam1."""

    violating_indices: np.ndarray
    max_excess: float
    tolerance: float
    lam1: float

    @property
    def ok(self) -> bool:
        return self.violating_indices.size == 0


@dataclass
class PathSolution:
    """Per-penalty coefficients plus screening / verification telemetry."""

    lambdas: np.ndarray
    coefs: list[Coefficients]
    objective: np.ndarray
    strong_sizes: np.ndarray
    ever_active_sizes: np.ndarray
    kkt_violations_strong: np.ndarray
    kkt_violations_full: np.ndarray
    sweeps_used: np.ndarray
    converged: np.ndarray
    n_cols: int
    family: str = "gaussian"

    def betas(self) -> np.ndarray:
        out = np.zeros((len(self.coefs), self.n_cols))
        for k, c in enumerate(self.coefs):
            for j, v in c.entries.items():
                out[k, j] = v
        return out

    def intercepts(self) -> np.ndarray:
        return np.array([c.intercept for c in self.coefs])

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def make_grid(lam_max: float, grid_size: int, grid_ratio: float,
              spacing: str = "log") -> LambdaGrid:
    """Penalty grid from lam_max down to grid_ratio * lam_max.

    Log spacing is the default; linear spacing reproduces equally spaced
    grids (the zero endpoint is replaced by grid_ratio * lam_max to keep
    the problem penalized).
    """
    if lam_max <= 0:
        raise ValueError("lam_max must be positive")
    if grid_size == 1:
        vals = np.array([lam_max])
    elif spacing == "log":
        vals = np.geomspace(lam_max, lam_max * grid_ratio, grid_size)
    elif spacing == "linear":
        vals = np.linspace(lam_max, lam_max * grid_ratio, grid_size)
    else:
        raise ValueError("spacing must be 'log' or 'linear'")
    vals[0] = lam_max
    return LambdaGrid(values=vals, lambda_max=lam_max)


def default_grid_ratio(n: int, p: int) -> float:
    """0.01 in the dense p > n regime, 0.001 otherwise."""
    return 0.01 if p > n else 0.001


# ---------------------------------------------------------------------------
# solver-ready views and residual state


class _Prep:
    """Kernel-ready arrays for one design matrix."""

    def __init__(self, x: DesignMatrix):
        self.design = x
        self.n = x.n_rows
        self.p = x.n_cols
        self.xtx = np.ascontiguousarray(x.col_norms.astype(np.float64) ** 2)
        self.is_sparse = x.is_sparse
        if x.is_sparse:
            m = x.sparse
            self.data = np.ascontiguousarray(m.data, dtype=np.float64)
            self.indices = np.ascontiguousarray(m.indices, dtype=np.int64)
            self.indptr = np.ascontiguousarray(m.indptr, dtype=np.int64)
            self.offsets = np.ascontiguousarray(x.offsets, dtype=np.float64)
            self.colsum = np.ascontiguousarray(x.col_sums, dtype=np.float64)
            self.csc = m
        else:
            self.dense = np.asfortranarray(x.dense, dtype=np.float64)

    def matvec(self, beta: np.ndarray) -> np.ndarray:
        if self.is_sparse:
            out = self.csc @ beta
            shift = float(self.offsets @ beta)
            return np.asarray(out).ravel() - shift
        return self.dense @ beta


class _ResState:
    """Residual bookkeeping shared with the kernels.

    Dense designs track the true residual directly.  Sparse designs track
    ``r_store`` with the true residual equal to ``r_store + shift``, plus
    the running sum of ``r_store``.
    """

    def __init__(self, prep: _Prep, r0: np.ndarray):
        self.prep = prep
        if prep.is_sparse:
            self.r_store = r0.astype(np.float64).copy()
            self.sum_r = float(self.r_store.sum())
            self.shift = 0.0
        else:
            self.r = r0.astype(np.float64).copy()

    @classmethod
    def from_beta(cls, prep: _Prep, y: np.ndarray, beta: np.ndarray):
        if prep.is_sparse:
            st = cls.__new__(cls)
            st.prep = prep
            st.r_store = y - prep.csc @ beta
            st.sum_r = float(st.r_store.sum())
            st.shift = float(prep.offsets @ beta)
            return st
        st = cls.__new__(cls)
        st.prep = prep
        st.r = y - prep.dense @ beta
        return st

    def true_residual(self) -> np.ndarray:
        if self.prep.is_sparse:
            return self.r_store + self.shift
        return self.r

    def xt_r(self) -> np.ndarray:
        """Inner products of every column with the current residual."""
        p = self.prep
        if p.is_sparse:
            out = p.csc.T @ self.r_store
            out = out + self.shift * p.colsum \
                - p.offsets * (self.sum_r + p.n * self.shift)
            return np.asarray(out).ravel()
        return p.dense.T @ self.r

    def xt_r_subset(self, idx: np.ndarray) -> np.ndarray:
        p = self.prep
        if idx.size == 0:
            return np.zeros(0)
        if p.is_sparse:
            sub = p.csc[:, idx]
            out = sub.T @ self.r_store
            out = np.asarray(out).ravel() + self.shift * p.colsum[idx] \
                - p.offsets[idx] * (self.sum_r + p.n * self.shift)
            return out
        return self.prep.dense[:, idx].T @ self.r


def _run_kernel(prep: _Prep, state: _ResState, beta: np.ndarray,
                active: np.ndarray, lam1: float, lam2: float, tol: float,
                max_sweeps: int):
    """One kernel invocation; returns (sweeps, converged)."""
    if active.size == 0:
        return 0, True
    ker = kernels.active()
    if prep.is_sparse:
        sweeps, ok, state.sum_r, state.shift = ker.cd_sparse(
            prep.data, prep.indices, prep.indptr, prep.offsets, prep.colsum,
            prep.xtx, prep.n, beta, state.r_store, active, lam1, lam2, tol,
            max_sweeps, state.sum_r, state.shift)
    else:
        sweeps, ok = ker.cd_dense(prep.dense, prep.xtx, beta, state.r,
                                  active, lam1, lam2, tol, max_sweeps)
    return sweeps, ok


def _excess(c: np.ndarray, beta_sub: np.ndarray, lam1: float,
            lam2: float) -> np.ndarray:
    """Signed KKT excess: |c_j| - lam1 on the inactive set, absolute
    stationarity deviation |c_j - lam2 b_j - lam1 sign(b_j)| on the
    active set."""
    inactive = beta_sub == 0.0
    out = np.empty_like(c)
    out[inactive] = np.abs(c[inactive]) - lam1
    act = ~inactive
    if np.any(act):
        out[act] = np.abs(c[act] - lam2 * beta_sub[act]
                          - lam1 * np.sign(beta_sub[act]))
    return out


def _cd_converge(prep, state, beta, active, lam1, lam2, tol, budget):
    """Active-set cycling: converge on the nonzero subset of the working
    set, then confirm with one full working-set sweep; repeat until a
    full sweep stays below tolerance."""
    total = 0
    while total < budget:
        nz = active[beta[active] != 0.0]
        if nz.size and nz.size < active.size:
            sweeps, ok = _run_kernel(prep, state, beta, nz, lam1, lam2, tol,
                                     budget - total)
            total += sweeps
            if not ok:
                return total, False
        sweeps, quiet = _run_kernel(prep, state, beta, active, lam1, lam2,
                                    tol, 1)
        total += sweeps
        if quiet:
            return total, True
    return total, active.size == 0


def _support_polish(prep, state, beta, active, lam1, lam2):
    """Exact restricted solve on the current support, used to accelerate
    the ill-conditioned small-penalty end of the path.

    Solves the sign-fixed stationarity system directly and accepts the
    step only when it lowers the objective; subsequent sweeps polish and
    verify, so this never changes what convergence means.
    """
    sup = active[beta[active] != 0.0]
    if sup.size == 0 or sup.size > 1000:
        return 0.0
    if prep.is_sparse:
        xs = np.asarray(prep.csc[:, sup].todense()) \
            - prep.offsets[sup][None, :]
    else:
        xs = prep.dense[:, sup]
    bs = beta[sup]
    r_true = state.true_residual()
    gram = xs.T @ xs
    rhs = xs.T @ r_true + gram @ bs - lam1 * np.sign(bs)
    if lam2:
        gram = gram + lam2 * np.eye(sup.size)
    jitter = 1e-13 * float(np.trace(gram)) / sup.size
    try:
        b_new = np.linalg.solve(gram + jitter * np.eye(sup.size), rhs)
    except np.linalg.LinAlgError:
        return 0.0
    delta = b_new - bs
    if not np.any(delta):
        return 0.0
    step = xs @ delta
    obj_old = 0.5 * r_true @ r_true + 0.5 * lam2 * bs @ bs \
        + lam1 * np.abs(bs).sum()
    r_new = r_true - step
    obj_new = 0.5 * r_new @ r_new + 0.5 * lam2 * b_new @ b_new \
        + lam1 * np.abs(b_new).sum()
    if not np.isfinite(obj_new) or obj_new >= obj_old:
        return 0.0
    beta[sup] = b_new
    if prep.is_sparse:
        state.r_store -= np.asarray(prep.csc[:, sup] @ delta).ravel()
        state.sum_r -= float(prep.colsum[sup] @ delta)
        state.shift += float(prep.offsets[sup] @ delta)
    else:
        state.r -= step
    return float(np.max(np.abs(delta)))


def _solve_on_set(prep, state, beta, active, lam1, lam2, config):
    """CD solve followed by a restricted-KKT enforcement loop.

    Shrinks the sweep tolerance until the stationarity residual on the
    working set is safely below the verification threshold, so the final
    full-scope check never trips over unconverged active coordinates.
    """
    total_sweeps = 0
    converged = True
    tol = config.cd_tolerance
    target = 0.1 * config.kkt_tolerance * lam1

    # stabilize the support with short sweep bursts and exact restricted
    # steps; the direct solves carry the ill-conditioned path tail
    if active.size:
        coarse = max(tol, 1e-5)
        for _ in range(50):
            sweeps, ok = _cd_converge(prep, state, beta, active, lam1, lam2,
                                      coarse, 8)
            total_sweeps += sweeps
            step = _support_polish(prep, state, beta, active, lam1, lam2)
            if ok and step < coarse:
                break

    for round_ in range(12):
        sweeps, ok = _cd_converge(prep, state, beta, active, lam1, lam2,
                                  tol, config.max_sweeps)
        total_sweeps += sweeps
        if not ok:
            converged = False
            break
        if active.size == 0:
            break
        _support_polish(prep, state, beta, active, lam1, lam2)
        c = state.xt_r_subset(active)
        exc = _excess(c, beta[active], lam1, lam2)
        if float(exc.max(initial=-np.inf)) <= target:
            break
        tol *= 0.1
    else:
        converged = False
    return total_sweeps, converged


def kkt_check(x: DesignMatrix, y: ResponseVector, beta, lambda1: float,
              lambda2: float = 0.0, scope=None,
              kkt_tolerance: float = 1e-7) -> KktReport:
    """Verify the stationarity conditions at a candidate solution.

    Inactive predictors violate when |x_j.r| exceeds lambda1 (relatively);
    active ones when x_j.r - lambda2 b_j drifts from lambda1 sign(b_j).
    """
    p = x.n_cols
    if isinstance(beta, Coefficients):
        beta = beta.to_dense(p)
    beta = np.asarray(beta, dtype=np.float64)
    scope = np.arange(p, dtype=np.int64) if scope is None \
        else np.asarray(scope, dtype=np.int64)
    r = y.values - x.matvec(beta)
    c = x.inner_products(r)[scope]
    exc = _excess(c, beta[scope], lambda1, lambda2)
    bad = exc > kkt_tolerance * lambda1
    return KktReport(
        violating_indices=scope[bad],
        max_excess=float(exc.max()) if scope.size else 0.0,
        tolerance=kkt_tolerance,
        lam1=lambda1,
    )


def coord_descent(x_e: DesignMatrix, y: ResponseVector, lambda1: float,
                  lambda2: float = 0.0, warm: Coefficients | None = None,
                  config: SolverConfig | None = None) -> Coefficients:
    """Solve one penalized least-squares problem over the given design.

    Cyclic soft-threshold updates b_j <- S(x_j.(r + x_j b_j), lambda1) /
    (||x_j||^2 + lambda2) until the largest per-sweep coefficient change
    drops below ``cd_tolerance``.  Emits :class:`MaxSweepsExceeded` (a
    warning) and returns the best iterate when the sweep cap is hit.
    """
    config = config or SolverConfig()
    prep = _Prep(x_e)
    beta = warm.to_dense(prep.p) if warm is not None else np.zeros(prep.p)
    state = _ResState.from_beta(prep, y.values, beta)
    active = np.arange(prep.p, dtype=np.int64)
    sweeps, ok = _solve_on_set(prep, state, beta, active, lambda1, lambda2,
                               config)
    if not ok:
        warnings.warn(
            f"coordinate descent stopped after {sweeps} sweeps without "
            "meeting the tolerance", MaxSweepsExceeded)
    return Coefficients.from_dense(beta)


def _en_objective(r: np.ndarray, beta: np.ndarray, lam1: float,
                  lam2: float) -> float:
    return float(0.5 * r @ r + 0.5 * lam2 * beta @ beta
                 + lam1 * np.abs(beta).sum())


def _screen(c_abs, lam, lam_prev, alpha) -> ScreenMask:
    if alpha == 1.0:
        return strong_sequential(c_abs, lam, lam_prev)
    return strong_en(c_abs, lam, lam_prev, alpha, sequential=True)


def solve_path(x: DesignMatrix, y: ResponseVector, grid: LambdaGrid,
               config: SolverConfig | None = None) -> PathSolution:
    """Fit the full penalty path under the configured strategy.

    Every grid point is verified against the full-scope KKT conditions
    before it is recorded; strong-set and ever-active telemetry is kept
    per penalty.  Non-convergence at one grid point is flagged in
    ``converged`` without aborting the rest of the path.
    """
    config = config or SolverConfig()
    prep = _Prep(x)
    p, alpha = prep.p, config.alpha
    tol_rel = config.kkt_tolerance

    beta = np.zeros(p)
    state = _ResState(prep, y.values)
    c_prev_abs = np.abs(state.xt_r())
    lam_prev = float(c_prev_abs.max()) / alpha  # exact null reference
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
        lam1 = alpha * lam
        lam2 = (1.0 - alpha) * lam
        ref = max(lam_prev, lam)
        strong = _screen(c_prev_abs, lam, ref, alpha)
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
        in_e |= beta != 0.0  # warm support never leaves the working set

        c_final = None
        for _ in range(p + 2):
            active = np.nonzero(in_e)[0].astype(np.int64)
            sw, ok = _solve_on_set(prep, state, beta, active, lam1, lam2,
                                   config)
            sweeps_used[k] += sw
            if not ok:
                converged[k] = False

            if strat is Strategy.COMBINED:
                # check the strong set first; violations here are common
                cand = np.nonzero(strong_keep & ~in_e)[0].astype(np.int64)
                if cand.size:
                    c_sub = state.xt_r_subset(cand)
                    bad = np.abs(c_sub) > lam1 * (1.0 + tol_rel)
                    if np.any(bad):
                        viol_strong[k] += int(bad.sum())
                        in_e[cand[bad]] = True
                        continue

            c_all = state.xt_r()
            outside = ~in_e
            bad_full = outside & (np.abs(c_all) > lam1 * (1.0 + tol_rel))
            if np.any(bad_full):
                viol_full[k] += int(bad_full.sum())
                in_e[bad_full] = True
                if strat is Strategy.COMBINED:
                    ever_active |= bad_full
                    # refresh the strong set from the current residual
                    strong_keep |= _screen(np.abs(c_all), lam, ref,
                                           alpha).keep
                continue
            c_final = c_all
            break
        else:
            converged[k] = False
            c_final = state.xt_r()

        coefs.append(Coefficients.from_dense(beta))
        objective[k] = _en_objective(state.true_residual(), beta, lam1, lam2)
        ever_active |= beta != 0.0
        c_prev_abs = np.abs(c_final)
        lam_prev = lam

    return PathSolution(
        lambdas=grid.values.copy(), coefs=coefs, objective=objective,
        strong_sizes=strong_sizes, ever_active_sizes=ever_sizes,
        kkt_violations_strong=viol_strong, kkt_violations_full=viol_full,
        sweeps_used=sweeps_used, converged=converged, n_cols=p,
        family="gaussian",
    )
