"""Sparse inverse covariance estimation (graphical lasso).

Maximizes log det(Theta) - tr(S Theta) - lam * sum of off-diagonal
|Theta_ij| over positive-definite matrices; the diagonal is unpenalized,
which pins the working covariance diagonal to diag(S).  The solver cycles
rows/columns: each row subproblem is an L1 regression in Gram form solved
with the shared coordinate-descent kernel, after which the row of the
working covariance is refreshed.

Pathwise fits can discard whole rows/columns (or single elements) with
the sequential rules before solving; a full subgradient check afterwards
frees anything screened in error and re-solves, so screening never
changes the answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import LambdaGrid
from .errors import NonPSDInput, NotConverged
from .lasso import SolverConfig
from .screening import glasso_element_screen, glasso_row_screen


@dataclass
class PrecisionPair:
    """Precision matrix and its inverse, kept together."""

    theta: np.ndarray
    sigma: np.ndarray

    def check(self, sym_tol: float = 1e-10, inv_tol: float = 1e-6):
        """Validate symmetry, positive definiteness and mutual inversion."""
        t, s = self.theta, self.sigma
        if np.max(np.abs(t - t.T)) > sym_tol:
            raise ValueError("precision matrix is not symmetric")
        np.linalg.cholesky(t)  # raises LinAlgError when not PD
        gap = np.max(np.abs(t @ s - np.eye(t.shape[0])))
        if gap > inv_tol:
            raise ValueError(f"theta @ sigma deviates from I by {gap:.2e}")
        return True


@dataclass
class GlassoSubgradient:
    """Off-diagonal subgradient implied by a solution: (sigma - S) / lam."""

    gamma: np.ndarray

    @classmethod
    def from_solution(cls, pair: PrecisionPair, s: np.ndarray, lam: float):
        gamma = (pair.sigma - s) / lam
        np.fill_diagonal(gamma, 0.0)
        return cls(gamma=gamma)

    def valid(self, theta: np.ndarray, tol: float = 1e-6) -> bool:
        if np.max(np.abs(self.gamma)) > 1.0 + tol:
            return False
        off = ~np.eye(theta.shape[0], dtype=bool)
        nz = off & (theta != 0.0)
        return bool(np.all(np.abs(self.gamma[nz] - np.sign(theta[nz])) <= tol))


@dataclass
class GlassoPath:
    """Per-penalty solutions plus screening telemetry."""

    lambdas: np.ndarray
    pairs: list[PrecisionPair]
    rule: str
    discarded_rows: list[np.ndarray]
    masked_elements: np.ndarray
    screen_violations: np.ndarray
    sweeps_used: np.ndarray = field(default=None)


def glasso_objective(theta: np.ndarray, s: np.ndarray, lam: float) -> float:
    """Penalized log-likelihood (to be maximized); diagonal unpenalized."""
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return -np.inf
    pen = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(logdet - (s * theta).sum() - lam * pen)


def subgradient_excess(pair: PrecisionPair, s: np.ndarray,
                       lam: float) -> np.ndarray:
    """Off-diagonal stationarity excess matrix.

    Zero entries of theta contribute max(0, |sigma - s| - lam); nonzero
    entries contribute |sigma - s - lam sign(theta)|.  Diagonal entries
    contribute |sigma - s| (exactly zero at a solution).
    """
    diff = pair.sigma - s
    out = np.abs(diff - lam * np.sign(pair.theta))
    zero = pair.theta == 0.0
    out[zero] = np.maximum(0.0, np.abs(diff[zero]) - lam)
    d = np.arange(s.shape[0])
    out[d, d] = np.abs(diff[d, d])
    return out


def lambda_max_glasso(s: np.ndarray) -> float:
    """Largest absolute off-diagonal entry of S: above it the precision
    estimate is exactly diagonal."""
    off = np.abs(s).copy()
    np.fill_diagonal(off, 0.0)
    return float(off.max())


def _check_input(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise NonPSDInput("covariance input must be square")
    scale = max(1.0, float(np.abs(s).max()))
    if np.max(np.abs(s - s.T)) > 1e-8 * scale:
        raise NonPSDInput("covariance input is not symmetric")
    s = 0.5 * (s + s.T)
    if np.any(np.diag(s) <= 0):
        raise NonPSDInput("covariance diagonal must be positive")
    if float(np.linalg.eigvalsh(s)[0]) < -1e-8 * scale:
        raise NonPSDInput("covariance input has a negative eigenvalue")
    return s


def _diagonal_pair(s: np.ndarray) -> PrecisionPair:
    d = np.diag(s).copy()
    return PrecisionPair(theta=np.diag(1.0 / d), sigma=np.diag(d))


def _engine(s, lam, w, b, kept, free, tol, max_outer, inner_cap):
    """Blockwise sweeps over kept rows; ``w`` and ``b`` updated in place.

    ``b[i, j]`` is the regression weight of row i in column j's
    subproblem; ``free`` marks off-diagonal entries allowed nonzero.
    Returns the number of sweeps.
    """
    p = s.shape[0]
    ker = kernels.active()
    kept_idx = np.nonzero(kept)[0]
    inner_tol = max(tol * 1e-3, 1e-13)
    for outer in range(max_outer):
        max_change = 0.0
        for j in kept_idx:
            idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
            w11 = np.ascontiguousarray(w[np.ix_(idx, idx)])
            s12 = np.ascontiguousarray(s[idx, j])
            beta = np.ascontiguousarray(b[idx, j])
            freeable = free[idx, j] & kept[idx]
            active = np.nonzero(freeable)[0].astype(np.int64)
            q = w11 @ beta
            ker.cd_gram(w11, s12, q, beta, active, lam, inner_tol, inner_cap)
            w12 = w11 @ beta
            change = float(np.max(np.abs(w[idx, j] - w12))) if p > 1 else 0.0
            if change > max_change:
                max_change = change
            w[idx, j] = w12
            w[j, idx] = w12
            b[idx, j] = beta
        if max_change < tol:
            return outer + 1
    raise NotConverged(
        f"graphical lasso did not converge in {max_outer} sweeps")


def _reconstruct_theta(s, w, b, kept):
    p = s.shape[0]
    theta = np.zeros((p, p))
    for j in range(p):
        if not kept[j]:
            theta[j, j] = 1.0 / s[j, j]
            continue
        idx = np.concatenate([np.arange(j), np.arange(j + 1, p)])
        beta = b[idx, j]
        denom = w[j, j] - float(beta @ w[idx, j])
        if denom <= 0:
            raise NotConverged("working covariance lost positive definiteness")
        tjj = 1.0 / denom
        theta[j, j] = tjj
        theta[idx, j] = -beta * tjj
    # enforce a symmetric support, then average
    support = (theta != 0.0) & (theta.T != 0.0)
    theta = np.where(support, 0.5 * (theta + theta.T), 0.0)
    return theta


def graphical_lasso(s: np.ndarray, lam: float,
                    warm: PrecisionPair | None = None,
                    config: SolverConfig | None = None,
                    tol: float = 1e-6, max_outer: int = 500,
                    kept_rows: np.ndarray | None = None,
                    free_elements: np.ndarray | None = None) -> PrecisionPair:
    """Solve one penalized inverse-covariance problem.

    ``kept_rows`` / ``free_elements`` restrict the optimization (rows or
    entries forced to zero off the diagonal); discarded rows keep
    theta_ii = 1 / S_ii, forced by the unpenalized-diagonal stationarity.
    """
    s = _check_input(s)
    config = config or SolverConfig()
    p = s.shape[0]
    if lam <= 0:
        raise ValueError("penalty must be positive")
    if p == 1:
        pair = _diagonal_pair(s)
        pair._sweeps = 0
        return pair
    kept = np.ones(p, dtype=bool) if kept_rows is None \
        else np.asarray(kept_rows, dtype=bool).copy()
    free = np.ones((p, p), dtype=bool) if free_elements is None \
        else np.asarray(free_elements, dtype=bool).copy()
    np.fill_diagonal(free, False)  # diagonal handled by the w22 = s22 pin

    w = np.diag(np.diag(s)).astype(np.float64)
    b = np.zeros((p, p))
    if warm is not None:
        w_prev = warm.sigma
        t_prev = warm.theta
        keep2 = np.outer(kept, kept)
        w[keep2] = w_prev[keep2]
        np.fill_diagonal(w, np.diag(s))
        dj = np.diag(t_prev).copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            bb = -t_prev / dj[None, :]
        bb[~np.isfinite(bb)] = 0.0
        np.fill_diagonal(bb, 0.0)
        bb[~free] = 0.0
        bb[~kept, :] = 0.0
        bb[:, ~kept] = 0.0
        b = bb
        w[~kept, :] = 0.0
        w[:, ~kept] = 0.0
        np.fill_diagonal(w, np.diag(s))

    sweeps = _engine(s, lam, w, b, kept, free, tol, max_outer,
                     config.max_sweeps)
    theta = _reconstruct_theta(s, w, b, kept)
    pair = PrecisionPair(theta=theta, sigma=w)
    pair._sweeps = sweeps
    return pair


def solve_glasso_path(s: np.ndarray, grid: LambdaGrid,
                      config: SolverConfig | None = None,
                      rule: str = "rowwise", tol: float = 1e-6,
                      max_outer: int = 500) -> GlassoPath:
    """Pathwise graphical lasso with optional row or element screening.

    At each penalty the screen is applied against the previous solution,
    the restricted problem is solved, and the full subgradient conditions
    are verified; any entry screened in error is freed and the solve
    repeats (the violation is counted).  ``rule`` is one of "rowwise",
    "elementwise", "none".
    """
    if rule not in ("rowwise", "elementwise", "none"):
        raise ValueError("rule must be 'rowwise', 'elementwise' or 'none'")
    s = _check_input(s)
    config = config or SolverConfig()
    p = s.shape[0]
    tol_rel = config.kkt_tolerance

    prev_pair = _diagonal_pair(s)
    prev_discarded = np.zeros(0, dtype=np.int64)
    prev_masked = None  # elementwise: entries forced zero at previous lam
    lam_prev = float(grid.lambda_max)

    pairs, discarded_rows = [], []
    masked_elements = np.zeros(len(grid), dtype=np.int64)
    violations = np.zeros(len(grid), dtype=np.int64)
    sweeps_used = np.zeros(len(grid), dtype=np.int64)

    for k, lam in enumerate(grid.values):
        lam = float(lam)
        ref = max(lam_prev, lam)
        kept = np.ones(p, dtype=bool)
        free = np.ones((p, p), dtype=bool)
        if rule == "rowwise":
            mask = glasso_row_screen(prev_pair.sigma, s, lam, ref,
                                     prev_discarded)
            kept = mask.keep.copy()
        elif rule == "elementwise":
            sigma_ref = prev_pair.sigma.copy()
            if prev_masked is not None:
                sigma_ref[prev_masked] = s[prev_masked]
            free = glasso_element_screen(sigma_ref, s, lam, ref)

        warm = prev_pair
        lam_tol = tol
        for _ in range(p + 1):
            pair = graphical_lasso(s, lam, warm=warm, config=config,
                                   tol=lam_tol, max_outer=max_outer,
                                   kept_rows=kept, free_elements=free)
            sweeps_used[k] += pair._sweeps
            exc = subgradient_excess(pair, s, lam)
            bad = exc > tol_rel * lam + 10.0 * lam_tol
            np.fill_diagonal(bad, False)
            if not np.any(bad):
                break
            screened = ~np.outer(kept, kept) | ~free
            bad_screened = bad & screened
            if np.any(bad_screened):
                ii, jj = np.nonzero(bad_screened)
                pairs_bad = {tuple(sorted(e)) for e in zip(ii, jj)}
                violations[k] += len(pairs_bad)
                kept[np.unique(ii)] = True
                free[bad_screened] = True
                free[bad_screened.T] = True
                warm = pair
                continue
            # violation inside the solved part: tighten and retry
            lam_tol *= 0.1
            warm = pair
        else:
            raise NotConverged("screening repair loop failed to close")

        pairs.append(pair)
        discarded_rows.append(np.nonzero(~kept)[0])
        if rule == "elementwise":
            off = ~np.eye(p, dtype=bool)
            masked_elements[k] = int((~free & off).sum())
            prev_masked = ~free & off
        prev_pair = pair
        prev_discarded = np.nonzero(~kept)[0]
        lam_prev = lam

    return GlassoPath(lambdas=grid.values.copy(), pairs=pairs, rule=rule,
                      discarded_rows=discarded_rows,
                      masked_elements=masked_elements,
                      screen_violations=violations, sweeps_used=sweeps_used)
