"""Checks for the conditions under which the strong rules cannot fail.

When the inverse Gram matrix of the design is diagonally dominant, the
inner products c_j(lam) = x_j . (y - X beta_hat(lam)) move at unit speed
at most, and both the global and sequential strong rules are exact.  The
certificate verifies that condition directly; the slope monitor estimates
the per-segment slopes of c_j along a solved path and flags any segment
faster than unit speed, together with the sequential-rule violations such
segments can produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DesignMatrix, LambdaGrid, ResponseVector
from .errors import InvalidCorrelation, RankDeficient
from .lasso import SolverConfig, Strategy, solve_path
from .screening import strong_sequential

SLOPE_TOL = 1e-6


@dataclass(frozen=True)
class DominanceCertificate:
    holds: bool
    worst_row_margin: float


@dataclass
class SlopeTrace:
    """Finite-difference slopes of the inner products along a solved path.

    ``slopes[k, j]`` estimates the derivative of c_j on the segment from
    lambdas[k] to lambdas[k+1]; ``violating_segments`` lists (j, k, slope)
    for every segment exceeding unit absolute slope, and
    ``rule_violations`` lists (j, k) whenever the sequential strong rule
    applied from grid point k would wrongly discard predictor j at k+1.
    """

    lambdas: np.ndarray
    slopes: np.ndarray
    max_abs_slope: float
    violating_segments: list[tuple[int, int, float]]
    rule_violations: list[tuple[int, int]]


def diag_dominance_certificate(x) -> DominanceCertificate:
    """Check whether the inverse Gram matrix is diagonally dominant.

    Requires n >= p and full column rank.  Returns the worst row margin
    |A_ii| - sum_{j != i} |A_ij|; the certificate holds when the margin is
    nonnegative (up to floating-point slack).
    """
    xd = x.to_dense() if isinstance(x, DesignMatrix) else np.asarray(x, float)
    n, p = xd.shape
    if n < p:
        raise RankDeficient("need at least as many rows as columns")
    gram = xd.T @ xd
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 1e-12 * max(1.0, eigs[-1]):
        raise RankDeficient("design is rank deficient")
    inv = np.linalg.inv(gram)
    diag = np.abs(np.diag(inv))
    offsum = np.abs(inv).sum(axis=1) - diag
    margins = diag - offsum
    worst = float(margins.min())
    slack = 1e-10 * float(np.abs(inv).max())
    return DominanceCertificate(holds=worst >= -slack, worst_row_margin=worst)


def equicorrelation_inverse(p: int, r: float) -> np.ndarray:
    """Closed-form inverse of the Gram matrix with unit diagonal and
    constant off-diagonal correlation r:

        (1 / (1 - r)) * (I - r 11' / (1 + r (p - 1)))

    Valid for -1/(p-1) < r < 1, the positive-definite range.
    """
    if p < 2:
        raise InvalidCorrelation("need at least two columns")
    if not (-1.0 / (p - 1) < r < 1.0):
        raise InvalidCorrelation(
            f"r={r} outside (-1/(p-1), 1) for p={p}")
    eye = np.eye(p)
    ones = np.ones((p, p))
    return (eye - r * ones / (1.0 + r * (p - 1))) / (1.0 - r)


def equicorrelation_gram(p: int, r: float) -> np.ndarray:
    """The Gram matrix the closed form inverts: (1-r) I + r 11'."""
    if not (-1.0 / (p - 1) < r < 1.0):
        raise InvalidCorrelation(f"r={r} outside the valid range")
    return (1.0 - r) * np.eye(p) + r * np.ones((p, p))


def design_from_gram(gram: np.ndarray, n_rows: int | None = None) -> np.ndarray:
    """An n x p matrix whose columns reproduce the given Gram exactly
    (symmetric square root padded with zero rows)."""
    p = gram.shape[0]
    n_rows = p if n_rows is None else n_rows
    if n_rows < p:
        raise ValueError("need n_rows >= p")
    evals, evecs = np.linalg.eigh(gram)
    if evals.min() <= 0:
        raise ValueError("gram matrix must be positive definite")
    root = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    out = np.zeros((n_rows, p))
    out[:p, :] = root
    return out


def slope_monitor(x: DesignMatrix, y: ResponseVector, grid: LambdaGrid,
                  config: SolverConfig | None = None) -> SlopeTrace:
    """Solve the exact path and measure how fast each inner product moves.

    Uses the all-predictors strategy so every grid point is an exact,
    KKT-verified solution; a fine grid (several hundred points) keeps
    path kinks from hiding fast segments.  A segment slope beyond
    1 + 1e-6 in absolute value is flagged.
    """
    config = config or SolverConfig()
    if config.strategy is not Strategy.NAIVE:
        from dataclasses import replace
        config = replace(config, strategy=Strategy.NAIVE)
    sol = solve_path(x, y, grid, config)
    lams = grid.values
    n_grid, p = len(lams), x.n_cols

    c = np.zeros((n_grid, p))
    betas = sol.betas()
    for k in range(n_grid):
        r = y.values - x.matvec(betas[k])
        c[k] = x.inner_products(r)

    dl = np.diff(lams)
    slopes = (c[1:] - c[:-1]) / dl[:, None]
    bad = np.abs(slopes) > 1.0 + SLOPE_TOL
    violating = [(int(j), int(k), float(slopes[k, j]))
                 for k, j in zip(*np.nonzero(bad))]

    rule_violations = []
    for k in range(n_grid - 1):
        mask = strong_sequential(np.abs(c[k]), float(lams[k + 1]),
                                 float(lams[k]))
        wrong = ~mask.keep & (betas[k + 1] != 0.0)
        rule_violations.extend((int(j), int(k)) for j in np.nonzero(wrong)[0])

    return SlopeTrace(
        lambdas=lams.copy(), slopes=slopes,
        max_abs_slope=float(np.abs(slopes).max()) if slopes.size else 0.0,
        violating_segments=violating, rule_violations=rule_violations,
    )
