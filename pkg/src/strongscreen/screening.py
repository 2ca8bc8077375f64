"""Discard rules for pathwise L1-type fits.

Every rule is a pure function of precomputed statistics (inner products,
norms, penalties) and returns a :class:`ScreenMask`.  Discarding uses a
strict inequality, so a statistic exactly at the threshold is kept; a
negative threshold keeps everything.  None of the rules mutate solver
state, which keeps one gradient pass sufficient for all of them.

The safe rules never discard a predictor that is active in the exact
solution.  The strong rules can, rarely, so their output must be followed
by a KKT check whenever exactness matters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class RuleId(str, enum.Enum):
    SAFE_BASIC = "SafeBasic"
    STRONG_BASIC = "StrongBasic"
    STRONG_SEQUENTIAL = "StrongSequential"
    SAFE_EN = "SafeEN"
    STRONG_EN_GLOBAL = "StrongENGlobal"
    STRONG_EN_SEQUENTIAL = "StrongENSequential"
    STRONG_LOGISTIC_GLOBAL = "StrongLogisticGlobal"
    STRONG_LOGISTIC_SEQUENTIAL = "StrongLogisticSequential"
    STRONG_GROUP = "StrongGroup"
    STRONG_GENERAL = "StrongGeneral"
    SEQ_SAFE_EXPERIMENTAL = "SeqSafeExperimental"
    GLASSO_ROW = "GlassoRow"
    GLASSO_ELEMENT = "GlassoElement"


@dataclass(frozen=True)
class ScreenMask:
    """Keep/discard decision per predictor (or per group/row).

    ``threshold`` records the rule's right-hand side.  For rules whose
    right-hand side varies per column (the safe family with non-uniform
    column norms) the mask is computed column-wise and ``threshold``
    stores the largest, i.e. most aggressive, value.
    """

    keep: np.ndarray
    threshold: float
    rule_id: RuleId

    @property
    def n_kept(self) -> int:
        return int(np.count_nonzero(self.keep))

    def kept_indices(self) -> np.ndarray:
        return np.nonzero(self.keep)[0].astype(np.int64)

    def discarded_indices(self) -> np.ndarray:
        return np.nonzero(~self.keep)[0].astype(np.int64)


def _mask(stat, rhs, rule_id) -> ScreenMask:
    stat = np.asarray(stat, dtype=np.float64)
    rhs_arr = np.broadcast_to(np.asarray(rhs, dtype=np.float64), stat.shape)
    keep = stat >= rhs_arr
    return ScreenMask(keep=keep, threshold=float(np.max(rhs_arr)), rule_id=rule_id)


def safe_basic(c_abs, lam, lam_max, col_norms, y_norm) -> ScreenMask:
    """Dual-feasibility bound: discard j when
    |x_j.y| < lam - ||x_j|| ||y|| (lam_max - lam) / lam_max.

    Guaranteed never to discard a predictor that is active at ``lam``.
    """
    if not 0 < lam <= lam_max * (1 + 1e-12):
        raise ValueError("lam must lie in (0, lam_max]")
    rhs = lam - np.asarray(col_norms) * y_norm * (lam_max - lam) / lam_max
    return _mask(c_abs, rhs, RuleId.SAFE_BASIC)


def strong_basic(c_abs, lam, lam_max) -> ScreenMask:
    """Global strong rule: discard j when |x_j.y| < 2 lam - lam_max."""
    if not 0 < lam <= lam_max * (1 + 1e-12):
        raise ValueError("lam must lie in (0, lam_max]")
    return _mask(c_abs, 2.0 * lam - lam_max, RuleId.STRONG_BASIC)


def strong_sequential(c_abs_at_residual, lam, lam_prev) -> ScreenMask:
    """Sequential strong rule: with r the residual at the previous penalty
    lam_prev, discard j when |x_j.r| < 2 lam - lam_prev.

    At lam == lam_prev this is exactly the KKT exclusion test |x_j.r| < lam.
    """
    if not 0 < lam <= lam_prev * (1 + 1e-12):
        raise ValueError("lam must lie in (0, lam_prev]")
    return _mask(c_abs_at_residual, 2.0 * lam - lam_prev, RuleId.STRONG_SEQUENTIAL)


def safe_en(c_abs, lam1, lam2, col_norms, y_norm, lam1_max) -> ScreenMask:
    """Safe rule for the elastic net via the augmented design: the ridge
    term inflates each column norm to sqrt(||x_j||^2 + lam2).

    With lam2 == 0 this reduces bit-exactly to :func:`safe_basic`.
    """
    if lam2 < 0:
        raise ValueError("ridge penalty must be nonnegative")
    aug = np.sqrt(np.asarray(col_norms, dtype=np.float64) ** 2 + lam2)
    rhs = lam1 - y_norm * aug * (lam1_max - lam1) / lam1_max
    return _mask(c_abs, rhs, RuleId.SAFE_EN)


def strong_en(c_abs, lam, lam_ref, alpha, sequential: bool = False) -> ScreenMask:
    """Strong rule for the elastic net in the (alpha, lam) parametrization:
    discard when the inner product is below alpha (2 lam - lam_ref).

    alpha == 1 recovers the lasso strong rules.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    rule = RuleId.STRONG_EN_SEQUENTIAL if sequential else RuleId.STRONG_EN_GLOBAL
    return _mask(c_abs, alpha * (2.0 * lam - lam_ref), rule)


def strong_logistic(c_abs_vs_probs, lam, lam_ref, sequential: bool = False) -> ScreenMask:
    """Strong rule for L1 logistic regression.

    ``c_abs_vs_probs`` holds |x_j.(y - p)| where p is the fitted
    probability vector at the reference penalty (the constant ybar vector
    for the global form).
    """
    rule = (RuleId.STRONG_LOGISTIC_SEQUENTIAL if sequential
            else RuleId.STRONG_LOGISTIC_GLOBAL)
    return _mask(c_abs_vs_probs, 2.0 * lam - lam_ref, rule)


def strong_group(block_norms, lam, lam_prev) -> ScreenMask:
    """Group rule: discard block l when ||X_l^T r||_2 < 2 lam - lam_prev,
    with r the residual at the previous penalty."""
    return _mask(block_norms, 2.0 * lam - lam_prev, RuleId.STRONG_GROUP)


def strong_general(grad_norms, a_bound, lam, lam_prev) -> ScreenMask:
    """Strong rule for a generic separable penalty whose subgradient blocks
    satisfy ||s_k||_q <= A: discard unit k when
    ||grad_k|| < (1 + A) lam - A lam_prev.

    A == 1 on scalar units reduces to :func:`strong_sequential`; on block
    norms it reduces to :func:`strong_group`.
    """
    if a_bound < 0:
        raise ValueError("subgradient bound must be nonnegative")
    rhs = (1.0 + a_bound) * lam - a_bound * lam_prev
    return _mask(grad_norms, rhs, RuleId.STRONG_GENERAL)


def seq_safe_experimental(c_abs_at_residual, lam, lam_prev, col_norms, r_norm) -> ScreenMask:
    """Sequential variant of the safe rule with the residual in place of y:
    discard j when |x_j.r| < lam - ||r|| ||x_j|| (lam_prev - lam) / lam_prev.

    ``lam_prev`` must be max_j |x_j.r| recomputed at the current residual.
    No exactness proof is known for this rule, so every use must be paired
    with KKT verification.
    """
    rhs = lam - r_norm * np.asarray(col_norms, dtype=np.float64) * (
        (lam_prev - lam) / lam_prev
    )
    return _mask(c_abs_at_residual, rhs, RuleId.SEQ_SAFE_EXPERIMENTAL)


def glasso_row_rule(sigma0_row, s_row, lam, lam_prev) -> bool:
    """Row/column rule for the graphical lasso.

    ``sigma0_row`` and ``s_row`` are the off-diagonal entries of one row of
    the previous solution's covariance estimate and of S.  Returns True when
    the whole row (and column) can be discarded, i.e. set to zero off the
    diagonal while the diagonal entry is retained.
    """
    stat = float(np.max(np.abs(np.asarray(sigma0_row) - np.asarray(s_row))))
    return stat < 2.0 * lam - lam_prev


def glasso_row_screen(sigma0, s, lam, lam_prev, prev_discarded=None) -> ScreenMask:
    """Vectorized row rule over all rows of a covariance pair.

    Rows listed in ``prev_discarded`` were zero at the previous penalty; for
    those the previous covariance estimate is reconstructed as S itself, so
    their statistic is zero and they stay discarded whenever 2 lam > lam_prev.
    """
    sigma0 = np.asarray(sigma0, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    p = s.shape[0]
    diff = np.abs(sigma0 - s)
    np.fill_diagonal(diff, 0.0)
    stat = diff.max(axis=1)
    if prev_discarded is not None and len(prev_discarded):
        stat = stat.copy()
        stat[np.asarray(prev_discarded, dtype=np.int64)] = 0.0
    thr = 2.0 * lam - lam_prev
    keep = stat >= thr
    return ScreenMask(keep=keep, threshold=float(thr), rule_id=RuleId.GLASSO_ROW)


def glasso_element_screen(sigma0, s, lam, lam_prev) -> np.ndarray:
    """Elementwise rule |S_ij - sigma0_ij| < 2 lam - lam_prev.

    Returns a boolean matrix of entries to keep free (diagonal always kept);
    suited to optimizers that visit elements rather than whole rows.
    """
    diff = np.abs(np.asarray(sigma0, dtype=np.float64) - np.asarray(s, dtype=np.float64))
    keep = diff >= (2.0 * lam - lam_prev)
    np.fill_diagonal(keep, True)
    return keep
