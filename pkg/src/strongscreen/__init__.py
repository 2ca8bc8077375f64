"""Pathwise sparse regression with predictor screening rules.

Discard rules (safe, strong, sequential and their elastic-net, logistic,
group and graphical-lasso variants) paired with KKT-verified coordinate
descent, so screened fits always match the unscreened solution.
"""

from . import kernels
from .core import (Coefficients, DesignMatrix, LambdaGrid, ResponseVector,
                   inner_products, lambda_max, residual, standardize)
from .errors import (ConstantColumn, DegenerateResponse, DimensionMismatch,
                     InvalidCorrelation, InvalidSpec, MaxSweepsExceeded,
                     MismatchedSolutions, NonPSDInput, NotConverged,
                     RankDeficient)
from .glasso import (GlassoPath, GlassoSubgradient, PrecisionPair,
                     glasso_objective, graphical_lasso, lambda_max_glasso,
                     solve_glasso_path, subgradient_excess)
from .grouped import (GroupSpec, group_block_descent, kkt_check_group,
                      lambda_max_group, solve_group_path)
from .guarantees import (DominanceCertificate, SlopeTrace,
                         diag_dominance_certificate, equicorrelation_gram,
                         equicorrelation_inverse, slope_monitor)
from .lasso import (KktReport, PathSolution, SolverConfig, Strategy,
                    coord_descent, default_grid_ratio, kkt_check, make_grid,
                    solve_path)
from .logistic import (LogisticState, fit_logistic, kkt_check_logistic,
                       solve_path_logistic)
from .screening import (RuleId, ScreenMask, glasso_element_screen,
                        glasso_row_rule, glasso_row_screen, safe_basic,
                        safe_en, seq_safe_experimental, strong_basic,
                        strong_en, strong_general, strong_group,
                        strong_logistic, strong_sequential)
from .experiments import (ExperimentResult, SimSpec, glasso_survivors,
                          kernel_bench, simulate, strong_vs_ever_active,
                          survivor_curves, timing_bench, violation_study)

__version__ = "0.1.0"

__all__ = [
    "Coefficients", "DesignMatrix", "LambdaGrid", "ResponseVector",
    "inner_products", "lambda_max", "residual", "standardize",
    "ConstantColumn", "DegenerateResponse", "DimensionMismatch",
    "InvalidCorrelation", "InvalidSpec", "MaxSweepsExceeded",
    "MismatchedSolutions", "NonPSDInput", "NotConverged", "RankDeficient",
    "GlassoPath", "GlassoSubgradient", "PrecisionPair", "glasso_objective",
    "graphical_lasso", "lambda_max_glasso", "solve_glasso_path",
    "subgradient_excess",
    "GroupSpec", "group_block_descent", "kkt_check_group",
    "lambda_max_group", "solve_group_path",
    "DominanceCertificate", "SlopeTrace", "diag_dominance_certificate",
    "equicorrelation_gram", "equicorrelation_inverse", "slope_monitor",
    "KktReport", "PathSolution", "SolverConfig", "Strategy",
    "coord_descent", "default_grid_ratio", "kkt_check", "make_grid",
    "solve_path",
    "LogisticState", "fit_logistic", "kkt_check_logistic",
    "solve_path_logistic",
    "RuleId", "ScreenMask", "glasso_element_screen", "glasso_row_rule",
    "glasso_row_screen", "safe_basic", "safe_en", "seq_safe_experimental",
    "strong_basic", "strong_en", "strong_general", "strong_group",
    "strong_logistic", "strong_sequential",
    "ExperimentResult", "SimSpec", "glasso_survivors", "kernel_bench",
    "simulate", "strong_vs_ever_active", "survivor_curves", "timing_bench",
    "violation_study",
    "kernels",
]
