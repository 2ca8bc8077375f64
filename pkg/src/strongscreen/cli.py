"""Command-line interface.

Subcommands
-----------
fit         Fit a penalty path to a data file and write coefficient and
            telemetry CSVs.
screen      Evaluate a discard rule at one penalty from raw statistics,
            without solving; prints the threshold and kept indices.
experiment  Run simulation studies (survivor curves, violation counts,
            strong-vs-ever-active, graphical-lasso screening) and write
            the experiment CSV schema.
bench       Wall-clock comparisons: path strategies against each other
            and, optionally, the compiled kernels against the pure-Python
            fallback.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical non-convergence.
Input formats are documented in the readers module: dense CSV carries the
response in the first column; svmlight lines are "label idx:val ..." with
1-based indices.  The environment variable STRONGSCREEN_SEED provides a
fallback seed for simulation subcommands.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .core import Coefficients, lambda_max, standardize
from .errors import (DegenerateResponse, InvalidSpec, MismatchedSolutions,
                     NonPSDInput, NotConverged, StrongScreenError)
from .experiments import (ExperimentResult, ResultRow, SimSpec, glasso_survivors,
                          kernel_bench, strong_vs_ever_active, survivor_curves,
                          timing_bench, violation_study)
from .glasso import lambda_max_glasso, solve_glasso_path
from .grouped import GroupSpec, lambda_max_group, solve_group_path
from .lasso import (SolverConfig, default_grid_ratio, make_grid, solve_path)
from .logistic import solve_path_logistic
from .readers import ParseFailure, read_dense_csv, read_svmlight
from .screening import RuleId, safe_basic, safe_en, strong_basic, strong_en, \
    strong_logistic, strong_sequential

SCREEN_RULES = ("safe", "strong", "strong-sequential", "safe-en",
                "strong-en", "strong-logistic")

_STANDARDIZE_MODES = {"scale": "center_and_scale", "center": "center_only",
                      "none": "none"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_data_flags(p):
    p.add_argument("--input", required=True, help="input data file")
    p.add_argument("--format", choices=("csv", "svmlight"), default="csv")
    p.add_argument("--header", action="store_true",
                   help="skip one CSV header row")


def _add_grid_flags(p):
    p.add_argument("--nlambda", type=int, default=100)
    p.add_argument("--lambda-min-ratio", type=float, default=None,
                   dest="lambda_min_ratio")
    p.add_argument("--grid-spacing", choices=("log", "linear"), default="log",
                   dest="grid_spacing")


def _add_sim_flags(p):
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--nonzero-frac", type=float, default=None,
                   dest="nonzero_frac")
    p.add_argument("--coef-scheme", default=None, dest="coef_scheme")
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--design", choices=("dense", "sparse_binary"),
                   default=None)
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--scale-spread", type=float, default=None,
                   dest="scale_spread")
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="strongscreen")
    sub = parser.add_subparsers(dest="cmd", required=True)

    fit = sub.add_parser("fit", help="fit a penalty path to a data file")
    _add_data_flags(fit)
    _add_grid_flags(fit)
    fit.add_argument("--family",
                     choices=("gaussian", "logistic", "group", "glasso"),
                     default="gaussian")
    fit.add_argument("--alpha", type=float, default=1.0)
    fit.add_argument("--strategy",
                     choices=("naive", "ever_active", "strong", "combined"),
                     default="combined")
    fit.add_argument("--standardize", choices=tuple(_STANDARDIZE_MODES),
                     default="scale")
    fit.add_argument("--standardized-coefs", action="store_true",
                     dest="standardized_coefs",
                     help="report coefficients on the standardized scale")
    fit.add_argument("--group-size", type=int, default=None, dest="group_size")
    fit.add_argument("--glasso-rule",
                     choices=("rowwise", "elementwise", "none"),
                     default="rowwise", dest="glasso_rule")
    fit.add_argument("--output", default=None, help="coefficient CSV path")
    fit.add_argument("--telemetry", default=None, help="telemetry CSV path")

    screen = sub.add_parser("screen", help="one-shot rule evaluation")
    _add_data_flags(screen)
    screen.add_argument("--rule", required=True)
    screen.add_argument("--lambda", type=float, required=True, dest="lam")
    screen.add_argument("--lambda0", type=float, default=None, dest="lam0")
    screen.add_argument("--alpha", type=float, default=1.0)
    screen.add_argument("--standardize", choices=tuple(_STANDARDIZE_MODES),
                        default="scale")
    screen.add_argument("--output", default=None)

    expr = sub.add_parser("experiment", help="simulation studies")
    expr.add_argument("--paper-figure", type=int, default=None,
                      choices=(1, 3, 4, 5, 6, 7), dest="paper_figure")
    expr.add_argument("--rules", default=None,
                      help="comma-separated rule ids for survivor curves")
    _add_sim_flags(expr)
    _add_grid_flags(expr)
    expr.add_argument("--family", choices=("gaussian", "binomial"),
                      default=None)
    expr.add_argument("--alpha", type=float, default=1.0)
    expr.add_argument("--reps", type=int, default=20)
    expr.add_argument("--threads", type=int, default=1)
    expr.add_argument("--output", default=None)

    bench = sub.add_parser("bench", help="timing studies at desk scale")
    bench.add_argument("--preset",
                       choices=("table1", "table1-sparse", "table2", "table3"),
                       default=None)
    _add_sim_flags(bench)
    _add_grid_flags(bench)
    bench.add_argument("--family", choices=("gaussian", "binomial"),
                       default=None)
    bench.add_argument("--alpha", type=float, default=1.0)
    bench.add_argument("--strategies", default="naive,combined")
    bench.add_argument("--compare-kernels", action="store_true",
                       dest="compare_kernels")
    bench.add_argument("--output", default=None)
    return parser


def _read(args, with_response=True):
    if args.format == "svmlight":
        return read_svmlight(args.input)
    return read_dense_csv(args.input, header=args.header,
                          with_response=with_response)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("STRONGSCREEN_SEED")
    if env is not None:
        return int(env)
    raise InvalidSpec("simulation subcommands need --seed "
                      "(or STRONGSCREEN_SEED)")


def _out_stream(path):
    return open(path, "w") if path else sys.stdout


def _write_coef_rows(fh, lam, entries, intercept, with_intercept):
    if with_intercept:
        fh.write(f"{lam:.10g},intercept,{intercept:.10g}\n")
    for j in sorted(entries):
        fh.write(f"{lam:.10g},{j},{entries[j]:.10g}\n")


def _coef_on_original_scale(coef: Coefficients, design, response, family):
    entries = {j: v / design.col_scales[j] for j, v in coef.entries.items()}
    base = coef.intercept if family == "logistic" else response.mean_offset
    icpt = base - sum(v * design.col_centers[j] for j, v in entries.items())
    return entries, icpt


def cmd_fit(args) -> int:
    config = SolverConfig(
        grid_size=args.nlambda,
        grid_ratio=args.lambda_min_ratio or 0.001,
        strategy=args.strategy, alpha=args.alpha,
        grid_spacing=args.grid_spacing)
    mode = _STANDARDIZE_MODES[args.standardize]

    if args.family == "glasso":
        if args.format != "csv":
            raise InvalidSpec("glasso expects a dense CSV data matrix "
                              "(every column a variable)")
        data = _read(args, with_response=False)
        mu = data.mean(axis=0)
        s = (data - mu).T @ (data - mu) / data.shape[0]
        lm = lambda_max_glasso(s)
        ratio = args.lambda_min_ratio or 0.05
        grid = make_grid(lm, args.nlambda, ratio, args.grid_spacing)
        path = solve_glasso_path(s, grid, config=config, rule=args.glasso_rule)
        with _out_stream(args.output) as fh:
            fh.write("lambda,predictor,value\n")
            for lam, pair in zip(grid.values, path.pairs):
                t = pair.theta
                for i in range(t.shape[0]):
                    for j in range(i, t.shape[1]):
                        if t[i, j] != 0.0:
                            fh.write(f"{lam:.10g},{i}:{j},{t[i, j]:.10g}\n")
        if args.telemetry:
            with open(args.telemetry, "w") as fh:
                fh.write("lambda,discarded_rows,screen_violations,sweeps\n")
                for k, lam in enumerate(grid.values):
                    fh.write(f"{lam:.10g},{len(path.discarded_rows[k])},"
                             f"{path.screen_violations[k]},"
                             f"{path.sweeps_used[k]}\n")
        return 0

    x_raw, y_raw = _read(args)
    family = "logistic" if args.family == "logistic" else "gaussian"
    design, response = standardize(x_raw, y_raw, mode=mode, family=family)

    ratio = args.lambda_min_ratio or default_grid_ratio(design.n_rows,
                                                        design.n_cols)
    config = replace(config, grid_ratio=ratio)

    if args.family == "group":
        if not args.group_size:
            raise InvalidSpec("--group-size is required with --family group")
        groups = GroupSpec.equal(design.n_cols, args.group_size)
        lm = lambda_max_group(design, response, groups)
        grid = make_grid(lm, args.nlambda, ratio, args.grid_spacing)
        sol = solve_group_path(design, response, groups, grid, config)
    elif args.family == "logistic":
        if args.alpha != 1.0:
            raise InvalidSpec("logistic fits are L1-only; drop --alpha")
        lm = lambda_max(design, response)
        grid = make_grid(lm, args.nlambda, ratio, args.grid_spacing)
        sol = solve_path_logistic(design, response, grid, config)
    else:
        lm = lambda_max(design, response) / args.alpha
        grid = make_grid(lm, args.nlambda, ratio, args.grid_spacing)
        sol = solve_path(design, response, grid, config)

    with_icpt = args.family in ("gaussian", "logistic", "group")
    with _out_stream(args.output) as fh:
        fh.write("lambda,predictor,value\n")
        for lam, coef in zip(grid.values, sol.coefs):
            if args.standardized_coefs:
                entries, icpt = dict(coef.entries), coef.intercept
            else:
                entries, icpt = _coef_on_original_scale(
                    coef, design, response, family)
            _write_coef_rows(fh, lam, entries, icpt, with_icpt)

    telemetry_path = args.telemetry
    if telemetry_path is None and args.output:
        telemetry_path = args.output + ".telemetry.csv"
    if telemetry_path:
        with open(telemetry_path, "w") as fh:
            fh.write("lambda,objective,strong_size,ever_active_size,"
                     "kkt_violations_strong,kkt_violations_full,sweeps,"
                     "converged\n")
            for k, lam in enumerate(grid.values):
                fh.write(
                    f"{lam:.10g},{sol.objective[k]:.10g},"
                    f"{sol.strong_sizes[k]},{sol.ever_active_sizes[k]},"
                    f"{sol.kkt_violations_strong[k]},"
                    f"{sol.kkt_violations_full[k]},{sol.sweeps_used[k]},"
                    f"{int(sol.converged[k])}\n")
    return 0 if sol.all_converged else 2


def cmd_screen(args) -> int:
    if args.rule not in SCREEN_RULES:
        raise InvalidSpec(
            f"unknown rule {args.rule!r}; valid rules: "
            + ", ".join(SCREEN_RULES))
    x_raw, y_raw = _read(args)
    family = "logistic" if args.rule == "strong-logistic" else "gaussian"
    design, response = standardize(
        x_raw, y_raw, mode=_STANDARDIZE_MODES[args.standardize],
        family=family)
    lam, alpha = args.lam, args.alpha

    if args.rule == "strong-logistic":
        ybar = float(response.values.mean())
        c = np.abs(design.inner_products(response.values - ybar))
        lam_ref = float(c.max())
        mask = strong_logistic(c, lam, max(lam_ref, lam))
    else:
        c = np.abs(design.inner_products(response.values))
        lam_data = float(c.max())
        y_norm = response.norm()
        if args.rule == "safe":
            mask = safe_basic(c, lam, max(lam_data, lam), design.col_norms,
                              y_norm)
        elif args.rule == "safe-en":
            mask = safe_en(c, alpha * lam, (1 - alpha) * lam,
                           design.col_norms, y_norm,
                           max(lam_data, alpha * lam))
        elif args.rule == "strong":
            mask = strong_basic(c, lam, max(lam_data, lam))
        elif args.rule == "strong-en":
            mask = strong_en(c, lam, max(lam_data / alpha, lam), alpha)
        else:  # strong-sequential against the null solution at lambda0
            lam0 = args.lam0 if args.lam0 is not None else max(lam_data, lam)
            mask = strong_sequential(c, lam, lam0)

    with _out_stream(args.output) as fh:
        fh.write(f"rule: {args.rule}\n")
        fh.write(f"lambda: {lam:.10g}\n")
        fh.write(f"threshold: {mask.threshold:.10g}\n")
        kept = mask.kept_indices()
        fh.write(f"kept ({kept.size} of {design.n_cols}): "
                 + " ".join(str(int(j)) for j in kept) + "\n")
    return 0


def _spec_with_overrides(args, **defaults) -> SimSpec:
    fields = dict(defaults)
    for name in ("n", "p", "rho", "nonzero_frac", "coef_scheme", "snr",
                 "design", "density", "scale_spread", "family"):
        val = getattr(args, name, None)
        if val is not None:
            fields[name] = val
    fields["seed"] = _resolve_seed(args)
    return SimSpec(**fields)


def _experiment_config(args, **overrides) -> SolverConfig:
    cfg = dict(grid_size=args.nlambda, grid_spacing=args.grid_spacing,
               alpha=args.alpha)
    if args.lambda_min_ratio is not None:
        cfg["grid_ratio"] = args.lambda_min_ratio
    cfg.update(overrides)
    return SolverConfig(**cfg)


def cmd_experiment(args) -> int:
    fig = args.paper_figure
    result = ExperimentResult()

    if fig in (1, 3):
        gauss_rules = [RuleId.SAFE_BASIC, RuleId.STRONG_BASIC,
                       RuleId.STRONG_SEQUENTIAL]
        if fig == 1:
            panels = [("dense_rho0", dict(rho=0.0)),
                      ("dense_rho05", dict(rho=0.5)),
                      ("dense_rho025", dict(rho=0.25)),
                      ("sparse_rho0", dict(rho=0.0, design="sparse_binary",
                                           density=0.01))]
            mode = "center_and_scale"
            spreads = [1.0]
        else:
            panels = [("equal_scale", dict(scale_spread=1.0)),
                      ("spread_50", dict(scale_spread=50.0))]
            mode = "center_only"
            spreads = None
        for name, extra in panels:
            spec = _spec_with_overrides(args, n=100, p=1000, **extra)
            cfg = _experiment_config(args)
            cfg = replace(cfg, grid_ratio=args.lambda_min_ratio
                          or default_grid_ratio(spec.n, spec.p))
            result.extend(survivor_curves(spec, gauss_rules, cfg, mode=mode,
                                          scenario=name).rows)
    elif fig == 4:
        spec = _spec_with_overrides(args, n=100, p=100, coef_scheme="pm2",
                                    rho=0.5)
        p_list = [spec.p] if args.p is not None else [20, 50, 100, 500, 1000]
        cfg = _experiment_config(args, grid_size=80, grid_spacing="linear",
                                 grid_ratio=0.001)
        rhos = [spec.rho] if args.rho is not None else [0.0, 0.5]
        for rho in rhos:
            rows = violation_study(replace(spec, rho=rho), p_list, args.reps,
                                   cfg, threads=args.threads).rows
            for row in rows:
                row.scenario = f"rho{rho:g}_{row.scenario}"
            result.extend(rows)
    elif fig == 5:
        spec = _spec_with_overrides(args, n=200, p=2000, family="binomial",
                                    design="sparse_binary", density=0.01)
        cfg = _experiment_config(args)
        cfg = replace(cfg, grid_ratio=args.lambda_min_ratio or 0.01)
        result.extend(survivor_curves(
            spec, [RuleId.STRONG_LOGISTIC_GLOBAL,
                   RuleId.STRONG_LOGISTIC_SEQUENTIAL],
            cfg, scenario="logistic_sparse").rows)
    elif fig == 6:
        spec = _spec_with_overrides(args, n=200, p=20000, rho=0.7,
                                    coef_scheme="positive_decreasing",
                                    nonzero_frac=50.0 / (args.p or 20000))
        cfg = _experiment_config(args)
        cfg = replace(cfg, grid_ratio=args.lambda_min_ratio
                      or default_grid_ratio(spec.n, spec.p))
        result.extend(strong_vs_ever_active(spec, cfg).rows)
    elif fig == 7:
        spec = _spec_with_overrides(args, n=100, p=30, rho=0.0)
        cfg = _experiment_config(args)
        result.extend(glasso_survivors(spec, cfg).rows)
    else:
        # no preset: survivor curves for the requested rules on one scenario
        rules = [RuleId(r) for r in (args.rules or "StrongSequential").split(",")]
        spec = _spec_with_overrides(args, n=100, p=500)
        cfg = _experiment_config(args)
        result.extend(survivor_curves(spec, rules, cfg).rows)

    with _out_stream(args.output) as fh:
        result.write_csv(fh)
    return 0


_BENCH_PRESETS = {
    # desk-scale stand-ins for the published timing scenarios
    "table1": dict(n=200, p=20000, coef_scheme="alternating_equal",
                   nonzero_frac=30.0 / 20000, snr=3.0),
    "table1-sparse": dict(n=500, p=10000, design="sparse_binary",
                          density=0.001, nonzero_frac=0.25, snr=4.3),
    "table2": dict(n=200, p=20000, coef_scheme="alternating_equal",
                   nonzero_frac=30.0 / 20000, snr=3.0),
    "table3": dict(n=200, p=5000, family="binomial", design="sparse_binary",
                   density=0.01, coef_scheme="alternating_equal",
                   nonzero_frac=0.3),
}


def cmd_bench(args) -> int:
    defaults = dict(_BENCH_PRESETS.get(args.preset, dict(n=200, p=2000)))
    spec = _spec_with_overrides(args, **defaults)
    strategies = args.strategies.split(",")
    result = ExperimentResult()

    alphas = [1.0, 0.5, 0.2, 0.1, 0.01] if args.preset == "table2" \
        else [args.alpha]
    for alpha in alphas:
        cfg = _experiment_config(args)
        cfg = replace(cfg, alpha=alpha,
                      grid_ratio=args.lambda_min_ratio
                      or default_grid_ratio(spec.n, spec.p))
        rows = timing_bench(spec, strategies, cfg,
                            scenario=f"{args.preset or 'custom'}_alpha{alpha:g}"
                            ).rows
        result.extend(rows)

    if args.compare_kernels:
        cfg = _experiment_config(args)
        result.extend(kernel_bench(spec, cfg).rows)

    with _out_stream(args.output) as fh:
        result.write_csv(fh)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "fit":
            return cmd_fit(args)
        if args.cmd == "screen":
            return cmd_screen(args)
        if args.cmd == "experiment":
            return cmd_experiment(args)
        return cmd_bench(args)
    except ParseFailure as exc:
        print(f"strongscreen: {exc}", file=sys.stderr)
        return 1
    except (NotConverged, MismatchedSolutions) as exc:
        print(f"strongscreen: {exc}", file=sys.stderr)
        return 2
    except (InvalidSpec, NonPSDInput, DegenerateResponse, StrongScreenError,
            ValueError, OSError) as exc:
        print(f"strongscreen: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
