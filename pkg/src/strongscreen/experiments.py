"""Simulation scenarios and experiment drivers.

Every experiment is a deterministic function of its spec, seed and solver
configuration (timing columns aside).  Survivor and violation counts are
always measured against the exact, KKT-verified path solved with the
all-predictors strategy, never against a screened fit.

CSV schema (one header row):
    scenario,seed,lambda,pve,rule,strategy,survivors,violations,seconds
with empty fields where a column does not apply.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import kernels
from .core import DesignMatrix, ResponseVector, lambda_max, standardize
from .errors import InvalidSpec, MismatchedSolutions
from .glasso import lambda_max_glasso, solve_glasso_path
from .lasso import (SolverConfig, Strategy, make_grid, solve_path)
from .logistic import _sigmoid, solve_path_logistic
from .screening import (RuleId, safe_basic, safe_en, seq_safe_experimental,
                        strong_basic, strong_en, strong_logistic,
                        strong_sequential)

CSV_HEADER = "scenario,seed,lambda,pve,rule,strategy,survivors,violations,seconds"

_ACTIVE_TOL = 1e-8  # coefficient magnitude that counts as active

COEF_SCHEMES = ("gaussian_values", "pm2", "alternating_equal",
                "positive_decreasing")


@dataclass(frozen=True)
class SimSpec:
    """One synthetic scenario.

    Dense designs draw equi-correlated Gaussian columns through a shared
    factor, x_j = sqrt(rho) z + sqrt(1 - rho) e_j; sparse designs are 0/1
    at the given density (rho is ignored there).  Noise is scaled so the
    realized Var(X beta) / Var(noise) matches ``snr``; binomial responses
    scale the linear predictor to variance ``snr`` instead.
    """

    n: int
    p: int
    rho: float = 0.0
    nonzero_frac: float = 0.25
    coef_scheme: str = "gaussian_values"
    snr: float = 3.0
    design: str = "dense"
    density: float = 0.001
    scale_spread: float = 1.0
    seed: int = 0
    family: str = "gaussian"

    def __post_init__(self):
        if self.n < 2 or self.p < 1:
            raise InvalidSpec("need n >= 2 and p >= 1")
        if not 0.0 <= self.rho < 1.0:
            raise InvalidSpec("rho must lie in [0, 1)")
        if not 0.0 < self.nonzero_frac <= 1.0:
            raise InvalidSpec("nonzero_frac must lie in (0, 1]")
        if self.coef_scheme not in COEF_SCHEMES:
            raise InvalidSpec(f"unknown coef_scheme {self.coef_scheme!r}")
        if self.design not in ("dense", "sparse_binary"):
            raise InvalidSpec(f"unknown design {self.design!r}")
        if not 0.0 < self.density <= 1.0:
            raise InvalidSpec("density must lie in (0, 1]")
        if self.scale_spread < 1.0:
            raise InvalidSpec("scale_spread must be >= 1")
        if self.snr <= 0:
            raise InvalidSpec("snr must be positive")
        if self.family not in ("gaussian", "binomial"):
            raise InvalidSpec(f"unknown family {self.family!r}")


@dataclass
class ResultRow:
    scenario: str
    seed: int | None = None
    lam: float | None = None
    pve: float | None = None
    rule: str | None = None
    strategy: str | None = None
    survivors: int | None = None
    violations: float | None = None
    seconds: float | None = None

    def to_csv(self) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return f"{v:.10g}"
            return str(v)
        return ",".join(fmt(v) for v in (
            self.scenario, self.seed, self.lam, self.pve, self.rule,
            self.strategy, self.survivors, self.violations, self.seconds))


@dataclass
class ExperimentResult:
    rows: list[ResultRow] = field(default_factory=list)

    def extend(self, rows):
        self.rows.extend(rows)

    def write_csv(self, fh):
        fh.write(CSV_HEADER + "\n")
        for row in self.rows:
            fh.write(row.to_csv() + "\n")

    def column(self, name):
        return [getattr(r, "lam" if name == "lambda" else name)
                for r in self.rows]


def _raw_design(spec: SimSpec, rng):
    if spec.design == "sparse_binary":
        mat = sp.random(spec.n, spec.p, density=spec.density, format="csc",
                        random_state=rng, data_rvs=lambda k: np.ones(k))
        if spec.scale_spread > 1.0:
            factors = rng.uniform(1.0, spec.scale_spread, spec.p)
            mat = mat @ sp.diags(factors)
            mat = mat.tocsc()
        return mat
    e = rng.standard_normal((spec.n, spec.p))
    if spec.rho > 0.0:
        z = rng.standard_normal((spec.n, 1))
        x = np.sqrt(spec.rho) * z + np.sqrt(1.0 - spec.rho) * e
    else:
        x = e
    if spec.scale_spread > 1.0:
        x *= rng.uniform(1.0, spec.scale_spread, spec.p)
    return x


def _true_beta(spec: SimSpec, rng):
    k = max(1, int(round(spec.nonzero_frac * spec.p)))
    beta = np.zeros(spec.p)
    if spec.coef_scheme == "positive_decreasing":
        idx = np.arange(k)
        vals = np.linspace(1.0, 1.0 / k, k)
    else:
        idx = np.sort(rng.choice(spec.p, size=k, replace=False))
        if spec.coef_scheme == "gaussian_values":
            vals = rng.standard_normal(k)
            vals[vals == 0.0] = 1.0
        elif spec.coef_scheme == "pm2":
            vals = rng.choice([-2.0, 2.0], size=k)
        else:  # alternating_equal
            vals = (-1.0) ** np.arange(k)
    beta[idx] = vals
    return beta


def simulate(spec: SimSpec, mode: str = "center_and_scale"):
    """Draw one instance; deterministic for a fixed spec (seed included).

    Returns (DesignMatrix, ResponseVector, true_beta); ``mode`` controls
    the standardization applied to the returned design.
    """
    rng = np.random.default_rng(spec.seed)
    x_raw = _raw_design(spec, rng)
    beta = _true_beta(spec, rng)
    signal = np.asarray(x_raw @ beta).ravel()
    sig_var = float(signal.var())
    if sig_var <= 0:
        sig_var = 1.0
    if spec.family == "binomial":
        eta = signal * np.sqrt(spec.snr / sig_var)
        probs = _sigmoid(eta)
        y = rng.binomial(1, probs).astype(np.float64)
        design, response = standardize(x_raw, y, mode=mode, family="logistic")
    else:
        noise_sd = np.sqrt(sig_var / spec.snr)
        y = signal + rng.normal(0.0, noise_sd, spec.n)
        design, response = standardize(x_raw, y, mode=mode, family="gaussian")
    return design, response, beta


# ---------------------------------------------------------------------------
# exact-path statistics shared by the survivor / violation drivers


@dataclass
class _ExactPath:
    lambdas: np.ndarray
    betas: np.ndarray          # (n_grid, p)
    c: np.ndarray              # (n_grid, p) inner products with residual
    pve: np.ndarray
    resid_norms: np.ndarray


def _exact_gaussian_path(x, y, grid, config) -> _ExactPath:
    sol = solve_path(x, y, grid, replace(config, strategy=Strategy.NAIVE))
    betas = sol.betas()
    n_grid = len(grid)
    c = np.zeros((n_grid, x.n_cols))
    pve = np.zeros(n_grid)
    rn = np.zeros(n_grid)
    ssy = float(y.values @ y.values)
    for k in range(n_grid):
        r = y.values - x.matvec(betas[k])
        c[k] = x.inner_products(r)
        rn[k] = float(np.linalg.norm(r))
        pve[k] = 1.0 - rn[k] ** 2 / ssy
    return _ExactPath(lambdas=grid.values.copy(), betas=betas, c=c, pve=pve,
                      resid_norms=rn)


def _exact_logistic_path(x, y, grid, config):
    sol = solve_path_logistic(x, y, grid,
                              replace(config, strategy=Strategy.NAIVE))
    betas = sol.betas()
    b0s = sol.intercepts()
    n_grid = len(grid)
    c = np.zeros((n_grid, x.n_cols))
    dev = np.zeros(n_grid)
    yv = y.values
    for k in range(n_grid):
        eta = b0s[k] + x.matvec(betas[k])
        probs = _sigmoid(eta)
        c[k] = x.inner_products(yv - probs)
        dev[k] = 2.0 * float(np.logaddexp(0.0, eta).sum() - yv @ eta)
    pve = 1.0 - dev / dev[0]
    return _ExactPath(lambdas=grid.values.copy(), betas=betas, c=c, pve=pve,
                      resid_norms=np.sqrt(dev))


def _grid_for(spec: SimSpec, x, y, config: SolverConfig):
    lm = lambda_max(x, y)
    anchor = lm / config.alpha
    return make_grid(anchor, config.grid_size, config.grid_ratio,
                     config.grid_spacing)


def _rule_masks(rule: RuleId, path: _ExactPath, x, y, config, k):
    """Screen statistics for grid point k computed from exact-path data."""
    lam = float(path.lambdas[k])
    lam_prev = float(path.lambdas[k - 1]) if k > 0 else float(path.lambdas[0])
    alpha = config.alpha
    if k == 0:
        c_prev_abs = np.abs(x.inner_products(y.values)) \
            if not y.binary else np.abs(
                x.inner_products(y.values - y.values.mean()))
        lam_prev = float(c_prev_abs.max()) / alpha
        lam_prev = max(lam_prev, lam)
    else:
        c_prev_abs = np.abs(path.c[k - 1])

    if rule is RuleId.SAFE_BASIC:
        y_norm = float(np.linalg.norm(y.values))
        base = np.abs(x.inner_products(y.values))
        return safe_basic(base, alpha * lam, float(base.max()),
                          x.col_norms, y_norm)
    if rule is RuleId.SAFE_EN:
        base = np.abs(x.inner_products(y.values))
        y_norm = float(np.linalg.norm(y.values))
        return safe_en(base, alpha * lam, (1 - alpha) * lam, x.col_norms,
                       y_norm, float(base.max()))
    if rule is RuleId.STRONG_BASIC:
        base = np.abs(x.inner_products(y.values))
        return strong_basic(base, lam, max(float(base.max()), lam))
    if rule is RuleId.STRONG_EN_GLOBAL:
        base = np.abs(x.inner_products(y.values))
        return strong_en(base, lam, max(float(base.max()) / alpha, lam),
                         alpha)
    if rule is RuleId.STRONG_SEQUENTIAL:
        return strong_sequential(c_prev_abs, lam, max(lam_prev, lam))
    if rule is RuleId.STRONG_EN_SEQUENTIAL:
        return strong_en(c_prev_abs, lam, max(lam_prev, lam), alpha,
                         sequential=True)
    if rule is RuleId.SEQ_SAFE_EXPERIMENTAL:
        lam0 = float(c_prev_abs.max())
        r_norm = path.resid_norms[k - 1] if k > 0 \
            else float(np.linalg.norm(y.values))
        lam0 = max(lam0, lam)
        return seq_safe_experimental(c_prev_abs, lam, lam0, x.col_norms,
                                     r_norm)
    if rule is RuleId.STRONG_LOGISTIC_GLOBAL:
        ybar = float(y.values.mean())
        base = np.abs(x.inner_products(y.values - ybar))
        return strong_logistic(base, lam, max(float(base.max()), lam))
    if rule is RuleId.STRONG_LOGISTIC_SEQUENTIAL:
        return strong_logistic(c_prev_abs, lam, max(lam_prev, lam),
                               sequential=True)
    raise ValueError(f"rule {rule} has no survivor-curve driver")


def survivor_curves(spec: SimSpec, rules, config: SolverConfig | None = None,
                    mode: str = "center_and_scale",
                    scenario: str | None = None) -> ExperimentResult:
    """Numbers of predictors surviving each rule along the exact path.

    Violations count predictors a rule discards even though their exact
    coefficient at that penalty is nonzero.
    """
    config = config or SolverConfig()
    x, y, _ = simulate(spec, mode=mode)
    grid = _grid_for(spec, x, y, config)
    if spec.family == "binomial":
        path = _exact_logistic_path(x, y, grid, config)
    else:
        path = _exact_gaussian_path(x, y, grid, config)
    active = np.abs(path.betas) > _ACTIVE_TOL
    name = scenario or f"n{spec.n}_p{spec.p}_rho{spec.rho:g}"

    out = ExperimentResult()
    for k in range(len(grid)):
        out.rows.append(ResultRow(
            scenario=name, seed=spec.seed, lam=float(path.lambdas[k]),
            pve=float(path.pve[k]), rule="Active",
            survivors=int(active[k].sum()), violations=0.0))
    for rule in rules:
        rule = RuleId(rule)
        for k in range(len(grid)):
            mask = _rule_masks(rule, path, x, y, config, k)
            viol = int(np.count_nonzero(~mask.keep & active[k]))
            out.rows.append(ResultRow(
                scenario=name, seed=spec.seed, lam=float(path.lambdas[k]),
                pve=float(path.pve[k]), rule=rule.value,
                survivors=mask.n_kept, violations=float(viol)))
    return out


def strong_vs_ever_active(spec: SimSpec, config: SolverConfig | None = None,
                          scenario: str | None = None) -> ExperimentResult:
    """Sizes of the sequential-strong set and the ever-active set along a
    combined-strategy path, per penalty."""
    config = config or SolverConfig()
    x, y, _ = simulate(spec)
    grid = _grid_for(spec, x, y, config)
    solver = solve_path_logistic if spec.family == "binomial" else solve_path
    sol = solver(x, y, grid, replace(config, strategy=Strategy.COMBINED))
    name = scenario or f"n{spec.n}_p{spec.p}_rho{spec.rho:g}"
    out = ExperimentResult()
    for k, lam in enumerate(grid.values):
        out.rows.append(ResultRow(
            scenario=name, seed=spec.seed, lam=float(lam),
            rule="StrongSequential", strategy="combined",
            survivors=int(sol.strong_sizes[k]),
            violations=float(sol.kkt_violations_strong[k])))
        out.rows.append(ResultRow(
            scenario=name, seed=spec.seed, lam=float(lam),
            rule="EverActive", strategy="combined",
            survivors=int(sol.ever_active_sizes[k]),
            violations=float(sol.kkt_violations_full[k])))
    return out


def _violation_counts_one(spec: SimSpec, config: SolverConfig):
    """Per-grid-point sequential-rule violation counts for one replicate."""
    x, y, _ = simulate(spec)
    grid = _grid_for(spec, x, y, config)
    path = _exact_gaussian_path(x, y, grid, config)
    active = np.abs(path.betas) > _ACTIVE_TOL
    n_grid = len(grid)
    counts = np.zeros(n_grid)
    surv = np.zeros(n_grid)
    for k in range(n_grid):
        mask = _rule_masks(RuleId.STRONG_SEQUENTIAL, path, x, y, config, k)
        counts[k] = np.count_nonzero(~mask.keep & active[k])
        surv[k] = mask.n_kept
    return counts, surv, path.pve, path.lambdas


def violation_study(spec: SimSpec, p_list, reps: int,
                    config: SolverConfig | None = None,
                    threads: int = 1) -> ExperimentResult:
    """Average sequential-rule violations per grid point, replicated over
    seeds, for each problem width in ``p_list``."""
    if reps < 1:
        raise InvalidSpec("need at least one replicate")
    config = config or SolverConfig()
    jobs = [(replace(spec, p=int(pp), seed=spec.seed + rep), config)
            for pp in p_list for rep in range(reps)]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_violation_worker, jobs))
    else:
        results = [_violation_worker(job) for job in jobs]

    out = ExperimentResult()
    idx = 0
    for pp in p_list:
        chunk = results[idx:idx + reps]
        idx += reps
        counts = np.mean([c for c, _, _, _ in chunk], axis=0)
        surv = np.mean([s for _, s, _, _ in chunk], axis=0)
        pve = np.mean([v for _, _, v, _ in chunk], axis=0)
        lams = np.mean([l for _, _, _, l in chunk], axis=0)
        for k in range(len(counts)):
            out.rows.append(ResultRow(
                scenario=f"violations_p{pp}", seed=spec.seed,
                lam=float(lams[k]), pve=float(pve[k]),
                rule=RuleId.STRONG_SEQUENTIAL.value,
                survivors=int(round(surv[k])),
                violations=float(counts[k])))
    return out


def _violation_worker(job):
    spec, config = job
    return _violation_counts_one(spec, config)


def timing_bench(spec: SimSpec, strategies, config: SolverConfig | None = None,
                 scenario: str | None = None) -> ExperimentResult:
    """Wall-clock per full path per strategy, with an identity gate: the
    benchmark refuses to report timings unless every strategy reproduced
    the same coefficient path to 1e-6."""
    config = config or SolverConfig()
    x, y, _ = simulate(spec)
    grid = _grid_for(spec, x, y, config)
    solver = solve_path_logistic if spec.family == "binomial" else solve_path
    name = scenario or f"n{spec.n}_p{spec.p}_rho{spec.rho:g}"

    out = ExperimentResult()
    ref = None
    for strat in strategies:
        strat = Strategy(strat)
        cfg = replace(config, strategy=strat)
        t0 = time.perf_counter()
        sol = solver(x, y, grid, cfg)
        dt = time.perf_counter() - t0
        betas = sol.betas()
        if ref is None:
            ref = betas
        else:
            dev = float(np.max(np.abs(betas - ref)))
            if dev > 1e-6:
                raise MismatchedSolutions(
                    f"strategy {strat.value} deviates from reference by {dev:.2e}")
        out.rows.append(ResultRow(scenario=name, seed=spec.seed,
                                  strategy=strat.value, seconds=dt))
    return out


def kernel_bench(spec: SimSpec, config: SolverConfig | None = None,
                 strategy: str = "combined") -> ExperimentResult:
    """Compare the compiled and pure-Python kernel backends on one path
    solve; outputs must agree to 1e-8 for the timings to be reported."""
    config = config or SolverConfig()
    x, y, _ = simulate(spec)
    grid = _grid_for(spec, x, y, config)
    solver = solve_path_logistic if spec.family == "binomial" else solve_path
    cfg = replace(config, strategy=Strategy(strategy))
    name = f"kernels_n{spec.n}_p{spec.p}"

    out = ExperimentResult()
    ref = None
    saved = kernels.backend_name()
    try:
        for backend in kernels.available_backends():
            kernels.set_backend(backend)
            t0 = time.perf_counter()
            sol = solver(x, y, grid, cfg)
            dt = time.perf_counter() - t0
            betas = sol.betas()
            if ref is None:
                ref = betas
            elif float(np.max(np.abs(betas - ref))) > 1e-8:
                raise MismatchedSolutions("kernel backends disagree")
            out.rows.append(ResultRow(
                scenario=name, seed=spec.seed,
                strategy=f"{strategy}@{backend}", seconds=dt))
    finally:
        kernels.set_backend(saved)
    return out


def glasso_survivors(spec: SimSpec, config: SolverConfig | None = None,
                     grid_size: int = 30, grid_ratio: float = 0.05,
                     scenario: str | None = None) -> ExperimentResult:
    """Rows kept by the sequential row rule along a graphical-lasso path,
    with screening violations counted by the repair loop."""
    config = config or SolverConfig()
    x, _, _ = simulate(spec, mode="center_only")
    xd = x.to_dense()
    s = (xd.T @ xd) / spec.n
    lm = lambda_max_glasso(s)
    grid = make_grid(lm, grid_size, grid_ratio, "log")
    path = solve_glasso_path(s, grid, config=config, rule="rowwise")
    name = scenario or f"glasso_n{spec.n}_p{spec.p}"
    out = ExperimentResult()
    for k, lam in enumerate(grid.values):
        kept = spec.p - len(path.discarded_rows[k])
        out.rows.append(ResultRow(
            scenario=name, seed=spec.seed, lam=float(lam),
            rule=RuleId.GLASSO_ROW.value, survivors=int(kept),
            violations=float(path.screen_violations[k])))
    return out
