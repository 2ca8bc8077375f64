"""Independent first-order reference solvers used only by the tests.

These deliberately share no code with the package solvers: plain
(accelerated) proximal-gradient iterations on densified data, run to
tight tolerances, so agreement in objective value is meaningful.
"""

import numpy as np


def soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def en_objective(x, y, beta, lam1, lam2):
    r = y - x @ beta
    return 0.5 * r @ r + 0.5 * lam2 * beta @ beta + lam1 * np.abs(beta).sum()


def prox_grad_lasso(x, y, lam1, lam2=0.0, max_iter=200_000, tol=1e-12):
    """FISTA on the elastic-net objective; returns (beta, objective)."""
    n, p = x.shape
    lip = np.linalg.norm(x, 2) ** 2 + lam2
    beta = np.zeros(p)
    zeta = beta.copy()
    t = 1.0
    obj_prev = en_objective(x, y, beta, lam1, lam2)
    for _ in range(max_iter):
        grad = x.T @ (x @ zeta - y) + lam2 * zeta
        beta_new = soft(zeta - grad / lip, lam1 / lip)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        zeta = beta_new + ((t - 1.0) / t_new) * (beta_new - beta)
        beta, t = beta_new, t_new
        obj = en_objective(x, y, beta, lam1, lam2)
        if abs(obj_prev - obj) < tol * max(1.0, abs(obj)):
            # restart momentum once near the floor, then finish
            obj_prev = obj
            zeta = beta.copy()
            t = 1.0
            grad = x.T @ (x @ beta - y) + lam2 * beta
            step = soft(beta - grad / lip, lam1 / lip)
            if np.max(np.abs(step - beta)) < 1e-14:
                break
        obj_prev = obj
    return beta, en_objective(x, y, beta, lam1, lam2)


def logistic_objective(x, y, beta, b0, lam):
    eta = b0 + x @ beta
    return float(np.logaddexp(0.0, eta).sum() - y @ eta
                 + lam * np.abs(beta).sum())


def prox_grad_logistic(x, y, lam, max_iter=400_000, tol=1e-14):
    """Proximal gradient on the penalized logistic loss; the intercept is
    unpenalized.  Returns (beta, b0, objective)."""
    n, p = x.shape
    xa = np.column_stack([np.ones(n), x])
    lip = 0.25 * np.linalg.norm(xa, 2) ** 2
    beta = np.zeros(p)
    b0 = 0.0
    obj_prev = logistic_objective(x, y, beta, b0, lam)
    for _ in range(max_iter):
        eta = b0 + x @ beta
        probs = 1.0 / (1.0 + np.exp(-eta))
        g_beta = x.T @ (probs - y)
        g_b0 = float(np.sum(probs - y))
        beta = soft(beta - g_beta / lip, lam / lip)
        b0 = b0 - g_b0 / lip
        obj = logistic_objective(x, y, beta, b0, lam)
        if abs(obj_prev - obj) < tol * max(1.0, abs(obj)):
            break
        obj_prev = obj
    return beta, b0, logistic_objective(x, y, beta, b0, lam)


def group_objective(x, y, beta, lam, slices):
    r = y - x @ beta
    pen = sum(np.linalg.norm(beta[sl]) for sl in slices)
    return float(0.5 * r @ r + lam * pen)


def group_prox(v, t, slices):
    out = v.copy()
    for sl in slices:
        nv = np.linalg.norm(v[sl])
        out[sl] = 0.0 if nv <= t else (1.0 - t / nv) * v[sl]
    return out


def prox_grad_group(x, y, lam, slices, max_iter=400_000, tol=1e-14):
    n, p = x.shape
    lip = np.linalg.norm(x, 2) ** 2
    beta = np.zeros(p)
    obj_prev = group_objective(x, y, beta, lam, slices)
    for _ in range(max_iter):
        grad = x.T @ (x @ beta - y)
        beta = group_prox(beta - grad / lip, lam / lip, slices)
        obj = group_objective(x, y, beta, lam, slices)
        if abs(obj_prev - obj) < tol * max(1.0, abs(obj)):
            break
        obj_prev = obj
    return beta, group_objective(x, y, beta, lam, slices)


def glasso_neg_objective(theta, s, lam):
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return np.inf
    pen = np.abs(theta).sum() - np.abs(np.diag(theta)).sum()
    return float(-(logdet - (s * theta).sum()) + lam * pen)


def prox_grad_glasso(s, lam, max_iter=200_000, tol=1e-12):
    """Backtracking proximal gradient on the penalized negative
    log-likelihood over positive-definite matrices; off-diagonal L1 only.
    Returns (theta, maximized objective)."""
    p = s.shape[0]
    theta = np.diag(1.0 / np.diag(s))
    step = 1.0 / np.linalg.norm(s, 2) ** 2
    off = ~np.eye(p, dtype=bool)

    def prox(m, t):
        out = m.copy()
        out[off] = soft(m[off], t)
        return 0.5 * (out + out.T)

    obj_prev = glasso_neg_objective(theta, s, lam)
    for _ in range(max_iter):
        sigma = np.linalg.inv(theta)
        grad = s - sigma  # gradient of the smooth part
        t = step
        for _ in range(60):
            cand = prox(theta - t * grad, t * lam)
            try:
                np.linalg.cholesky(cand)
            except np.linalg.LinAlgError:
                t *= 0.5
                continue
            obj = glasso_neg_objective(cand, s, lam)
            if obj <= obj_prev + 1e-14:
                break
            t *= 0.5
        theta = cand
        if abs(obj_prev - obj) < tol * max(1.0, abs(obj)):
            obj_prev = obj
            break
        obj_prev = obj
    return theta, -glasso_neg_objective(theta, s, lam) \
        + 0.0  # maximized penalized log-likelihood
