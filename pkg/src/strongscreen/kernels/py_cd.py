"""Pure-NumPy coordinate-descent kernels.

Fallback twins of the compiled kernels in ``_cd.pyx``: same signatures,
same cyclic update order, same convergence measure (largest absolute
coefficient change in a sweep).  Per-coordinate work is vectorized, only
the sweep loops run in Python, so these stay usable when the extension
is not built, just slower on wide problems.

Sparse designs arrive as raw CSC arrays plus a per-column ``offsets``
vector: the true column is ``stored - offset``.  To keep updates sparse
the residual is represented as ``r_store + shift`` with a scalar shift
that absorbs offset and intercept adjustments.
"""

import numpy as np


def _soft(u, lam):
    if u > lam:
        return u - lam
    if u < -lam:
        return u + lam
    return 0.0


def cd_dense(x, xtx, beta, r, active, lam1, lam2, tol, max_sweeps):
    """Cyclic soft-threshold updates over ``active`` columns of a dense
    design; ``beta`` and the residual ``r`` are updated in place.

    Returns (sweeps_used, converged).
    """
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for j in active:
            col = x[:, j]
            denom = xtx[j] + lam2
            if denom <= 0.0:
                continue
            u = col @ r + xtx[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                r -= d * col
                beta[j] = new
                if abs(d) > maxd:
                    maxd = abs(d)
        if maxd < tol:
            return sweeps, True
    return sweeps, False


def cd_dense_weighted(x, w, xtw, wsum, beta, r, active, lam1, lam2, tol,
                      max_sweeps, b0, update_intercept):
    """Weighted variant used inside the logistic quadratic approximation;
    the unpenalized intercept is refreshed once per sweep.

    Returns (sweeps_used, converged, b0).
    """
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for j in active:
            col = x[:, j]
            denom = xtw[j] + lam2
            if denom <= 0.0:
                continue
            u = (w * col) @ r + xtw[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                r -= d * col
                beta[j] = new
                if abs(d) > maxd:
                    maxd = abs(d)
        if update_intercept:
            db0 = (w @ r) / wsum
            if db0 != 0.0:
                b0 += db0
                r -= db0
                if abs(db0) > maxd:
                    maxd = abs(db0)
        if maxd < tol:
            return sweeps, True, b0
    return sweeps, False, b0


def cd_sparse(data, indices, indptr, offsets, colsum, xtx, n, beta, r_store,
              active, lam1, lam2, tol, max_sweeps, sum_r, shift):
    """Sparse-design twin of :func:`cd_dense`.

    True residual is ``r_store + shift``; ``sum_r`` tracks sum(r_store).
    Returns (sweeps_used, converged, sum_r, shift).
    """
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for j in active:
            lo, hi = indptr[j], indptr[j + 1]
            denom = xtx[j] + lam2
            if denom <= 0.0:
                continue
            vals = data[lo:hi]
            rows = indices[lo:hi]
            c = vals @ r_store[rows] + shift * colsum[j] \
                - offsets[j] * (sum_r + n * shift)
            u = c + xtx[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                r_store[rows] -= d * vals
                sum_r -= d * colsum[j]
                shift += d * offsets[j]
                beta[j] = new
                if abs(d) > maxd:
                    maxd = abs(d)
        if maxd < tol:
            return sweeps, True, sum_r, shift
    return sweeps, False, sum_r, shift


def cd_sparse_weighted(data, indices, indptr, offsets, w, wcolsum, wsum, xtw,
                       n, beta, r_store, active, lam1, lam2, tol, max_sweeps,
                       swr, shift, b0, update_intercept):
    """Weighted sparse kernel; ``swr`` tracks sum(w * r_store).

    Returns (sweeps_used, converged, swr, shift, b0).
    """
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for j in active:
            lo, hi = indptr[j], indptr[j + 1]
            denom = xtw[j] + lam2
            if denom <= 0.0:
                continue
            vals = data[lo:hi]
            rows = indices[lo:hi]
            c = (w[rows] * vals) @ r_store[rows] + shift * wcolsum[j] \
                - offsets[j] * (swr + shift * wsum)
            u = c + xtw[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                r_store[rows] -= d * vals
                swr -= d * wcolsum[j]
                shift += d * offsets[j]
                beta[j] = new
                if abs(d) > maxd:
                    maxd = abs(d)
        if update_intercept:
            db0 = (swr + shift * wsum) / wsum
            if db0 != 0.0:
                b0 += db0
                shift -= db0
                if abs(db0) > maxd:
                    maxd = abs(db0)
        if maxd < tol:
            return sweeps, True, swr, shift, b0
    return sweeps, False, swr, shift, b0


def cd_gram(g, b, q, beta, active, lam1, tol, max_sweeps):
    """L1 coordinate descent on 0.5 b'Gb - b.beta form (Gram form).

    Minimizes 0.5 beta' G beta - b . beta + lam1 ||beta||_1 with the
    gradient buffer ``q = G @ beta`` maintained in place.
    Returns (sweeps_used, converged).
    """
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for j in active:
            gjj = g[j, j]
            if gjj <= 0.0:
                continue
            u = b[j] - q[j] + gjj * beta[j]
            new = _soft(u, lam1) / gjj
            d = new - beta[j]
            if d != 0.0:
                q += d * g[:, j]
                beta[j] = new
                if abs(d) > maxd:
                    maxd = abs(d)
        if maxd < tol:
            return sweeps, True
    return sweeps, False
