# Compiled coordinate-descent kernels.  Signature-compatible with the
# pure-NumPy twins in py_cd.py; see that module for the residual-state
# conventions (r_store + shift, sum_r / swr accumulators).

from libc.math cimport fabs
from libc.stdint cimport int64_t


cdef inline double _soft(double u, double lam) noexcept nogil:
    if u > lam:
        return u - lam
    if u < -lam:
        return u + lam
    return 0.0


def cd_dense(double[::1, :] x, double[::1] xtx, double[::1] beta,
             double[::1] r, int64_t[::1] active, double lam1, double lam2,
             double tol, long max_sweeps):
    cdef long sweeps = 0
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, i
    cdef int64_t j
    cdef double maxd, u, new, d, denom, c
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for k in range(active.shape[0]):
            j = active[k]
            denom = xtx[j] + lam2
            if denom <= 0.0:
                continue
            c = 0.0
            for i in range(n):
                c += x[i, j] * r[i]
            u = c + xtx[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                for i in range(n):
                    r[i] -= d * x[i, j]
                beta[j] = new
                if fabs(d) > maxd:
                    maxd = fabs(d)
        if maxd < tol:
            return sweeps, True
    return sweeps, False


def cd_dense_weighted(double[::1, :] x, double[::1] w, double[::1] xtw,
                      double wsum, double[::1] beta, double[::1] r,
                      int64_t[::1] active, double lam1, double lam2,
                      double tol, long max_sweeps, double b0,
                      bint update_intercept):
    cdef long sweeps = 0
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, i
    cdef int64_t j
    cdef double maxd, u, new, d, denom, c, db0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for k in range(active.shape[0]):
            j = active[k]
            denom = xtw[j] + lam2
            if denom <= 0.0:
                continue
            c = 0.0
            for i in range(n):
                c += w[i] * x[i, j] * r[i]
            u = c + xtw[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                for i in range(n):
                    r[i] -= d * x[i, j]
                beta[j] = new
                if fabs(d) > maxd:
                    maxd = fabs(d)
        if update_intercept:
            c = 0.0
            for i in range(n):
                c += w[i] * r[i]
            db0 = c / wsum
            if db0 != 0.0:
                b0 += db0
                for i in range(n):
                    r[i] -= db0
                if fabs(db0) > maxd:
                    maxd = fabs(db0)
        if maxd < tol:
            return sweeps, True, b0
    return sweeps, False, b0


def cd_sparse(double[::1] data, int64_t[::1] indices, int64_t[::1] indptr,
              double[::1] offsets, double[::1] colsum, double[::1] xtx,
              long n, double[::1] beta, double[::1] r_store,
              int64_t[::1] active, double lam1, double lam2, double tol,
              long max_sweeps, double sum_r, double shift):
    cdef long sweeps = 0
    cdef Py_ssize_t k, t
    cdef int64_t j, lo, hi
    cdef double maxd, u, new, d, denom, c
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for k in range(active.shape[0]):
            j = active[k]
            denom = xtx[j] + lam2
            if denom <= 0.0:
                continue
            lo = indptr[j]
            hi = indptr[j + 1]
            c = 0.0
            for t in range(lo, hi):
                c += data[t] * r_store[indices[t]]
            c += shift * colsum[j] - offsets[j] * (sum_r + n * shift)
            u = c + xtx[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                for t in range(lo, hi):
                    r_store[indices[t]] -= d * data[t]
                sum_r -= d * colsum[j]
                shift += d * offsets[j]
                beta[j] = new
                if fabs(d) > maxd:
                    maxd = fabs(d)
        if maxd < tol:
            return sweeps, True, sum_r, shift
    return sweeps, False, sum_r, shift


def cd_sparse_weighted(double[::1] data, int64_t[::1] indices,
                       int64_t[::1] indptr, double[::1] offsets,
                       double[::1] w, double[::1] wcolsum, double wsum,
                       double[::1] xtw, long n, double[::1] beta,
                       double[::1] r_store, int64_t[::1] active,
                       double lam1, double lam2, double tol, long max_sweeps,
                       double swr, double shift, double b0,
                       bint update_intercept):
    cdef long sweeps = 0
    cdef Py_ssize_t k, t
    cdef int64_t j, lo, hi, row
    cdef double maxd, u, new, d, denom, c, db0
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for k in range(active.shape[0]):
            j = active[k]
            denom = xtw[j] + lam2
            if denom <= 0.0:
                continue
            lo = indptr[j]
            hi = indptr[j + 1]
            c = 0.0
            for t in range(lo, hi):
                row = indices[t]
                c += w[row] * data[t] * r_store[row]
            c += shift * wcolsum[j] - offsets[j] * (swr + shift * wsum)
            u = c + xtw[j] * beta[j]
            new = _soft(u, lam1) / denom
            d = new - beta[j]
            if d != 0.0:
                for t in range(lo, hi):
                    r_store[indices[t]] -= d * data[t]
                swr -= d * wcolsum[j]
                shift += d * offsets[j]
                beta[j] = new
                if fabs(d) > maxd:
                    maxd = fabs(d)
        if update_intercept:
            db0 = (swr + shift * wsum) / wsum
            if db0 != 0.0:
                b0 += db0
                shift -= db0
                if fabs(db0) > maxd:
                    maxd = fabs(db0)
        if maxd < tol:
            return sweeps, True, swr, shift, b0
    return sweeps, False, swr, shift, b0


def cd_gram(double[:, ::1] g, double[::1] b, double[::1] q, double[::1] beta,
            int64_t[::1] active, double lam1, double tol, long max_sweeps):
    cdef long sweeps = 0
    cdef Py_ssize_t m = g.shape[0]
    cdef Py_ssize_t k, i
    cdef int64_t j
    cdef double maxd, u, new, d, gjj
    while sweeps < max_sweeps:
        sweeps += 1
        maxd = 0.0
        for k in range(active.shape[0]):
            j = active[k]
            gjj = g[j, j]
            if gjj <= 0.0:
                continue
            u = b[j] - q[j] + gjj * beta[j]
            new = _soft(u, lam1) / gjj
            d = new - beta[j]
            if d != 0.0:
                for i in range(m):
                    q[i] += d * g[j, i]
                beta[j] = new
                if fabs(d) > maxd:
                    maxd = fabs(d)
        if maxd < tol:
            return sweeps, True
    return sweeps, False
