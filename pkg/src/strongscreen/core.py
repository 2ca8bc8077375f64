"""Design matrices, responses, penalty grids and coefficient containers.

Dense designs are stored column-major with centering applied in place.
Sparse designs stay in compressed-column form and are centered implicitly:
the stored values are untouched and a per-column offset is subtracted on
the fly, so 0.1%-dense matrices never densify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConstantColumn, DegenerateResponse, DimensionMismatch

_NORM_RTOL = 1e-12


def _as_float64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


@dataclass
class DesignMatrix:
    """Predictor matrix with cached column norms.

    Exactly one of ``dense`` (Fortran-ordered, centering baked in) and
    ``sparse`` (CSC with sorted row indices, centering implicit through
    ``offsets``) is set.  ``col_centers`` and ``col_scales`` record the
    transform applied at construction so coefficients can be mapped back
    to the original variable scale.
    """

    dense: np.ndarray | None
    sparse: sp.csc_matrix | None
    offsets: np.ndarray
    col_norms: np.ndarray
    centered: bool
    standardized: bool
    col_centers: np.ndarray
    col_scales: np.ndarray
    col_sums: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if (self.dense is None) == (self.sparse is None):
            raise ValueError("exactly one of dense/sparse storage must be set")
        if self.sparse is not None and self.col_sums is None:
            self.col_sums = np.asarray(self.sparse.sum(axis=0)).ravel()
        if self.dense is not None and self.col_sums is None:
            self.col_sums = self.dense.sum(axis=0)

    @property
    def n_rows(self) -> int:
        return (self.dense if self.dense is not None else self.sparse).shape[0]

    @property
    def n_cols(self) -> int:
        return (self.dense if self.dense is not None else self.sparse).shape[1]

    @property
    def is_sparse(self) -> bool:
        return self.sparse is not None

    def inner_products(self, v: np.ndarray) -> np.ndarray:
        """Return the length-p vector of column/vector dot products."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n_rows,):
            raise DimensionMismatch(
                f"vector of length {v.shape} against {self.n_rows} rows"
            )
        if self.dense is not None:
            return self.dense.T @ v
        out = self.sparse.T @ v
        s = v.sum()
        if s != 0.0:
            out = out - self.offsets * s
        return np.asarray(out).ravel()

    def matvec(self, beta: np.ndarray) -> np.ndarray:
        """X @ beta for a dense coefficient vector."""
        beta = np.asarray(beta, dtype=np.float64)
        if beta.shape != (self.n_cols,):
            raise DimensionMismatch("beta length does not match column count")
        if self.dense is not None:
            return self.dense @ beta
        out = self.sparse @ beta
        shift = float(self.offsets @ beta)
        if shift != 0.0:
            out = out - shift
        return np.asarray(out).ravel()

    def matvec_indexed(self, indices, values) -> np.ndarray:
        """X[:, indices] @ values, touching only the listed columns."""
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        out = np.zeros(self.n_rows)
        if indices.size == 0:
            return out
        if np.any(indices < 0) or np.any(indices >= self.n_cols):
            raise DimensionMismatch("coefficient index out of range")
        if self.dense is not None:
            return self.dense[:, indices] @ values
        out = np.asarray(self.sparse[:, indices] @ values).ravel()
        shift = float(self.offsets[indices] @ values)
        if shift != 0.0:
            out = out - shift
        return out

    def column_dense(self, j: int) -> np.ndarray:
        """Materialize column j with centering applied."""
        if self.dense is not None:
            return self.dense[:, j].copy()
        col = np.asarray(self.sparse[:, [j]].todense()).ravel()
        return col - self.offsets[j]

    def to_dense(self) -> np.ndarray:
        """Materialize the full centered matrix (small problems only)."""
        if self.dense is not None:
            return np.asarray(self.dense)
        return np.asarray(self.sparse.todense()) - self.offsets[None, :]

    def select_columns(self, indices) -> "DesignMatrix":
        indices = np.asarray(indices, dtype=np.int64)
        if self.dense is not None:
            return DesignMatrix(
                dense=np.asfortranarray(self.dense[:, indices]),
                sparse=None,
                offsets=self.offsets[indices].copy(),
                col_norms=self.col_norms[indices].copy(),
                centered=self.centered,
                standardized=self.standardized,
                col_centers=self.col_centers[indices].copy(),
                col_scales=self.col_scales[indices].copy(),
            )
        sub = self.sparse[:, indices].tocsc()
        sub.sort_indices()
        return DesignMatrix(
            dense=None,
            sparse=sub,
            offsets=self.offsets[indices].copy(),
            col_norms=self.col_norms[indices].copy(),
            centered=self.centered,
            standardized=self.standardized,
            col_centers=self.col_centers[indices].copy(),
            col_scales=self.col_scales[indices].copy(),
        )


@dataclass
class ResponseVector:
    """Outcome vector; centered for squared-error fits, {0,1} for logistic."""

    values: np.ndarray
    centered: bool = False
    binary: bool = False
    mean_offset: float = 0.0

    def __post_init__(self):
        self.values = _as_float64(self.values).ravel()
        if self.binary:
            ok = np.all((self.values == 0.0) | (self.values == 1.0))
            if not ok:
                raise ValueError("binary response must contain exactly 0/1 entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing positive penalty sequence anchored at lambda_max."""

    values: np.ndarray
    lambda_max: float

    def __post_init__(self):
        vals = _as_float64(self.values)
        object.__setattr__(self, "values", vals)
        if vals.size < 1:
            raise ValueError("penalty grid must hold at least one value")
        if np.any(vals <= 0):
            raise ValueError("penalty values must be positive")
        if vals.size > 1 and np.any(np.diff(vals) >= 0):
            raise ValueError("penalty values must be strictly decreasing")
        if vals[0] > self.lambda_max * (1 + 1e-12):
            raise ValueError("grid starts above its lambda_max anchor")

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values)


@dataclass
class Coefficients:
    """Sparse coefficient vector: index -> nonzero value, plus an intercept
    for logistic fits."""

    entries: dict[int, float] = field(default_factory=dict)
    intercept: float = 0.0

    def __post_init__(self):
        self.entries = {int(j): float(v) for j, v in self.entries.items() if v != 0.0}
        if any(j < 0 for j in self.entries):
            raise ValueError("negative predictor index")

    @classmethod
    def from_dense(cls, beta, intercept: float = 0.0) -> "Coefficients":
        beta = np.asarray(beta, dtype=np.float64)
        nz = np.nonzero(beta)[0]
        return cls({int(j): float(beta[j]) for j in nz}, intercept=float(intercept))

    def to_dense(self, p: int) -> np.ndarray:
        out = np.zeros(p)
        for j, v in self.entries.items():
            if j >= p:
                raise DimensionMismatch(f"index {j} out of range for p={p}")
            out[j] = v
        return out

    def support(self) -> np.ndarray:
        return np.array(sorted(self.entries), dtype=np.int64)

    @property
    def nnz(self) -> int:
        return len(self.entries)


def _sparse_column_stats(x: sp.csc_matrix):
    n = x.shape[0]
    colsum = np.asarray(x.sum(axis=0)).ravel()
    sq = np.asarray(x.multiply(x).sum(axis=0)).ravel()
    means = colsum / n
    # squared norm of the implicitly centered column
    centered_sq = np.maximum(sq - 2.0 * means * colsum + n * means**2, 0.0)
    return means, np.sqrt(centered_sq), np.sqrt(sq)


def standardize(x, y, mode: str = "center_and_scale", family: str = "gaussian",
                center_y: bool | None = None):
    """Prepare raw data for a penalized fit.

    Parameters
    ----------
    x : array or scipy sparse matrix, shape (N, p)
    y : array, shape (N,)
    mode : {"center_and_scale", "center_only", "none"}
        Column transform.  Scaling divides each centered column by its
        Euclidean norm, so standardized columns have unit norm.
    family : {"gaussian", "logistic"}
        Logistic responses are validated as exact 0/1 and never centered.
    center_y : bool, optional
        Override response centering in the gaussian case (default True).

    Returns
    -------
    (DesignMatrix, ResponseVector)
        The original inputs are left untouched; the transform parameters
        are retained on the returned design for back-transformation.

    Raises
    ------
    ConstantColumn
        If scaling is requested and some column has zero variance.
    """
    if mode not in ("center_and_scale", "center_only", "none"):
        raise ValueError(f"unknown mode {mode!r}")
    if family not in ("gaussian", "logistic"):
        raise ValueError(f"unknown family {family!r}")

    y = _as_float64(y).ravel().copy()
    n = y.shape[0]

    if sp.issparse(x):
        xc = x.tocsc().astype(np.float64)
        xc.sort_indices()
        if xc.shape[0] != n:
            raise DimensionMismatch("row count of x does not match length of y")
        p = xc.shape[1]
        means, centered_norms, raw_norms = _sparse_column_stats(xc)
        if mode == "none":
            design = DesignMatrix(
                dense=None, sparse=xc, offsets=np.zeros(p),
                col_norms=raw_norms, centered=False, standardized=False,
                col_centers=np.zeros(p), col_scales=np.ones(p),
            )
        elif mode == "center_only":
            design = DesignMatrix(
                dense=None, sparse=xc, offsets=means.copy(),
                col_norms=centered_norms, centered=True, standardized=False,
                col_centers=means.copy(), col_scales=np.ones(p),
            )
        else:
            bad = np.nonzero(centered_norms <= 1e-12 * np.maximum(1.0, raw_norms))[0]
            if bad.size:
                raise ConstantColumn(int(bad[0]))
            scaled = xc.copy()
            scale = centered_norms
            scaled.data /= np.repeat(scale, np.diff(xc.indptr))
            design = DesignMatrix(
                dense=None, sparse=scaled, offsets=means / scale,
                col_norms=np.ones(p), centered=True, standardized=True,
                col_centers=means.copy(), col_scales=scale.copy(),
            )
    else:
        xd = np.array(x, dtype=np.float64, order="F", copy=True)
        if xd.ndim != 2 or xd.shape[0] != n:
            raise DimensionMismatch("x must be 2-d with one row per response entry")
        p = xd.shape[1]
        means = xd.mean(axis=0)
        if mode == "none":
            design = DesignMatrix(
                dense=xd, sparse=None, offsets=np.zeros(p),
                col_norms=np.linalg.norm(xd, axis=0),
                centered=False, standardized=False,
                col_centers=np.zeros(p), col_scales=np.ones(p),
            )
        else:
            xd -= means
            norms = np.linalg.norm(xd, axis=0)
            if mode == "center_only":
                design = DesignMatrix(
                    dense=xd, sparse=None, offsets=np.zeros(p),
                    col_norms=norms, centered=True, standardized=False,
                    col_centers=means.copy(), col_scales=np.ones(p),
                )
            else:
                raw_norms = np.linalg.norm(np.asarray(x, dtype=np.float64), axis=0)
                bad = np.nonzero(norms <= 1e-12 * np.maximum(1.0, raw_norms))[0]
                if bad.size:
                    raise ConstantColumn(int(bad[0]))
                xd /= norms
                design = DesignMatrix(
                    dense=xd, sparse=None, offsets=np.zeros(p),
                    col_norms=np.ones(p), centered=True, standardized=True,
                    col_centers=means.copy(), col_scales=norms.copy(),
                )

    if family == "logistic":
        response = ResponseVector(y, centered=False, binary=True)
    else:
        do_center = (mode != "none") if center_y is None else center_y
        if do_center:
            ybar = float(y.mean())
            response = ResponseVector(y - ybar, centered=True, mean_offset=ybar)
        else:
            response = ResponseVector(y, centered=False)
    return design, response


def inner_products(x: DesignMatrix, v: np.ndarray) -> np.ndarray:
    """x_j . v for every column j; the sparse path skips structural zeros."""
    return x.inner_products(v)


def lambda_max(x: DesignMatrix, y: ResponseVector) -> float:
    """Smallest penalty at which every coefficient is zero.

    Gaussian responses use max_j |x_j . y|; binary responses use the
    null-model gradient max_j |x_j . (y - ybar)|.
    """
    if y.n != x.n_rows:
        raise DimensionMismatch("response length does not match design rows")
    if y.binary:
        ybar = float(y.values.mean())
        if ybar == 0.0 or ybar == 1.0:
            raise DegenerateResponse("binary response is constant")
        return float(np.max(np.abs(x.inner_products(y.values - ybar))))
    return float(np.max(np.abs(x.inner_products(y.values))))


def residual(x: DesignMatrix, y: ResponseVector, beta: Coefficients) -> np.ndarray:
    """y - X beta, touching only the nonzero coefficients."""
    if y.n != x.n_rows:
        raise DimensionMismatch("response length does not match design rows")
    if beta.nnz == 0:
        return y.values.copy()
    idx = beta.support()
    vals = np.array([beta.entries[int(j)] for j in idx])
    return y.values - x.matvec_indexed(idx, vals)
