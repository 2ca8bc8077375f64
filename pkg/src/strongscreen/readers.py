"""Input readers for the command line.

Dense CSV: one row per observation, the response in the FIRST column and
one predictor per remaining column; an optional single header row is
skipped when requested.  Sparse text: svmlight-style lines
``label idx:val idx:val ...`` with 1-based, strictly increasing feature
indices.  Parse failures report the file and 1-based line number.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class ParseFailure(ValueError):
    def __init__(self, path, line_no, detail):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {detail}")


def read_dense_csv(path: str, header: bool = False, with_response: bool = True):
    """Returns (x_raw, y_raw), or the full matrix when ``with_response``
    is False (covariance-style inputs where every column is a variable)."""
    rows = []
    width = None
    min_width = 2 if with_response else 1
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if header and line_no == 1:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
                if width < min_width:
                    raise ParseFailure(path, line_no,
                                       "need a response and one predictor")
            elif len(parts) != width:
                raise ParseFailure(
                    path, line_no,
                    f"expected {width} fields, found {len(parts)}")
            try:
                rows.append([float(v) for v in parts])
            except ValueError as exc:
                raise ParseFailure(path, line_no, str(exc)) from None
    if not rows:
        raise ParseFailure(path, 1, "no data rows")
    data = np.asarray(rows, dtype=np.float64)
    if not with_response:
        return data
    return data[:, 1:], data[:, 0]


def read_svmlight(path: str):
    """Returns (x_raw csc matrix, y_raw ndarray)."""
    labels = []
    coords = []  # (row, col, value)
    max_col = 0
    with open(path) as fh:
        row = -1
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            row += 1
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError:
                raise ParseFailure(path, line_no,
                                   f"bad label {parts[0]!r}") from None
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseFailure(path, line_no,
                                       f"bad feature token {tok!r}") from None
                if idx < 1:
                    raise ParseFailure(path, line_no,
                                       "feature indices are 1-based")
                coords.append((row, idx - 1, val))
                max_col = max(max_col, idx)
    if row < 0:
        raise ParseFailure(path, 1, "no data rows")
    n = row + 1
    if coords:
        rr, cc, vv = zip(*coords)
        x = sp.coo_matrix((vv, (rr, cc)), shape=(n, max_col)).tocsc()
    else:
        x = sp.csc_matrix((n, max(max_col, 1)))
    x.sort_indices()
    return x, np.asarray(labels, dtype=np.float64)
