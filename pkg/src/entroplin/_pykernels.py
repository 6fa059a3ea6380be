"""Pure NumPy versions of the pairwise kernel sums in ``_ckernels``.

Same signatures and row-range semantics; used when the compiled extension
is unavailable or ``ENTROPLIN_BACKEND=python`` is set.
"""

import math

import numpy as np

GAUSSIAN = 0
EPANECHNIKOV = 1

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# bounds the temporary (rows x cols) matrices
_CHUNK = 1 << 18


def _kernel(kind, u):
    if kind == GAUSSIAN:
        return _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def _row_chunks(start, stop, ncols):
    step = max(1, _CHUNK // max(ncols, 1))
    for lo in range(start, stop, step):
        yield lo, min(stop, lo + step)


def pair_sum(x, kind, h, start, stop):
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    parts = []
    for lo, hi in _row_chunks(start, stop, n):
        rows = np.arange(lo, hi)
        u = (x[lo:hi, None] - x[None, :]) / h
        vals = _kernel(kind, u)
        vals[np.arange(n)[None, :] <= rows[:, None]] = 0.0
        parts.append(vals.sum())
    return math.fsum(parts)


def _pair_indices(lengths, offsets):
    # flat (row, col) indices for ragged rows: row r has cols offsets[r] .. offsets[r]+lengths[r]-1
    total = int(lengths.sum())
    rows = np.repeat(np.arange(lengths.shape[0]), lengths)
    firsts = np.cumsum(lengths) - lengths
    cols = np.repeat(offsets, lengths) + (np.arange(total) - np.repeat(firsts, lengths))
    return rows, cols


def pair_sum_window(x, kind, h, width, start, stop):
    x = np.asarray(x, dtype=float)
    parts = []
    for lo, hi in _row_chunks(start, stop, 256):
        i = np.arange(lo, hi)
        # right edge by the same comparison the compiled loop uses
        ends = np.searchsorted(x, x[i] + width * h, side="right")
        ends = np.maximum(ends, i + 1)
        n = x.shape[0]
        while True:
            over = (ends > i + 1) & ((x[ends - 1] - x[i]) / h > width)
            under = (ends < n) & ((x[np.minimum(ends, n - 1)] - x[i]) / h <= width)
            if not (over.any() or under.any()):
                break
            ends[over] -= 1
            ends[under] += 1
        lengths = ends - i - 1
        if lengths.sum() == 0:
            continue
        r, cols = _pair_indices(lengths, i + 1)
        u = (x[cols] - x[i][r]) / h
        parts.append(_kernel(kind, u).sum())
    return math.fsum(parts)


def cross_sum(x, y, kind, h, start, stop):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    parts = []
    for lo, hi in _row_chunks(start, stop, y.shape[0]):
        u = (x[lo:hi, None] - y[None, :]) / h
        parts.append(_kernel(kind, u).sum())
    return math.fsum(parts)


def cross_sum_window(x, y, kind, h, width, start, stop):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    parts = []
    for lo, hi in _row_chunks(start, stop, 256):
        xi = x[lo:hi]
        # padded search; the mask below applies the exact window test
        pad = width * h * (1.0 + 1e-9) + 1e-300
        begins = np.searchsorted(y, xi - pad, side="left")
        ends = np.searchsorted(y, xi + pad, side="right")
        lengths = np.maximum(ends - begins, 0)
        if lengths.sum() == 0:
            continue
        r, cols = _pair_indices(lengths, begins)
        u = (y[cols] - xi[r]) / h
        vals = _kernel(kind, u)
        vals[np.abs(u) > width] = 0.0
        parts.append(vals.sum())
    return math.fsum(parts)
