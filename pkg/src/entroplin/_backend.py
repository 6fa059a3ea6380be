"""Kernel-sum backend selection and the row-block partition contract.

The compiled extension is used when importable; ``ENTROPLIN_BACKEND=python``
forces the NumPy fallback. Pairwise sums are split into fixed-size row blocks
whose partial sums are reduced with ``math.fsum`` in block order, so results
do not depend on how many workers evaluated the blocks.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_requested = os.environ.get("ENTROPLIN_BACKEND", "").strip().lower()
if _requested and _requested in BACKENDS:
    BACKEND = _requested
else:
    BACKEND = "cython" if _ckernels is not None else "python"

ROW_BLOCK = 256


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the selected backend)."""
    name = BACKEND if name is None else name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None


def worker_count(requested=None):
    """Worker cap: explicit argument, else ENTROPLIN_THREADS (0 = auto)."""
    if requested is None:
        try:
            requested = int(os.environ.get("ENTROPLIN_THREADS", "0"))
        except ValueError:
            requested = 0
    if requested <= 0:
        requested = os.cpu_count() or 1
    return max(1, requested)


def blocked_sum(func, nrows, workers=1):
    """Evaluate ``func(start, stop)`` over fixed row blocks and reduce in order."""
    if workers is None:
        workers = worker_count()
    blocks = [(lo, min(nrows, lo + ROW_BLOCK)) for lo in range(0, nrows, ROW_BLOCK)]
    if workers <= 1 or len(blocks) <= 1:
        parts = [func(lo, hi) for lo, hi in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: func(*b), blocks))
    return math.fsum(parts)
