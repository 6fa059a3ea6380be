import os
import subprocess
import sys

import numpy as np
import pytest

from entroplin import _backend, _pykernels


def _run(code, **env):
    full = dict(os.environ, **env)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=full, check=True)
    return out.stdout.strip()


def test_env_forces_python_backend():
    assert _run("import entroplin; print(entroplin.BACKEND)", ENTROPLIN_BACKEND="python") == "python"


def test_default_prefers_compiled():
    expected = "cython" if "cython" in _backend.BACKENDS else "python"
    assert _run("import entroplin; print(entroplin.BACKEND)", ENTROPLIN_BACKEND="") == expected


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        _backend.get_backend("fortran")


def test_worker_count(monkeypatch):
    monkeypatch.setenv("ENTROPLIN_THREADS", "3")
    assert _backend.worker_count() == 3
    monkeypatch.setenv("ENTROPLIN_THREADS", "0")
    assert _backend.worker_count() == (os.cpu_count() or 1)
    assert _backend.worker_count(5) == 5


def test_blocked_sum_is_order_fixed():
    vals = np.random.default_rng(0).standard_normal(5000) * 1e10
    f = lambda a, b: float(np.sum(vals[a:b]))
    ref = _backend.blocked_sum(f, vals.size, workers=1)
    assert all(_backend.blocked_sum(f, vals.size, workers=w) == ref for w in (2, 4, 7))


@pytest.mark.parametrize("name", sorted(_backend.BACKENDS))
def test_row_ranges_partition_the_sum(name):
    impl = _backend.get_backend(name)
    x = np.sort(np.random.default_rng(1).standard_normal(700))
    whole = impl.pair_sum(x, 0, 0.2, 0, x.size)
    parts = impl.pair_sum(x, 0, 0.2, 0, 300) + impl.pair_sum(x, 0, 0.2, 300, 700)
    assert parts == pytest.approx(whole, rel=1e-14)
    w = impl.pair_sum_window(x, 0, 0.2, 8.0, 0, x.size)
    assert w == pytest.approx(whole, rel=1e-14)


def test_python_window_edges_exact():
    # differences exactly at the window edge are included, just beyond excluded
    x = np.array([0.0, 1.0, 2.0, 2.0000001])
    # only the pair (2, 2.0000001) has a nonzero Epanechnikov weight
    assert _pykernels.pair_sum_window(x, 1, 1.0, 1.0, 0, 4) == pytest.approx(0.75 * (1 - (1e-7) ** 2), rel=1e-12)
