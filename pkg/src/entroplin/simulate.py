"""Seeded innovation sampling and truncated MA(inf) path generation.

Random streams come from NumPy's counter-based Philox generator. Replication
``r`` of an experiment with base seed ``s`` uses seed ``s XOR r``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ConfigurationError, DomainError
from .model import LinearProcessModel

_MASK64 = (1 << 64) - 1
DEFAULT_TRUNCATION = 4096
TRUNCATION_BUDGET = 1 << 22
_FFT_THRESHOLD = 1 << 22


def make_rng(seed):
    """Philox generator for a 64-bit unsigned seed (or pass a Generator through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def replication_seed(base, r):
    return (int(base) ^ int(r)) & _MASK64


def sample_innovations(family, count, seed):
    """``count`` i.i.d. draws from ``family``."""
    count = int(count)
    if count < 1:
        raise DomainError("count must be at least 1")
    return family.sample(make_rng(seed), count)


@dataclass(frozen=True)
class PathSpec:
    model: LinearProcessModel
    n: int
    truncation_m: int | None = None
    seed: int = 0
    tail_fraction: float = 1e-4
    method: str = "auto"

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError("path length n must be positive")
        if self.truncation_m is not None and int(self.truncation_m) < 0:
            raise DomainError("truncation_m must be nonnegative")
        if self.method not in ("auto", "direct", "fft"):
            raise DomainError(f"unknown convolution method {self.method!r}")


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray
    spec: PathSpec
    truncation_m: int


def tail_scale_fraction(model, m):
    """Scale of the neglected tail ``sum_{i>m}`` relative to the marginal scale.

    Gaussian: ``sqrt(sum_{i>m} a_i^2 / sum a_i^2)``;
    SaS: ``(sum_{i>m} |a_i|^alpha / sum |a_i|^alpha)^{1/alpha}``.
    """
    fam = model.innovations
    r = fam.sum_power
    support = model.coeffs.support
    if support is not None and m + 1 >= support:
        return 0.0
    total = model.power_sum()
    head = math.fsum(np.abs(model.coeffs.values(m + 1)) ** r)
    tail = max(total - head, 0.0)
    return (tail / total) ** (1.0 / r)


def required_truncation(model, tail_fraction=1e-4, budget=TRUNCATION_BUDGET):
    """Smallest M with tail scale fraction <= ``tail_fraction`` (None if over budget)."""
    try:
        return _required_truncation_cached(model, float(tail_fraction), int(budget))
    except TypeError:  # unhashable model
        return _required_truncation(model, tail_fraction, budget)


@functools.lru_cache(maxsize=256)
def _required_truncation_cached(model, tail_fraction, budget):
    return _required_truncation(model, tail_fraction, budget)


def _required_truncation(model, tail_fraction, budget):
    support = model.coeffs.support
    if support is not None:
        return support - 1
    lo, hi = 0, 1
    while tail_scale_fraction(model, hi) > tail_fraction:
        if hi >= budget:
            return None
        lo, hi = hi, min(hi * 2, budget)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_scale_fraction(model, mid) > tail_fraction:
            lo = mid
        else:
            hi = mid
    return hi


def resolve_truncation(model, truncation_m=None, tail_fraction=1e-4):
    """MA cutoff used for a path: explicit request (validated) or the default rule."""
    support = model.coeffs.support
    if truncation_m is None:
        if support is not None:
            return support - 1
        need = required_truncation(model, tail_fraction)
        if need is None:
            raise ConfigurationError(
                f"no truncation up to {TRUNCATION_BUDGET} meets tail fraction {tail_fraction:g} "
                f"(fraction at the budget: {tail_scale_fraction(model, TRUNCATION_BUDGET):.3g}); "
                "pass a larger tail_fraction"
            )
        return max(DEFAULT_TRUNCATION, need)
    m = int(truncation_m)
    frac = tail_scale_fraction(model, m)
    if frac > tail_fraction:
        need = required_truncation(model, tail_fraction)
        hint = f"at least {need}" if need is not None else f"more than {TRUNCATION_BUDGET}"
        raise ConfigurationError(
            f"truncation M={m} leaves tail scale fraction {frac:.3g} > {tail_fraction:g}; need M {hint}"
        )
    return m


def generate_path(spec, innovations=None):
    """Simulate ``X_t = sum_{i=0}^{M} a_i eps_{t-i}``, t = 1..n.

    Draws ``n + M`` innovations (indices from ``-M``) unless ``innovations`` is
    supplied, which must then have length ``n + M``.
    """
    model = spec.model
    n = int(spec.n)
    m = resolve_truncation(model, spec.truncation_m, spec.tail_fraction)
    a = model.coeffs.values(m + 1)
    if innovations is None:
        eps = sample_innovations(model.innovations, n + m, spec.seed)
    else:
        eps = np.asarray(innovations, dtype=float)
        if eps.shape != (n + m,):
            raise DomainError(f"innovations must have length n + M = {n + m}, got {eps.shape}")
    method = spec.method
    if method == "auto":
        method = "fft" if n * (m + 1) > _FFT_THRESHOLD else "direct"
    if m == 0:
        x = a[0] * eps
    elif method == "direct":
        x = np.convolve(eps, a, mode="valid")
    else:
        x = signal.fftconvolve(eps, a, mode="valid")
    if not np.all(np.isfinite(x)):
        raise ConfigurationError("simulated path contains non-finite values")
    return SamplePath(values=np.ascontiguousarray(x, dtype=float), spec=spec, truncation_m=m)


def simulate(model, n, seed=0, truncation_m=None, tail_fraction=1e-4, method="auto"):
    """Shorthand for ``generate_path(PathSpec(...)).values``."""
    spec = PathSpec(model, n, truncation_m, seed, tail_fraction, method)
    return generate_path(spec).values
