"""Monte-Carlo experiments: CLT checks for ``r_n = sqrt(n) (T_n - Q)``,
the Hajek-residual and bias-scaling probes, and the divergence study.

Replication ``k`` draws its path with seed ``base XOR k``. Replications may
run on several threads; results are stored by replication index, so output
never depends on the worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError, EntroplinError, InsufficientSignalError
from .estimate import (
    EstimatorConfig,
    bandwidth_for,
    get_kernel,
    l22_divergence,
    quadratic_estimate,
    quadratic_estimate_fast,
)
from .model import Gaussian, LinearProcessModel, true_quadratic_functional
from .simulate import PathSpec, generate_path, replication_seed
from .stats import mean_ci_ttest, normality_report

#: offset mixed into the seed of the second sample in two-sample studies
_SECOND_STREAM = 1 << 32


@dataclass(frozen=True)
class ExperimentSpec:
    """One Monte-Carlo design.

    ``bandwidth`` is a rule name (``"paper"``, ``"thm1"``, ``"thm2"``) or a
    fixed number. ``centering="none"`` records ``sqrt(n) T_n`` instead of
    ``r_n``. ``q_mode`` selects how the true ``Q`` is computed.
    """

    model: LinearProcessModel
    n: int = 1024
    m: int = 200
    bandwidth: object = "paper"
    gamma: float = 1.0
    kernel: object = "gaussian"
    seed: int = 0
    truncation_m: int | None = None
    tail_fraction: float = 1e-4
    estimator: str = "fast"
    centering: str = "true"
    q_mode: str = "exact"
    q_terms: int = 100_000

    def __post_init__(self):
        if int(self.n) < 2:
            raise DomainError("n must be at least 2")
        if int(self.m) < 2:
            raise DomainError("m must be at least 2")
        if self.estimator not in ("fast", "naive"):
            raise DomainError(f"estimator must be 'fast' or 'naive', got {self.estimator!r}")
        if self.centering not in ("true", "none"):
            raise DomainError(f"centering must be 'true' or 'none', got {self.centering!r}")

    def config(self, n=None):
        h = bandwidth_for(self.bandwidth, self.n if n is None else n, self.gamma)
        return EstimatorConfig(h, get_kernel(self.kernel))

    def path_spec(self, k, n=None):
        return PathSpec(
            self.model,
            self.n if n is None else n,
            self.truncation_m,
            replication_seed(self.seed, k),
            self.tail_fraction,
        )

    def q_true(self):
        return true_quadratic_functional(self.model, mode=self.q_mode, n_terms=self.q_terms)

    def describe(self):
        return {
            "model": self.model.describe(),
            "n": int(self.n),
            "m": int(self.m),
            "bandwidth": self.bandwidth,
            "gamma": self.gamma,
            "kernel": get_kernel(self.kernel).name,
            "seed": int(self.seed),
            "truncation_m": self.truncation_m,
            "tail_fraction": self.tail_fraction,
            "estimator": self.estimator,
            "centering": self.centering,
            "q_mode": self.q_mode,
        }


def _estimator(name):
    return quadratic_estimate_fast if name == "fast" else quadratic_estimate


def _run_replications(func, m, workers):
    """``[func(k) for k in range(m)]``, threaded, with the failing index surfaced."""

    def wrapped(k):
        try:
            return func(k)
        except EntroplinError as exc:
            raise type(exc)(f"replication {k}: {exc}") from exc

    workers = min(_backend.worker_count(workers), m)
    if workers <= 1:
        return [wrapped(k) for k in range(m)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(wrapped, range(m)))


@dataclass
class CltReport:
    spec: ExperimentSpec
    bandwidth: float
    truncation_m: int
    q_true: float
    t_values: np.ndarray
    r_values: np.ndarray
    normality: object
    mean_t_estimate: float
    runtime_s: float = 0.0
    workers: int = 1

    def to_dict(self):
        return {
            "spec": self.spec.describe(),
            "bandwidth": self.bandwidth,
            "truncation_m": self.truncation_m,
            "q_true": self.q_true,
            "mean_t_estimate": self.mean_t_estimate,
            "normality": self.normality.to_dict(),
            "tables": {"replications": {"t": self.t_values.tolist(), "r": self.r_values.tolist()}},
        }


def run_clt_experiment(spec, workers=None, level=0.95, bins=30):
    """Replicate ``T_n`` ``m`` times and summarise ``r_n = sqrt(n) (T_n - Q)``."""
    if int(spec.m) < 8:
        raise DomainError(f"the normality diagnostics need m >= 8 replications, got {spec.m}")
    t0 = time.perf_counter()
    cfg = spec.config()
    est = _estimator(spec.estimator)
    q = spec.q_true()
    n = int(spec.n)

    def one(k):
        path = generate_path(spec.path_spec(k))
        return est(path.values, cfg), path.truncation_m

    out = _run_replications(one, int(spec.m), workers)
    t_values = np.array([v for v, _ in out])
    centre = q if spec.centering == "true" else 0.0
    r_values = math.sqrt(n) * (t_values - centre)
    return CltReport(
        spec=spec,
        bandwidth=cfg.bandwidth,
        truncation_m=out[0][1],
        q_true=q,
        t_values=t_values,
        r_values=r_values,
        normality=normality_report(r_values, level, bins),
        mean_t_estimate=float(np.mean(t_values)),
        runtime_s=time.perf_counter() - t0,
        workers=_backend.worker_count(workers),
    )


@dataclass
class HajekTable:
    n: np.ndarray
    bandwidth: np.ndarray
    mse: np.ndarray
    ratio: np.ndarray  # mse[i] / mse[i-1]; nan for the first row

    def to_dict(self):
        return {
            "tables": {
                "hajek": {
                    "n": self.n.tolist(),
                    "bandwidth": self.bandwidth.tolist(),
                    "mse": self.mse.tolist(),
                    "ratio": self.ratio.tolist(),
                }
            }
        }


def hajek_residual_probe(spec, n_grid, workers=None):
    """MSE of ``T_n - mean(T_n) - (1/n) sum Y_i`` with ``Y_i = 2 (f(X_i) - Q)``.

    ``E T_n`` is replaced by the replication mean, so each MSE carries a
    Monte-Carlo error of order ``Var(T_n) / m``.
    """
    m = int(spec.m)
    if m < 2:
        raise DomainError("the residual MSE needs at least 2 replications")
    grid = [int(v) for v in n_grid]
    if not grid or min(grid) < 2:
        raise DomainError("n_grid must contain path lengths >= 2")
    est = _estimator(spec.estimator)
    q = spec.q_true()
    model = spec.model
    mses, hs = [], []
    for n in grid:
        cfg = spec.config(n)

        def one(k, n=n, cfg=cfg):
            x = generate_path(spec.path_spec(k, n)).values
            y = 2.0 * (model.density(x) - q)
            return est(x, cfg), float(np.mean(y))

        out = np.array(_run_replications(one, m, workers))
        t, ybar = out[:, 0], out[:, 1]
        resid = t - np.mean(t) - ybar
        mses.append(float(np.mean(resid * resid)))
        hs.append(cfg.bandwidth)
    mse = np.array(mses)
    ratio = np.full(mse.size, np.nan)
    ratio[1:] = mse[1:] / mse[:-1]
    return HajekTable(np.array(grid), np.array(hs), mse, ratio)


@dataclass
class BiasProbe:
    slope: float
    intercept: float
    h: np.ndarray
    mean_t: np.ndarray
    bias: np.ndarray
    std_error: np.ndarray
    valid: np.ndarray
    q_true: float

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "q_true": self.q_true,
            "tables": {
                "bias": {
                    "h": self.h.tolist(),
                    "mean_t": self.mean_t.tolist(),
                    "bias": self.bias.tolist(),
                    "std_error": self.std_error.tolist(),
                    "valid": [bool(v) for v in self.valid],
                }
            },
        }


def bias_scaling_probe(model, n, h_grid, m, seed=0, kernel="gaussian", truncation_m=None,
                       tail_fraction=1e-4, signal_ratio=5.0, workers=None):
    """Least-squares slope of ``log |mean T_n - Q|`` against ``log h``.

    Every replication evaluates all bandwidths on the same path. A grid point
    counts only if its Monte-Carlo standard error is at least
    ``signal_ratio`` times smaller than the estimated bias.
    """
    h = np.asarray(h_grid, dtype=float).ravel()
    if h.size < 3:
        raise InsufficientSignalError(f"need at least 3 bandwidths for a slope, got {h.size}")
    if np.any(h <= 0):
        raise DomainError("bandwidths must be positive")
    m = int(m)
    if m < 2:
        raise DomainError("m must be at least 2")
    kern = get_kernel(kernel)
    cfgs = [EstimatorConfig(float(v), kern) for v in h]
    q = true_quadratic_functional(model)

    def one(k):
        x = generate_path(PathSpec(model, n, truncation_m, replication_seed(seed, k), tail_fraction)).values
        return [quadratic_estimate_fast(x, c) for c in cfgs]

    t = np.array(_run_replications(one, m, workers))
    mean_t = t.mean(axis=0)
    se = t.std(axis=0, ddof=1) / math.sqrt(m)
    bias = mean_t - q
    valid = signal_ratio * se <= np.abs(bias)
    if np.count_nonzero(valid) < 3:
        raise InsufficientSignalError(
            f"only {np.count_nonzero(valid)} bandwidths have |bias| >= {signal_ratio:g} standard errors; "
            "widen the grid or raise m"
        )
    slope, intercept = np.polyfit(np.log(h[valid]), np.log(np.abs(bias[valid])), 1)
    return BiasProbe(float(slope), float(intercept), h, mean_t, bias, se, valid, q)


def true_divergence(f_model, g_model):
    """``int (f - g)^2`` for two marginals of the same family."""
    qf = true_quadratic_functional(f_model)
    qg = true_quadratic_functional(g_model)
    a, b = f_model.innovations, g_model.innovations
    if isinstance(a, Gaussian) and isinstance(b, Gaussian):
        s2 = f_model.marginal_scale() ** 2 + g_model.marginal_scale() ** 2
        cross = 1.0 / math.sqrt(2.0 * math.pi * s2)
    elif not isinstance(a, Gaussian) and not isinstance(b, Gaussian) and a.alpha == b.alpha:
        al = a.alpha
        c = f_model.marginal_scale() + g_model.marginal_scale()
        cross = math.gamma(1.0 / al) / (al * math.pi * c ** (1.0 / al))
    else:
        raise DomainError("closed-form divergence needs two Gaussian or two equal-alpha stable marginals")
    return qf + qg - 2.0 * cross


@dataclass
class DivergenceStudy:
    estimate: float
    bandwidth: float
    values: np.ndarray = field(default_factory=lambda: np.empty(0))
    ci_low: float | None = None
    ci_high: float | None = None
    p_value: float | None = None
    true_value: float | None = None

    def to_dict(self):
        out = {
            "estimate": self.estimate,
            "bandwidth": self.bandwidth,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "p_value": self.p_value,
            "true_value": self.true_value,
        }
        if self.values.size:
            out["tables"] = {"replications": {"d_hat": self.values.tolist()}}
        return out


def divergence_of_series(xs, ys, bandwidth, kernel="gaussian"):
    """Single-shot ``D_hat`` for two observed series of equal length."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size:
        raise DomainError(f"series must have equal length, got {xs.size} and {ys.size}")
    h = bandwidth_for(bandwidth, xs.size)
    d = l22_divergence(xs, ys, EstimatorConfig(h, get_kernel(kernel)))
    return DivergenceStudy(estimate=d, bandwidth=h)


def run_divergence_study(f_model, g_model, n=1024, m=200, bandwidth="paper", kernel="gaussian",
                         seed=0, truncation_m=None, tail_fraction=1e-4, level=0.95, workers=None):
    """Replicated ``D_hat`` for two independent processes, with a t-based CI.

    Replication ``k`` draws the first path with seed ``base XOR k`` and the
    second with ``(base XOR k) XOR 2^32``.
    """
    if int(m) < 2:
        raise DomainError("m must be at least 2")
    h = bandwidth_for(bandwidth, n)
    cfg = EstimatorConfig(h, get_kernel(kernel))

    def one(k):
        s = replication_seed(seed, k)
        x = generate_path(PathSpec(f_model, n, truncation_m, s, tail_fraction)).values
        y = generate_path(PathSpec(g_model, n, truncation_m, s ^ _SECOND_STREAM, tail_fraction)).values
        return l22_divergence(x, y, cfg, fast=True)

    vals = np.array(_run_replications(one, int(m), workers))
    try:
        truth = true_divergence(f_model, g_model)
    except DomainError:
        truth = None
    tt = mean_ci_ttest(vals, level, mu0=0.0 if truth is None else truth)
    return DivergenceStudy(
        estimate=tt.mean,
        bandwidth=h,
        values=vals,
        ci_low=tt.ci_low,
        ci_high=tt.ci_high,
        p_value=tt.p_value,
        true_value=truth,
    )
