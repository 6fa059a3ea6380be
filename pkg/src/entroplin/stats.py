"""Location test, normality diagnostics, sample ACF and the KPSS level test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special
from scipy import stats as sps

from .errors import DegenerateSampleError, DomainError

#: 5% critical value of the KPSS level-stationarity statistic
#: (Kwiatkowski, Phillips, Schmidt and Shin 1992, Table 1).
KPSS_CRITICAL_5PCT = 0.463

KDE_GRID_POINTS = 256


def _sample(xs, minimum, what="samples"):
    x = np.asarray(xs, dtype=float).ravel()
    if x.size < minimum:
        raise DomainError(f"{what} need at least {minimum} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} must be finite")
    return x


def _centered(x):
    if np.ptp(x) == 0.0:
        raise DegenerateSampleError("sample has zero variance")
    return x - np.mean(x)


class TTestResult(NamedTuple):
    statistic: float
    p_value: float
    ci_low: float
    ci_high: float
    mean: float
    sd: float


def mean_ci_ttest(samples, level=0.95, mu0=0.0):
    """One-sample t test of ``H0: mu = mu0`` with a two-sided CI at ``level``."""
    x = _sample(samples, 2)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    n = x.size
    c = _centered(x)
    mean = float(np.mean(x))
    sd = math.sqrt(math.fsum(c * c) / (n - 1))
    if sd == 0.0:
        raise DegenerateSampleError("sample has zero variance")
    se = sd / math.sqrt(n)
    dist = sps.t(n - 1)
    t = (mean - mu0) / se
    p = float(min(1.0, 2.0 * dist.sf(abs(t))))
    q = float(dist.ppf(0.5 + level / 2.0))
    return TTestResult(t, p, mean - q * se, mean + q * se, mean, sd)


def jarque_bera(samples):
    """``JB = n/6 (S^2 + (K - 3)^2 / 4)`` and its chi^2(2) tail ``exp(-JB/2)``."""
    x = _sample(samples, 8)
    c = _centered(x)
    m2 = np.mean(c ** 2)
    skew = np.mean(c ** 3) / m2 ** 1.5
    kurt = np.mean(c ** 4) / m2 ** 2
    jb = x.size / 6.0 * (skew ** 2 + (kurt - 3.0) ** 2 / 4.0)
    return float(jb), float(math.exp(-jb / 2.0))


@dataclass(frozen=True)
class NormalityReport:
    sample_mean: float
    sample_sd: float
    t_statistic: float
    p_value: float
    ci_low: float
    ci_high: float
    level: float
    jarque_bera_stat: float
    jarque_bera_p: float
    qq_pairs: np.ndarray  # (n, 2): theoretical normal quantile, sorted sample
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    kde_grid: np.ndarray
    kde_values: np.ndarray
    kde_bandwidth: float

    def to_dict(self):
        return {
            "sample_mean": self.sample_mean,
            "sample_sd": self.sample_sd,
            "t_statistic": self.t_statistic,
            "p_value": self.p_value,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "level": self.level,
            "jarque_bera_stat": self.jarque_bera_stat,
            "jarque_bera_p": self.jarque_bera_p,
            "kde_bandwidth": self.kde_bandwidth,
            "tables": {
                "qq": {"theoretical": self.qq_pairs[:, 0].tolist(), "sample": self.qq_pairs[:, 1].tolist()},
                "histogram": {
                    "edge_lo": self.hist_edges[:-1].tolist(),
                    "edge_hi": self.hist_edges[1:].tolist(),
                    "count": self.hist_counts.tolist(),
                },
                "kde": {"x": self.kde_grid.tolist(), "density": self.kde_values.tolist()},
            },
        }


def qq_pairs(samples):
    """Normal Q-Q pairs with plotting positions ``(i - 0.5)/n``."""
    x = np.sort(_sample(samples, 1))
    p = (np.arange(1, x.size + 1) - 0.5) / x.size
    return np.column_stack([special.ndtri(p), x])


def kde_curve(samples, grid_points=KDE_GRID_POINTS):
    """Gaussian KDE with bandwidth ``1.06 sd n^{-1/5}`` on a regular grid."""
    x = _sample(samples, 2)
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("sample has zero variance")
    bw = 1.06 * sd * x.size ** -0.2
    grid = np.linspace(x.min() - 3 * bw, x.max() + 3 * bw, grid_points)
    vals = np.zeros(grid_points)
    for lo in range(0, x.size, 4096):
        u = (grid[:, None] - x[None, lo : lo + 4096]) / bw
        vals += np.exp(-0.5 * u * u).sum(axis=1)
    vals /= x.size * bw * math.sqrt(2.0 * math.pi)
    return grid, vals, bw


def normality_report(samples, level=0.95, bins=30):
    x = _sample(samples, 8)
    tt = mean_ci_ttest(x, level)
    jb, jbp = jarque_bera(x)
    counts, edges = np.histogram(x, bins=bins)
    grid, vals, bw = kde_curve(x)
    return NormalityReport(
        sample_mean=tt.mean,
        sample_sd=tt.sd,
        t_statistic=tt.statistic,
        p_value=tt.p_value,
        ci_low=tt.ci_low,
        ci_high=tt.ci_high,
        level=level,
        jarque_bera_stat=jb,
        jarque_bera_p=jbp,
        qq_pairs=qq_pairs(x),
        hist_edges=edges,
        hist_counts=counts,
        kde_grid=grid,
        kde_values=vals,
        kde_bandwidth=bw,
    )


def acf(xs, max_lag):
    """Sample autocorrelations ``r_0..r_max_lag`` (biased: divide by n)."""
    x = _sample(xs, 2, "series")
    max_lag = int(max_lag)
    if not 0 <= max_lag < x.size:
        raise DomainError(f"max_lag must lie in [0, {x.size - 1}], got {max_lag}")
    c = _centered(x)
    c0 = float(np.dot(c, c))
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(c[:-k], c[k:])) / c0
    return out


class KpssResult(NamedTuple):
    statistic: float
    lags: int
    critical_value: float
    verdict: str


def kpss_auto_lags(n):
    return int(math.floor(4.0 * (n / 100.0) ** 0.25))


def kpss_level(xs, lags="auto"):
    """KPSS level-stationarity statistic with a Bartlett-window long-run variance.

    ``eta = sum_t S_t^2 / (n^2 s^2(L))`` with ``S_t`` the partial sums of the
    demeaned series. The verdict at 5% is ``"reject"`` when eta exceeds 0.463.
    """
    x = _sample(xs, 20, "series")
    n = x.size
    if lags == "auto":
        L = kpss_auto_lags(n)
    else:
        L = int(lags)
        if not 0 <= L < n:
            raise DomainError(f"lags must lie in [0, {n - 1}], got {lags}")
    e = _centered(x)
    s = np.cumsum(e)
    lrv = float(np.dot(e, e)) / n
    for k in range(1, L + 1):
        w = 1.0 - k / (L + 1.0)
        lrv += 2.0 * w * float(np.dot(e[:-k], e[k:])) / n
    eta = float(np.dot(s, s)) / (n * n * lrv)
    verdict = "reject" if eta > KPSS_CRITICAL_5PCT else "stationary"
    return KpssResult(eta, L, KPSS_CRITICAL_5PCT, verdict)
