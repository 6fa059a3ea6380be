import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special
from scipy import stats as sps

from entroplin.errors import DegenerateSampleError, DomainError
from entroplin.stats import (
    KPSS_CRITICAL_5PCT,
    acf,
    jarque_bera,
    kde_curve,
    kpss_auto_lags,
    kpss_level,
    mean_ci_ttest,
    normality_report,
    qq_pairs,
)

vals = st.floats(-1e3, 1e3, allow_nan=False)
spread_samples = st.lists(vals, min_size=8, max_size=80).filter(lambda v: np.std(v) > 1e-3)


def test_ttest_examples():
    r = mean_ci_ttest([-1.0, 1.0], 0.95)
    assert r.p_value == 1.0
    assert r.ci_low == pytest.approx(-r.ci_high)
    with pytest.raises(DegenerateSampleError):
        mean_ci_ttest([1.0, 1.0, 1.0])
    x = np.random.default_rng(0).normal(0.5, 1.0, 1000)
    r = mean_ci_ttest(x)
    assert r.p_value < 1e-6 and r.ci_low > 0


def test_ttest_matches_scipy():
    x = np.random.default_rng(1).standard_normal(37) + 0.2
    r = mean_ci_ttest(x, 0.9)
    ref = sps.ttest_1samp(x, 0.0)
    assert r.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert r.p_value == pytest.approx(ref.pvalue, rel=1e-10)
    lo, hi = sps.t.interval(0.9, 36, loc=x.mean(), scale=sps.sem(x))
    assert (r.ci_low, r.ci_high) == pytest.approx((lo, hi), rel=1e-12)


def test_t_cdf_against_incomplete_beta():
    # two-sided p = I_{nu/(nu+t^2)}(nu/2, 1/2)
    x = np.random.default_rng(2).standard_normal(12)
    r = mean_ci_ttest(x)
    nu = 11
    p = special.betainc(nu / 2, 0.5, nu / (nu + r.statistic ** 2))
    assert abs(r.p_value - p) <= 1e-10


def test_ttest_validation():
    with pytest.raises(DomainError):
        mean_ci_ttest([1.0], 0.95)
    with pytest.raises(DomainError):
        mean_ci_ttest([1.0, 2.0], 1.5)


@given(xs=spread_samples, c=st.floats(-100, 100))
def test_ttest_shift(xs, c):
    x = np.asarray(xs)
    a = mean_ci_ttest(x, mu0=0.0)
    b = mean_ci_ttest(x + c, mu0=c)
    scale = np.max(np.abs(x)) + abs(c) + 1
    assert b.ci_low - a.ci_low == pytest.approx(c, abs=1e-9 * scale)
    assert b.ci_high - a.ci_high == pytest.approx(c, abs=1e-9 * scale)
    assert b.p_value == pytest.approx(a.p_value, abs=1e-6)
    assert 0 <= a.p_value <= 1 and a.ci_low <= a.mean <= a.ci_high


def test_jarque_bera_examples():
    grid = special.ndtri((np.arange(1, 1002) - 0.5) / 1001)
    stat, p = jarque_bera(grid)
    assert stat <= 0.5
    x = np.random.default_rng(3).exponential(size=2000)
    assert jarque_bera(x)[1] < 1e-4
    with pytest.raises(DegenerateSampleError):
        jarque_bera(np.full(20, 3.0))


def test_jarque_bera_matches_scipy():
    x = np.random.default_rng(4).standard_t(5, 500)
    stat, p = jarque_bera(x)
    ref = sps.jarque_bera(x)
    assert stat == pytest.approx(ref.statistic, rel=1e-12)
    assert p == pytest.approx(ref.pvalue, rel=1e-10)


@given(xs=spread_samples, a=st.floats(0.01, 100), b=st.floats(-100, 100))
def test_jb_affine_invariance(xs, a, b):
    x = np.asarray(xs)
    s0 = jarque_bera(x)[0]
    s1 = jarque_bera(a * x + b)[0]
    assert s1 == pytest.approx(s0, rel=1e-10, abs=1e-10)


def test_qq_pairs_on_quantile_grid():
    n = 501
    grid = special.ndtri((np.arange(1, n + 1) - 0.5) / n)
    qq = qq_pairs(grid[::-1])
    assert np.max(np.abs(qq[:, 0] - qq[:, 1])) <= 1e-6
    assert np.all(np.diff(qq, axis=0) >= 0)


def test_normality_report_bundle():
    x = np.random.default_rng(5).standard_normal(300)
    rep = normality_report(x, level=0.9, bins=25)
    assert rep.hist_counts.sum() == 300
    assert rep.hist_edges.size == 26
    assert rep.kde_grid.size == 256
    assert rep.kde_bandwidth == pytest.approx(1.06 * np.std(x, ddof=1) * 300 ** -0.2)
    assert np.trapezoid(rep.kde_values, rep.kde_grid) == pytest.approx(1.0, abs=2e-3)
    assert rep.ci_low <= rep.sample_mean <= rep.ci_high
    d = rep.to_dict()
    assert d["tables"]["histogram"]["count"] == rep.hist_counts.tolist()


def test_kde_curve_against_scipy():
    x = np.random.default_rng(6).standard_normal(200)
    grid, vals, bw = kde_curve(x)
    ref = sps.gaussian_kde(x, bw_method=bw / np.std(x, ddof=1))(grid)
    np.testing.assert_allclose(vals, ref, rtol=1e-10)


def test_acf_examples():
    x = np.random.default_rng(7).standard_normal(10_000)
    r = acf(x, 20)
    assert r[0] == 1.0
    assert np.count_nonzero(np.abs(r[1:]) > 4 / math.sqrt(x.size)) <= 1
    alt = np.tile([1.0, -1.0], 500)
    assert acf(alt, 1)[1] == pytest.approx(-1.0, abs=2 / alt.size)
    with pytest.raises(DegenerateSampleError):
        acf(np.ones(10), 2)
    with pytest.raises(DomainError):
        acf(x[:5], 5)


def test_acf_against_statsmodels_formula():
    x = np.random.default_rng(8).standard_normal(64)
    c = x - x.mean()
    ref = [np.sum(c[: len(c) - k] * c[k:]) / np.sum(c * c) for k in range(6)]
    np.testing.assert_allclose(acf(x, 5), ref, rtol=1e-13)


@given(xs=spread_samples, c=st.floats(0.001, 1000).flatmap(lambda v: st.sampled_from([v, -v])))
def test_acf_scale_invariance(xs, c):
    x = np.asarray(xs)
    lag = min(5, x.size - 1)
    np.testing.assert_allclose(acf(c * x, lag), acf(x, lag), atol=1e-12)


def test_kpss_lag_rule_and_constant():
    assert kpss_auto_lags(100) == 4
    assert kpss_auto_lags(500) == 5
    assert KPSS_CRITICAL_5PCT == 0.463
    with pytest.raises(DegenerateSampleError):
        kpss_level(np.zeros(50))
    with pytest.raises(DomainError):
        kpss_level(np.arange(10.0))


def test_kpss_hand_computation():
    x = np.random.default_rng(9).standard_normal(40)
    e = x - x.mean()
    s = np.cumsum(e)
    L = 2
    lrv = np.sum(e * e) / 40 + 2 * sum((1 - k / 3) * np.sum(e[:-k] * e[k:]) / 40 for k in (1, 2))
    assert kpss_level(x, lags=L).statistic == pytest.approx(np.sum(s * s) / (40 ** 2 * lrv), rel=1e-12)


def test_kpss_seeded_size_and_power():
    # the realised size is about 4.6% at n = 500, so "95 of 100" holds for
    # roughly two seeds in three; the seed is pinned
    rng = np.random.default_rng(0)
    stationary = sum(kpss_level(rng.standard_normal(500)).verdict == "stationary" for _ in range(100))
    rejects = sum(kpss_level(np.cumsum(rng.standard_normal(500))).verdict == "reject" for _ in range(100))
    assert stationary >= 95
    assert rejects >= 95


def test_kpss_size_many_runs():
    rng = np.random.default_rng(11)
    stat = np.array([kpss_level(rng.standard_normal(500)).statistic for _ in range(4000)])
    size = np.mean(stat > KPSS_CRITICAL_5PCT)
    assert abs(size - 0.05) <= 4 * math.sqrt(0.05 * 0.95 / 4000) + 0.005
