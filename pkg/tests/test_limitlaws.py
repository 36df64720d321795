import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from bulkgaps.limitlaws import GammaGumbel, gamma_gumbel_cdf, gamma_gumbel_pdf, ks_distance, poisson_pmf


def test_pdf_cdf_examples():
    law = GammaGumbel(1, 0.0)
    assert gamma_gumbel_pdf(law, 0.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert gamma_gumbel_cdf(law, 0.0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert gamma_gumbel_cdf(law, 200.0) == pytest.approx(1.0)
    assert gamma_gumbel_cdf(law, -200.0) == 0.0
    xs = np.linspace(-3, 3, 601)
    assert xs[np.argmax(GammaGumbel(1, 0.7).pdf(xs + 0.7))] + 0.7 == pytest.approx(0.7, abs=1e-9)


def test_invalid_k():
    with pytest.raises(ValueError):
        GammaGumbel(0, 0.0)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_normalization(k):
    law = GammaGumbel(k, -0.4)
    total, _ = integrate.quad(law.pdf, -60, 60, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.floats(-3, 3), st.floats(-10, 10), st.floats(0.01, 5))
def test_pdf_cdf_consistency(k, c, a, w):
    law = GammaGumbel(k, c)
    area, _ = integrate.quad(law.pdf, a, a + w, epsabs=1e-13, epsrel=1e-12)
    assert abs(law.cdf(a + w) - law.cdf(a) - area) <= 1e-8
    h = 1e-4
    assert (law.cdf(a + h) - law.cdf(a - h)) / (2 * h) == pytest.approx(law.pdf(a), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.floats(-3, 3), st.floats(-8, 8))
def test_poisson_link(k, c, x):
    law = GammaGumbel(k, c)
    tail = stats.poisson.sf(k - 1, math.exp(c - x))
    assert 1.0 - law.cdf(x) == pytest.approx(tail, abs=1e-12)


@given(st.integers(1, 6), st.floats(-3, 3), st.lists(st.floats(-40, 40), min_size=2, max_size=20))
def test_cdf_monotone(k, c, xs):
    xs = np.sort(xs)
    assert np.all(np.diff(GammaGumbel(k, c).cdf(xs)) >= 0)


def test_log_space_tails():
    law = GammaGumbel(3, 0.0)
    assert np.isfinite(law.logpdf(-40.0)) and np.isfinite(law.logpdf(800.0))
    assert law.pdf(-40.0) == 0.0 or law.pdf(-40.0) < 1e-300


def test_poisson_pmf():
    assert poisson_pmf(0, 0) == 1.0
    assert poisson_pmf(1, 1) == pytest.approx(math.exp(-1))
    assert math.fsum(poisson_pmf(2, j) for j in range(51)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        poisson_pmf(-1, 0)


def test_ks_examples():
    law = GammaGumbel(1, 0.3)
    rng = np.random.default_rng(0)
    u = rng.uniform(size=100_000)
    x = law.c - np.log(-np.log(u))     # inverse transform
    assert ks_distance(x, law.cdf) < 0.006
    assert ks_distance([0.0], lambda v: 0.5 * np.ones_like(v)) == pytest.approx(0.5)
    assert ks_distance([1.0, 2.0], lambda v: np.ones_like(v)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ks_distance([], law.cdf)


def test_ks_matches_scipy():
    rng = np.random.default_rng(1)
    x = rng.normal(size=500)
    assert ks_distance(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, rel=1e-12)
