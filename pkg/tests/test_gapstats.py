import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bulkgaps.equilibrium import IntervalUnion
from bulkgaps.errors import PreconditionError, SizeError
from bulkgaps.gapstats import (
    GapList, RescaleParams, exceedance_count, extract_gaps, gn, lambda_indices, rescale_gap,
    sigma_contains_conditions, sigma_contains_direct,
)
from bulkgaps.suites import random_sigma_instance, sigma_equivalence

# mpmath at 30 digits: sqrt(32 L)/n - (5/2) log(2L)/(n sqrt(2L)), L = log 2981
GN_2981 = 0.00478602702704076317


def test_extract_single_interval():
    g = extract_gaps([0.1, 0.4, 0.45, 0.9], IntervalUnion.single(0.3, 0.95))
    assert g.pairs == [(2, pytest.approx(0.45)), (1, pytest.approx(0.05))]
    assert np.all(np.diff(g.values) <= 0)


def test_extract_empty():
    g = extract_gaps([0.1, 0.5, 0.9], IntervalUnion.single(0.2, 0.4))
    assert len(g) == 0 and isinstance(g, GapList)
    assert len(extract_gaps([0.3], IntervalUnion.single(0, 1))) == 0


def test_extract_two_components():
    # the cross-component pair (0.2, 0.6) has both endpoints in I, so it is a gap of I
    I = IntervalUnion(((0.0, 0.3), (0.5, 1.0)))
    g = extract_gaps([0.1, 0.2, 0.6, 0.7], I)
    assert g.lambda_set == {0, 1, 2}
    assert g.lambda_tilde_set == {0, 2}
    assert sorted(g.values) == pytest.approx([0.1, 0.1, 0.4])


def test_closed_membership():
    g = extract_gaps([0.0, 0.5, 1.0], IntervalUnion.single(0.0, 1.0))
    assert len(g) == 2


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=0, max_size=30, unique=True),
       st.floats(0, 0.49), st.floats(0.51, 1))
def test_gap_count_matches_lambda(lams, lo, hi):
    lam = np.sort(lams)
    I = IntervalUnion.single(lo, hi)
    g = extract_gaps(lam, I)
    assert len(g) == (lambda_indices(lam, I).size if lam.size >= 2 else 0)
    for i, v in g.pairs:
        assert I.contains(lam[i]) and I.contains(lam[i + 1])
        assert v == lam[i + 1] - lam[i] > 0


def test_gn_frozen_value():
    assert gn(RescaleParams(2981, 1, 1.0), 0.0) == pytest.approx(GN_2981, rel=1e-14)


def test_gn_cancellation_and_monotone():
    for q in (1, 2, 3):
        p = RescaleParams(1000, q, 2.0)
        L = math.log(1000)
        x = -(3 * q - 8) * math.log(2 * L) / (8 * q)
        assert gn(p, x) == pytest.approx(math.sqrt(32 * L) / 1000, rel=1e-14)
        assert gn(p, 0.1) > gn(p, 0.0)


def test_rescale_params_checks():
    with pytest.raises(ValueError):
        RescaleParams(2, 1, 1.0)
    with pytest.raises(ValueError):
        RescaleParams(10, 0, 1.0)
    with pytest.raises(ValueError):
        RescaleParams(10, 1, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 10**7), st.integers(1, 4), st.floats(-10, 10), st.floats(0.1, 10))
def test_rescale_round_trip(n, q, x, S):
    p = RescaleParams(n, q, S)
    assert rescale_gap(p, gn(p, x) / S) == pytest.approx(x, abs=1e-12 * max(1.0, math.sqrt(math.log(n)) * n * 1e-3))


def test_rescale_at_leading_term():
    n = 5000
    L = math.log(n)
    S = 3.0
    p = RescaleParams(n, 1, S)
    m = math.sqrt(32 * L) / (n * S)
    assert rescale_gap(p, m) == pytest.approx(5 / 8 * math.log(2 * L), abs=1e-12)
    slope = rescale_gap(p, m + 1e-3) - rescale_gap(p, m)
    assert slope == pytest.approx(S * n * math.sqrt(2 * L) / 4 * 1e-3, rel=1e-9)


def test_exceedance_examples():
    assert exceedance_count([], 0.3) == 0
    assert exceedance_count([1.0, 0.5, -0.2], 0.0) == 2
    assert exceedance_count([0.7], 0.7) == 1


@given(st.lists(st.floats(-50, 50), max_size=40), st.floats(-60, 60), st.floats(0, 10))
def test_exceedance_monotone(taus, x, dx):
    assert exceedance_count(taus, x) >= exceedance_count(taus, x + dx)


def test_sigma_examples():
    I = IntervalUnion.single(0.0, 1.0)
    assert sigma_contains_direct([0.1, 0.9], I, [0.3], [0.2])
    assert not sigma_contains_direct([0.1, 0.9], I, [0.3], [0.7])
    # two y's but only one admissible gap: indices must be distinct
    assert not sigma_contains_direct([0.1, 0.9], I, [0.05, 0.05], [0.2, 0.5])
    assert sigma_contains_conditions([0.1, 0.9], I, [0.3], [0.2])
    assert not sigma_contains_conditions([0.1, 0.9], I, [0.3], [0.7])
    # y on the boundary of I fails (i)
    assert not sigma_contains_conditions([0.1, 0.9], IntervalUnion.single(0.2, 1.0), [0.1], [0.2])
    assert not sigma_contains_direct([0.1, 0.9], IntervalUnion.single(0.2, 1.0), [0.1], [0.2])


def test_sigma_errors():
    I = IntervalUnion.single(0.0, 1.0)
    with pytest.raises(SizeError):
        sigma_contains_direct([0.1, 0.9], I, [0.1] * 7, [0.2] * 7)
    with pytest.raises(ValueError):
        sigma_contains_direct([0.1, 0.9], I, [0.0], [0.2])
    with pytest.raises(PreconditionError):
        sigma_contains_conditions([0.1, 0.2, 0.6, 0.7], IntervalUnion(((0, 0.3), (0.5, 1))), [0.01], [0.15])


def test_sigma_equivalence_sample():
    bad, hits = sigma_equivalence(5000, seed=1)
    assert bad == 0
    assert 100 < hits < 4900


def test_random_instances_satisfy_hypothesis():
    rng = np.random.default_rng(4)
    for _ in range(200):
        lam, I, a, y = random_sigma_instance(rng)
        idx = lambda_indices(lam, I)
        comp = I.component(lam)
        assert np.all(comp[idx] == comp[idx + 1])
        assert 1 <= len(a) == len(y) <= 3
