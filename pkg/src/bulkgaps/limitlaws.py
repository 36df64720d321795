"""Gamma-Gumbel limit laws, Poisson references and Kolmogorov-Smirnov distances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln, logsumexp


@dataclass(frozen=True)
class GammaGumbel:
    """Law of the k-th largest rescaled gap: density e^{k(c-x)} exp(-e^{c-x}) / (k-1)!."""

    k: int
    c: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")

    def logpdf(self, x):
        t = self.c - np.asarray(x, dtype=float)
        return self.k * t - np.exp(t) - gammaln(self.k)

    def pdf(self, x):
        return np.exp(self.logpdf(x))[()]

    def cdf(self, x):
        # P(Poisson(e^{c-x}) <= k-1), summed in log space
        t = np.atleast_1d(self.c - np.asarray(x, dtype=float))
        j = np.arange(self.k)
        logterms = -np.exp(t)[:, None] + j[None, :] * t[:, None] - gammaln(j + 1)[None, :]
        out = np.exp(logsumexp(logterms, axis=1))
        return np.minimum(out, 1.0).reshape(np.shape(x))[()]

    def mean_exceedances(self, x):
        return np.exp(self.c - np.asarray(x, dtype=float))[()]


def gamma_gumbel_pdf(law: GammaGumbel, x):
    return law.pdf(x)


def gamma_gumbel_cdf(law: GammaGumbel, x):
    return law.cdf(x)


def poisson_pmf(mean: float, j: int) -> float:
    if mean < 0:
        raise ValueError("Poisson mean must be nonnegative")
    if j < 0:
        return 0.0
    if mean == 0:
        return 1.0 if j == 0 else 0.0
    return math.exp(-mean + j * math.log(mean) - math.lgamma(j + 1))


def ks_distance(samples, cdf: Callable) -> float:
    """Two-sided sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("ks_distance needs at least one sample")
    n = x.size
    try:
        f = np.asarray(cdf(x), dtype=float)
    except (TypeError, ValueError):
        f = None
    if f is None or f.shape != x.shape:
        f = np.array([float(cdf(v)) for v in x])
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))

