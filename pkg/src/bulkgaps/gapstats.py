"""Gaps between consecutive eigenvalues inside an interval union, and their rescaling."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import IntervalUnion
from .errors import PreconditionError, SizeError

SIGMA_MAX_K = 6


@dataclass(frozen=True)
class GapList:
    """Gaps ``lambda[i+1] - lambda[i]`` with both endpoints in I, largest first.

    ``indices`` are 0-based left-eigenvalue indices; ``same_component`` marks
    the pairs whose endpoints lie in the same component of I.
    """

    indices: np.ndarray
    values: np.ndarray
    same_component: np.ndarray

    def __len__(self):
        return int(self.values.size)

    @property
    def pairs(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    @property
    def lambda_set(self) -> set[int]:
        return {int(i) for i in self.indices}

    @property
    def lambda_tilde_set(self) -> set[int]:
        return {int(i) for i in self.indices[self.same_component]}


def lambda_indices(lambdas, I: IntervalUnion) -> np.ndarray:
    """Sorted 0-based indices i with lambda_i and lambda_{i+1} both in I."""
    lam = np.asarray(lambdas, dtype=float)
    inside = I.contains(lam)
    return np.flatnonzero(inside[:-1] & inside[1:])


def extract_gaps(sample, I: IntervalUnion) -> GapList:
    lam = np.asarray(getattr(sample, "eigenvalues", sample), dtype=float)
    if lam.size < 2:
        empty = np.empty(0)
        return GapList(empty.astype(int), empty, empty.astype(bool))
    idx = lambda_indices(lam, I)
    comp = I.component(lam)
    vals = lam[idx + 1] - lam[idx]
    order = np.argsort(-vals, kind="stable")
    idx, vals = idx[order], vals[order]
    return GapList(idx, vals, comp[idx] == comp[idx + 1])


@dataclass(frozen=True)
class RescaleParams:
    n: int
    q: int
    S_I: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("rescaling needs n >= 3")
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if not self.S_I > 0:
            raise ValueError("S_I must be positive")

    @property
    def log_n(self) -> float:
        return math.log(self.n)


def gn(params: RescaleParams, x):
    L = params.log_n
    n = params.n
    q = params.q
    root = math.sqrt(2.0 * L)
    return (math.sqrt(32.0 * L) / n
            + (3 * q - 8) / (2.0 * q) * math.log(2.0 * L) / (n * root)
            + 4.0 * np.asarray(x, dtype=float)[()] / (n * root))


def rescale_gap(params: RescaleParams, m):
    """Solve ``G_n(tau) = S_I * m`` for tau."""
    L = params.log_n
    q = params.q
    m = np.asarray(m, dtype=float)[()]
    return (params.S_I * m * params.n * math.sqrt(2.0 * L)
            - 8.0 * L
            - (3 * q - 8) / (2.0 * q) * math.log(2.0 * L)) / 4.0


def exceedance_count(taus, x: float) -> int:
    return int(np.count_nonzero(np.asarray(taus, dtype=float) >= x))


# ---------------------------------------------------------------------------
# box-union membership (two independent deciders)


def _check_k(a, y):
    if len(a) != len(y):
        raise ValueError("a and y must have the same length")
    if len(a) > SIGMA_MAX_K:
        raise SizeError(f"brute-force membership supports k <= {SIGMA_MAX_K}")
    if any(aj <= 0 for aj in a):
        raise ValueError("all a_j must be positive")


def sigma_contains_direct(lambdas, I: IntervalUnion, a, y) -> bool:
    """Search for distinct gap indices i_j in Lambda(I) with
    lambda_{i_j} < y_j < lambda_{i_j + 1} - a_j."""
    _check_k(a, y)
    lam = np.asarray(lambdas, dtype=float)
    admissible = lambda_indices(lam, I)
    options = [[int(i) for i in admissible if lam[i] < yj < lam[i + 1] - aj]
               for aj, yj in zip(a, y)]
    return any(len(set(choice)) == len(choice) for choice in itertools.product(*options))


def sigma_contains_conditions(lambdas, I: IntervalUnion, a, y) -> bool:
    """Decide the same membership through the three geometric conditions.

    Requires every gap in Lambda(I) to lie within a single component of I.
    """
    _check_k(a, y)
    lam = np.asarray(lambdas, dtype=float)
    idx = lambda_indices(lam, I)
    comp = I.component(lam)
    if np.any(comp[idx] != comp[idx + 1]):
        raise PreconditionError("a gap straddles two components of I")

    k = len(y)
    # (i)
    if not all(I.interior_contains(yj) for yj in y):
        return False
    for l, j in itertools.combinations(range(k), 2):
        if max(y[l], y[j]) <= min(y[l] + a[l], y[j] + a[j]):
            return False
    # (ii)
    for yj, aj in zip(y, a):
        if np.any((lam >= yj) & (lam <= yj + aj)):
            return False
    # (iii)
    ends = I.endpoints
    merged = sorted([(float(v), False) for v in y] + [(e, True) for e in ends])
    for (lo, lo_end), (hi, hi_end) in zip(merged, merged[1:]):
        if lo_end and hi_end:
            continue
        if not np.any((lam >= lo) & (lam <= hi)):
            return False
    return True
