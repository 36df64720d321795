"""Named verification suites: measured quantities against locked tolerances.

Each suite returns a list of ``Check`` rows; the CLI prints them and exits 1
if any row fails.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import detengine as de
from .equilibrium import GUE, IntervalUnion, Kind, report_for
from .gapstats import lambda_indices, sigma_contains_conditions, sigma_contains_direct
from .opkernels import WeightedOPBasis, residual_sup

KERNEL_POINTS = {Kind.GUE: 0.3, Kind.LUE: 1.5, Kind.JUE: 0.3}
KERNEL_N = (100, 200, 400)
LEAD_BRACKET = (1.6, 2.4)
SECOND_BRACKET = (3.0, 5.0)
DIKZ_N = (100, 200, 400)
DIKZ_S = (0.8, 1.0, 1.2)
HALVING = 0.7
CUE_N = 200
CUE_X = 0.3
CUE_SCALES = (0.5, 1.125, 1.75, 2.375, 3.0)
CUE_RTOL = 0.02
LEMMA_BRACKET = (0.5, 1.5)


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    expected: str
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<44} {self.measured:<22.12g} {self.expected}"


def _within(v, lo, hi):
    return lo <= v <= hi


# ---------------------------------------------------------------------------
# kernel


def kernel_residuals(kind, x0: float, n_list=KERNEL_N) -> list[tuple[int, float, float]]:
    """(n, sup |leading residual|, sup |second-order residual|) over a (xi, eta) grid."""
    return [(n, *residual_sup(WeightedOPBasis(kind, n), x0)) for n in n_list]


def kernel_suite() -> list[Check]:
    checks = []
    for kind, x0 in KERNEL_POINTS.items():
        rows = kernel_residuals(kind, x0)
        for (n1, l1, s1), (n2, l2, s2) in zip(rows, rows[1:]):
            checks.append(Check(f"{kind.value} x0={x0} lead {n1}/{n2}", l1 / l2,
                                f"in {LEAD_BRACKET}", _within(l1 / l2, *LEAD_BRACKET)))
            checks.append(Check(f"{kind.value} x0={x0} second {n1}/{n2}", s1 / s2,
                                f"in {SECOND_BRACKET}", _within(s1 / s2, *SECOND_BRACKET)))
    return checks


# ---------------------------------------------------------------------------
# DIKZ


def dikz_alpha(n: int, s: float) -> float:
    return s * math.sqrt(32.0 * math.log(n)) / n


def dikz_error(n: int, alpha: float) -> float:
    return abs(de.toeplitz_log_gap_cue(n, alpha) - de.dikz_log_gap(n, alpha))


def dikz_suite() -> list[Check]:
    checks = []
    for n in DIKZ_N:
        for s in DIKZ_S:
            a = dikz_alpha(n, s)
            err = dikz_error(n, a)
            bound = 1.0 / (n * math.sin(a / 2.0))
            checks.append(Check(f"|log D - DIKZ| n={n} s={s}", err, f"<= {bound:.4g}", err <= bound))
    for n in DIKZ_N:
        for s in DIKZ_S:
            a = dikz_alpha(n, s)
            ratio = dikz_error(2 * n, a / 2.0) / dikz_error(n, a)
            checks.append(Check(f"halving n={n}->{2 * n} fixed n*alpha, s={s}", ratio,
                                f"<= {HALVING}", ratio <= HALVING))
    return checks


# ---------------------------------------------------------------------------
# CUE comparison


def cue_rows(n=CUE_N, x=CUE_X, scales=CUE_SCALES):
    """(scale, ensemble probability, CUE probability) with n delta = scale sqrt(log n)."""
    out = []
    for c in scales:
        delta = c * math.sqrt(math.log(n)) / n
        f, g = de.cue_comparison(GUE, n, x, delta)
        out.append((c, f, g))
    return out


def cue_suite() -> list[Check]:
    return [Check(f"GUE n={CUE_N} x={CUE_X} n*delta/sqrt(log n)={c}", abs(f - g) / g,
                  f"<= {CUE_RTOL}", abs(f - g) / g <= CUE_RTOL)
            for c, f, g in cue_rows()]


# ---------------------------------------------------------------------------
# integral lemma


def integral_ratios(n_list=(500, 1000), x: float = 0.0):
    I = IntervalUnion.single(0.5, 1.0)
    rep = report_for(GUE, I)
    return [(n, de.integral_lemma_ratio(GUE, I, rep, n, x)) for n in n_list]


def integral_suite() -> list[Check]:
    (n1, r1), (n2, r2) = integral_ratios()
    return [
        Check(f"ratio n={n1}", r1, f"in {LEMMA_BRACKET}", _within(r1, *LEMMA_BRACKET)),
        Check(f"|ratio - 1| n={n2} < n={n1}", abs(r2 - 1), f"< {abs(r1 - 1):.6g}", abs(r2 - 1) < abs(r1 - 1)),
    ]


# ---------------------------------------------------------------------------
# negative correlation


def random_interval_pairs(rng: np.random.Generator, count: int, lo=-1.5, hi=1.5, wmax=0.15):
    pairs = []
    while len(pairs) < count:
        c = np.sort(rng.uniform(lo, hi, 2))
        w = rng.uniform(0.005, wmax, 2)
        if c[0] + w[0] < c[1] and c[1] + w[1] < 2.0:
            pairs.append(((c[0], c[0] + w[0]), (c[1], c[1] + w[1])))
    return pairs


def negcorr_suite(n: int = 100, count: int = 100, seed: int = 0) -> list[Check]:
    worst = 0.0
    for I1, I2 in random_interval_pairs(np.random.default_rng(seed), count):
        lhs, rhs = de.negative_correlation_check(GUE, n, I1, I2)
        worst = max(worst, lhs / rhs)
    return [Check(f"max lhs/rhs over {count} pairs, GUE n={n}", worst, "<= 1 + 1e-10", worst <= 1 + 1e-10)]


# ---------------------------------------------------------------------------
# Sigma_k equivalence


def random_sigma_instance(rng: np.random.Generator):
    """Random (lambdas, I, a, y) with Lambda(I) = Lambda~(I).

    Most y_j are planted inside admissible gaps so that both outcomes
    of the membership test occur often.
    """
    while True:
        n = int(rng.integers(2, 13))
        p = int(rng.integers(1, 4))
        lam = np.sort(rng.uniform(0.0, 1.0, n))
        ends = np.sort(rng.uniform(0.0, 1.0, 2 * p))
        if np.any(np.diff(ends) <= 1e-9) or np.any(np.diff(lam) <= 1e-12):
            continue
        I = IntervalUnion(tuple((ends[2 * j], ends[2 * j + 1]) for j in range(p)))
        idx = lambda_indices(lam, I)
        comp = I.component(lam)
        if np.any(comp[idx] != comp[idx + 1]):
            continue
        k = int(rng.integers(1, 4))
        a, y = [], []
        for _ in range(k):
            if idx.size and rng.random() < 0.85:
                i = int(rng.choice(idx))
                g = lam[i + 1] - lam[i]
                yj = rng.uniform(lam[i], lam[i + 1])
                aj = rng.uniform(0.0, 1.05 * g) + 1e-12
            else:
                yj = rng.uniform(0.0, 1.0)
                aj = rng.uniform(0.0, 0.3) + 1e-12
            a.append(float(aj))
            y.append(float(yj))
        return lam, I, a, y


def sigma_equivalence(count: int, seed: int = 0) -> tuple[int, int]:
    """(disagreements, number of true memberships) over ``count`` instances."""
    rng = np.random.default_rng(seed)
    bad = hits = 0
    for _ in range(count):
        lam, I, a, y = random_sigma_instance(rng)
        d = sigma_contains_direct(lam, I, a, y)
        c = sigma_contains_conditions(lam, I, a, y)
        bad += d != c
        hits += d
    return bad, hits


def sigma_suite(count: int = 100_000, seed: int = 0) -> list[Check]:
    bad, hits = sigma_equivalence(count, seed)
    return [Check(f"disagreements over {count} instances ({hits} members)", bad, "== 0", bad == 0)]


SUITES = {
    "kernel": kernel_suite,
    "dikz": dikz_suite,
    "cue-compare": cue_suite,
    "integral-lemma": integral_suite,
    "negcorr": negcorr_suite,
    "sigma-equiv": sigma_suite,
}


def run_suite(name: str) -> list[Check]:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()


def as_records(checks) -> list[dict]:
    return [asdict(c) for c in checks]
