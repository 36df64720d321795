"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``[criterion N] PASS/FAIL`` line; the lines are
collected again in the terminal summary.
"""

import math
import os
import time

import numpy as np
import pytest
from scipy import integrate, stats

from bulkgaps import detengine as de
from bulkgaps import suites
from bulkgaps.ensembles import sample, sample_dense
from bulkgaps.equilibrium import GUE, JUE, LUE, IntervalUnion, Kind, c0_constant, report_for
from bulkgaps.gapstats import RescaleParams, gn
from bulkgaps.harness import ExperimentConfig, run_experiment

pytestmark = pytest.mark.slow


# ---------------------------------------------------------------------------
# 1. constants


def _closed_form(kind, a, b):
    c0 = c0_constant()
    if kind is Kind.GUE:
        if a + b < 0:
            return c0 + 1.5 * math.log(4 - a * a) - math.log(4 * abs(a))
        if a + b > 0:
            return c0 + 1.5 * math.log(4 - b * b) - math.log(4 * abs(b))
        return c0 + 1.5 * math.log(4 - a * a) - math.log(2 * abs(a))
    if kind is Kind.LUE:
        return c0 + math.log((4 - b) ** 1.5 * math.sqrt(b) / 8)
    if b < 0.5:
        return c0 + math.log(math.sqrt((1 - b) * b) / (1 - 2 * b))
    if b == 0.5 or a == 0.5:
        return c0 + math.log(math.sqrt(math.pi) / (2 * math.sqrt(2)))
    if a < 0.5 < b:
        return c0 + math.log(math.sqrt(math.pi) / math.sqrt(2))
    return c0 + math.log(math.sqrt((1 - a) * a) / (2 * a - 1))


def _random_intervals(kind, rng, count):
    lo, hi = {Kind.GUE: (-1.95, 1.95), Kind.LUE: (0.05, 3.95), Kind.JUE: (0.02, 0.98)}[kind]
    out = []
    while len(out) < count:
        a, b = np.sort(rng.uniform(lo, hi, 2))
        if b - a > 1e-3 and (kind is not Kind.GUE or min(abs(a), abs(b)) > 1e-3):
            out.append((float(a), float(b)))
    return out


def test_criterion_01_constants(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst_closed = worst_m = 0.0
    for spec in (GUE, LUE, JUE):
        for a, b in _random_intervals(spec.kind, rng, 50):
            rep = report_for(spec, IntervalUnion.single(a, b))
            worst_closed = max(worst_closed, abs(rep.c_VI - _closed_form(spec.kind, a, b)))
            worst_m = max(worst_m, abs(rep.c_VI - (c0_constant() + math.log(rep.M_I * rep.S_I / 4))))
    elapsed = time.perf_counter() - start
    verdict(1, worst_closed <= 1e-12 and worst_m <= 1e-12 and elapsed < 5.0,
            f"max |c - closed form| = {worst_closed:.2e}, max |c - (c0 + log(M S/4))| = {worst_m:.2e} "
            f"(tol 1e-12), {elapsed:.2f} s (limit 5 s)")


# ---------------------------------------------------------------------------
# 2. asymptotic Toeplitz expansion


def test_criterion_02_toeplitz_expansion(verdict):
    checks = suites.dikz_suite()
    bound = [c for c in checks if c.name.startswith("|log D")]
    halving = [c for c in checks if c.name.startswith("halving")]
    worst_bound = max(c.measured / float(c.expected.split()[-1]) for c in bound)
    ratios = [c.measured for c in halving]
    verdict(2, all(c.passed for c in checks),
            f"bound: {sum(c.passed for c in bound)}/{len(bound)} hold (worst err/bound {worst_bound:.3f}); "
            f"halving at fixed n*alpha: {sum(c.passed for c in halving)}/{len(halving)} <= 0.7 "
            f"(ratios {min(ratios):.4f}..{max(ratios):.4f})")


# ---------------------------------------------------------------------------
# 3. scaled Toeplitz law


def test_criterion_03_scaled_gap_law(verdict):
    combos = [(q, u, x) for q in (1, 2) for u in (0.0, 0.5) for x in (-0.5, 0.0, 0.5)]
    within, shrinks, notes = [], [], []
    for q, u, x in combos:
        r500, r1000, r2000 = (de.lemma_scaled_gap(n, q, u, x) for n in (500, 1000, 2000))
        within.append(abs(r1000 - 1) <= 0.2)
        shrinks.append(abs(r2000 - 1) < abs(r500 - 1))
        if not shrinks[-1]:
            notes.append(f"(q={q},u={u},x={x}) {r500:.4f}->{r2000:.4f}")
    verdict(3, all(within) and all(shrinks),
            f"n=1000 within 20%: {sum(within)}/12; deviation n=2000 < n=500: {sum(shrinks)}/12"
            + (f"; not shrinking: {', '.join(notes)}" if notes else ""))


# ---------------------------------------------------------------------------
# 4. tail inequality


def test_criterion_04_tail_inequality(verdict):
    held, total, slack = 0, 0, math.inf
    for n in (500, 1000):
        for x in (-1.0, 0.0, 1.0):
            g = gn(RescaleParams(n, 1, 1.0), x) / 2
            base = de.toeplitz_log_gap_cue(n, g)
            for w in (1.1, 1.5, 2.0):
                gap = -(w - 1) * math.log(n) + 1 + base - de.toeplitz_log_gap_cue(n, w * g)
                held += gap >= 0
                total += 1
                slack = min(slack, gap)
    verdict(4, held == total, f"{held}/{total} triples hold; smallest log slack {slack:.4f}")


# ---------------------------------------------------------------------------
# 5. kernel asymptotics


def test_criterion_05_kernel(verdict):
    checks = suites.kernel_suite()
    lead = [c.measured for c in checks if " lead " in c.name]
    second = [c.measured for c in checks if " second " in c.name]
    verdict(5, all(c.passed for c in checks),
            f"leading ratios {', '.join(f'{v:.3f}' for v in lead)} in [1.6, 2.4]; "
            f"second-order ratios {', '.join(f'{v:.3f}' for v in second)} in [3.0, 5.0]")


# ---------------------------------------------------------------------------
# 6. ensemble vs CUE gap probabilities


def test_criterion_06_cue_comparison(verdict):
    checks = suites.cue_suite()
    verdict(6, all(c.passed for c in checks),
            "relative differences " + ", ".join(f"{c.measured:.4f}" for c in checks) + " (tol 0.02)")


# ---------------------------------------------------------------------------
# 7. integral over I


def test_criterion_07_integral(verdict):
    (n1, r1), (n2, r2) = suites.integral_ratios((500, 1000))
    ok = 0.5 <= r1 <= 1.5 and abs(r2 - 1) < abs(r1 - 1)
    verdict(7, ok, f"ratio n={n1}: {r1:.5f} (bracket [0.5, 1.5]); n={n2}: {r2:.5f}; "
                   f"|r-1| {abs(r1 - 1):.5f} -> {abs(r2 - 1):.5f}")


# ---------------------------------------------------------------------------
# 8. two-interval inequality


def test_criterion_08_negative_correlation(verdict):
    checks = suites.negcorr_suite(n=100, count=100, seed=0)
    verdict(8, all(c.passed for c in checks), f"max lhs/rhs over 100 pairs = {checks[0].measured:.10f} (<= 1 + 1e-10)")


# ---------------------------------------------------------------------------
# 9. box-union membership


def test_criterion_09_sigma_equivalence(verdict):
    bad, hits = suites.sigma_equivalence(100_000, seed=0)
    verdict(9, bad == 0, f"{bad} disagreements over 100000 instances ({hits} members)")


# ---------------------------------------------------------------------------
# 10. Monte Carlo limit law


MC_REPLICAS = 4000
MC_SEED = 20240601


def _mc(ensemble, interval, n):
    cfg = ExperimentConfig(ensemble, n, MC_REPLICAS, interval, k_list=(1,), x_list=(0.0,),
                           seed=MC_SEED, workers=os.cpu_count() or 1)
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def monte_carlo():
    runs = {}
    for name, interval in (("GUE", "0.5:1"), ("JUE", "0.25:0.75")):
        runs[name] = {n: _mc(name, interval, n) for n in (500, 2000)}
    return runs


def test_criterion_10_monte_carlo(verdict, monte_carlo):
    parts, ok = [], True
    for name, runs in monte_carlo.items():
        small, big = runs[500], runs[2000]
        mean, var, theory = big.mean_counts[0], big.var_counts[0], big.theory_means[0]
        a = abs(mean - theory) <= 0.25 * theory
        b = abs(var - mean) <= 0.35 * mean
        c = big.ks[1] < 0.15 and big.ks[1] < small.ks[1]
        ok &= a and b and c
        parts.append(f"{name} q={big.report.q}: mean {mean:.4f} vs {theory:.4f} ({'ok' if a else 'FAIL'}), "
                     f"var {var:.4f} ({'ok' if b else 'FAIL'}), "
                     f"KS {small.ks[1]:.4f}->{big.ks[1]:.4f} ({'ok' if c else 'FAIL'})")
    verdict(10, ok, "; ".join(parts))


# ---------------------------------------------------------------------------
# 11. sampler laws


def _dense_vs_tridiagonal(kind, n=8, reps=100_000):
    pick = np.random.default_rng(7).integers(0, n, reps)
    dense = np.array([sample_dense(kind, n, 1, r).eigenvalues for r in range(reps)])
    tri = np.array([sample(kind, n, 2, r).eigenvalues for r in range(reps)])
    rows = np.arange(reps)
    # top eigenvalue, and one eigenvalue at a random index (the one-point law)
    return min(stats.ks_2samp(dense[:, -1], tri[:, -1]).pvalue,
               stats.ks_2samp(dense[rows, pick], tri[rows, pick]).pvalue)


def _density_error(spec, lo, hi, n=400, reps=2000, bins=30):
    eig = np.concatenate([sample(spec.kind, n, 3, r).eigenvalues for r in range(reps)])
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(eig, edges)
    emp = counts / (eig.size * np.diff(edges))
    exact = np.array([integrate.quad(spec.density_fn, a, b)[0] / (b - a) for a, b in zip(edges, edges[1:])])
    return float(np.max(np.abs(emp / exact - 1)))


def test_criterion_11_sampler_laws(verdict):
    start = time.perf_counter()
    pvals = {k.value: _dense_vs_tridiagonal(k) for k in (Kind.GUE, Kind.LUE, Kind.JUE)}
    dens = {"GUE": _density_error(GUE, -1.8, 1.8), "LUE": _density_error(LUE, 0.5, 3.5),
            "JUE": _density_error(JUE, 0.05, 0.95)}
    elapsed = time.perf_counter() - start
    ok = min(pvals.values()) > 1e-3 and max(dens.values()) <= 0.05
    verdict(11, ok, "two-sample KS p (min of top/one-point) "
                    + ", ".join(f"{k} {v:.3g}" for k, v in pvals.items())
                    + "; max bin error " + ", ".join(f"{k} {v:.4f}" for k, v in dens.items())
                    + f"; {elapsed:.0f} s")
