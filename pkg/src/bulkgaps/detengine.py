"""Deterministic gap probabilities.

* ``toeplitz_gap_cue``: the CUE arc-gap probability D_n(alpha), an n x n
  Toeplitz determinant with closed-form symbol coefficients.
* ``sine_gap_fredholm`` / ``finite_n_gap``: Fredholm determinants of the sine
  kernel and of the finite-n Christoffel-Darboux kernels, discretized by
  Gauss-Legendre Nystrom quadrature.
* ``integral_lemma_value``: the y-integral of D_n(rho(y)/rho_I * G_n(x)/2) over I.
* ``negative_correlation_check``: the gap-event inequality for two intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline

from .equilibrium import EnsembleSpec, IntervalUnion, MinimizerReport, c0_constant, get_ensemble
from .errors import DomainError, NumericalError
from .gapstats import RescaleParams, gn
from .opkernels import WeightedOPBasis, kernel_matrix

DEFAULT_ORDER = 60
ALPHA_GRID = 400
LONGDOUBLE_NALPHA = 20.0
DOUBLE_LOGP = 8.0      # sine determinants above e^-8 are safe in double precision


# ---------------------------------------------------------------------------
# CUE Toeplitz determinant


def toeplitz_symbol(n: int, alpha: float) -> np.ndarray:
    """First row t_0..t_{n-1} of the symmetric Toeplitz matrix of D_n(alpha)."""
    m = np.arange(1, n, dtype=np.longdouble)
    a = np.longdouble(alpha)
    t = np.empty(n, dtype=np.longdouble)
    t[0] = 1 - a / np.longdouble(math.pi)
    t[1:] = -np.sin(m * a) / (np.longdouble(math.pi) * m)
    return t


def _levinson_logdet(t: np.ndarray) -> float:
    # Durbin recursion on the normalized row; log det = n log t0 + sum log(E_k / t0)
    n = t.size
    r = t[1:] / t[0]
    logdet = n * np.log(t[0])
    if n == 1:
        return float(logdet)
    y = np.empty(n - 1, dtype=t.dtype)
    y[0] = -r[0]
    beta = np.longdouble(1)
    refl = -r[0]
    for k in range(1, n):
        beta = beta * (1 - refl * refl)
        if not beta > 0:
            raise NumericalError("Toeplitz matrix lost positive definiteness")
        logdet += np.log(beta)
        if k == n - 1:
            break
        refl = -(r[k] + np.dot(r[k - 1::-1], y[:k])) / beta
        y[:k] = y[:k] + refl * y[k - 1::-1]
        y[k] = refl
    return float(logdet)


def _mp_levinson_logdet(n: int, alpha: float, dps: int) -> float:
    # same recursion at `dps` decimal digits
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        t0 = 1 - a / mpmath.pi
        r = [-mpmath.sin(m * a) / (mpmath.pi * m) / t0 for m in range(1, n)]
        logdet = n * mpmath.log(t0)
        if n == 1:
            return float(logdet)
        y = [-r[0]]
        beta = mpmath.mpf(1)
        refl = -r[0]
        for k in range(1, n):
            beta *= 1 - refl * refl
            if not beta > 0:
                raise NumericalError("Toeplitz recursion broke down in extended precision")
            logdet += mpmath.log(beta)
            if k == n - 1:
                break
            refl = -(r[k] + mpmath.fdot(r[k - 1::-1], y)) / beta
            y = [y[i] + refl * y[k - 1 - i] for i in range(k)] + [refl]
        return float(logdet)


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= math.pi:
        raise DomainError(f"alpha={alpha} outside [0, pi]")


def toeplitz_log_gap_cue(n: int, alpha: float) -> float:
    """log D_n(alpha); -inf at alpha = pi.

    Long double Levinson-Durbin keeps about 1e-9 absolute accuracy in the log
    while n * alpha <= 20. Beyond that the small pivots are resolved with the
    same recursion in mpmath, with digits scaled to the expected magnitude.
    """
    if n < 1:
        raise ValueError("n must be positive")
    _check_alpha(alpha)
    if alpha == 0.0:
        return 0.0
    if alpha == math.pi:
        return -math.inf
    # the smallest Levinson pivot is about cos(alpha/2)^(2n); keep it well above long double eps
    if n * alpha <= LONGDOUBLE_NALPHA and -2.0 * n * math.log(math.cos(alpha / 2.0)) <= LONGDOUBLE_NALPHA:
        return _levinson_logdet(toeplitz_symbol(n, alpha))
    magnitude = -n * n * math.log(math.cos(alpha / 2.0)) if alpha < math.pi - 1e-12 else 1e4
    dps = 30 + int(magnitude / math.log(10.0))
    return _mp_levinson_logdet(n, alpha, dps)


def toeplitz_gap_cue(n: int, alpha: float) -> float:
    """Probability that n CUE eigenangles avoid an arc of length 2 alpha."""
    return math.exp(toeplitz_log_gap_cue(n, alpha))


def dikz_log_gap(n: int, alpha: float) -> float:
    """Large-n expansion of log D_n(alpha) without its error term."""
    if not 0.0 < alpha < math.pi:
        raise DomainError(f"alpha={alpha} must lie strictly inside (0, pi)")
    return (n * n * math.log(math.cos(alpha / 2.0))
            - 0.25 * math.log(n * math.sin(alpha / 2.0)) + c0_constant())


# ---------------------------------------------------------------------------
# Nystrom discretization


@dataclass(frozen=True)
class NystromGrid:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    @classmethod
    def gauss_legendre(cls, lo: float, hi: float, order: int) -> "NystromGrid":
        if order < 1:
            raise ValueError("quadrature order must be positive")
        x, w = np.polynomial.legendre.leggauss(order)
        half = 0.5 * (hi - lo)
        return cls(lo + half * (x + 1.0), half * w, order)


@lru_cache(maxsize=32)
def _mp_legendre(order: int, dps: int):
    # Gauss-Legendre rule on [-1, 1] at `dps` digits, Newton-polished from double guesses
    with mpmath.workdps(dps):
        x0, _ = np.polynomial.legendre.leggauss(order)
        nodes, weights = [], []
        for guess in x0:
            x = mpmath.mpf(float(guess))
            for _ in range(100):
                p0, p1 = mpmath.mpf(1), x
                for j in range(1, order):
                    p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mpmath.mpf(10) ** (-dps + 2):
                    break
            p0, p1 = mpmath.mpf(1), x
            for j in range(1, order):
                p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
            dp = order * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
        return tuple(nodes), tuple(weights)


def _sine_kernel_mp(x, y):
    if x == y:
        return mpmath.mpf(1)
    d = mpmath.pi * (x - y)
    return mpmath.sin(d) / d


def sine_log_gap_fredholm(r: float, m: int = DEFAULT_ORDER, dps: int | None = None) -> float:
    """log det(I - K_sine) on [0, r].

    Small eigenvalues of I - K reach e^{-pi^2 r^2 / 8}, so the determinant is
    evaluated in extended precision with enough digits to resolve them.
    """
    if r < 0:
        raise DomainError("interval length r must be nonnegative")
    if r == 0:
        return 0.0
    if dps is None and math.pi**2 * r * r / 8.0 <= DOUBLE_LOGP:
        grid = NystromGrid.gauss_legendre(0.0, r, m)
        kmat = np.sinc(grid.nodes[:, None] - grid.nodes[None, :])
        return _fredholm_det(kmat, grid.weights)
    if dps is None:
        dps = 20 + int(math.ceil(math.pi**2 * r * r / 8.0 / math.log(10.0)))
    nodes, weights = _mp_legendre(m, dps)
    with mpmath.workdps(dps):
        half = mpmath.mpf(r) / 2
        xs = [half * (t + 1) for t in nodes]
        sw = [mpmath.sqrt(half * w) for w in weights]
        mat = mpmath.matrix(m, m)
        for i in range(m):
            for j in range(i, m):
                v = -sw[i] * _sine_kernel_mp(xs[i], xs[j]) * sw[j]
                mat[i, j] = v
                mat[j, i] = v
            mat[i, i] += 1
        det = mpmath.det(mat)
        if not det > 0:
            raise NumericalError("Fredholm determinant is not positive; raise the precision")
        return float(mpmath.log(det))


def sine_gap_fredholm(r: float, m: int = DEFAULT_ORDER) -> float:
    """Probability that an interval of length r holds no point of the sine process."""
    return math.exp(sine_log_gap_fredholm(r, m))


def sine_gap_asymptotic(r: float) -> float:
    """Leading large-r expansion of log P_sine(r)."""
    if r <= 0:
        raise DomainError("asymptotic expansion needs r > 0")
    return -math.pi**2 * r * r / 8.0 - 0.25 * math.log(math.pi * r / 2.0) + c0_constant()


def _fredholm_det(kmat: np.ndarray, weights: np.ndarray) -> float:
    sw = np.sqrt(weights)
    a = np.eye(weights.size) - sw[:, None] * kmat * sw[None, :]
    sign, logdet = np.linalg.slogdet(a)
    if sign <= 0:
        raise NumericalError("discretized Fredholm determinant is not positive")
    return float(logdet)


def _check_inside(spec: EnsembleSpec, lo: float, hi: float) -> None:
    a0, b0 = spec.support
    if not (a0 < lo and hi < b0):
        raise DomainError(f"[{lo}, {hi}] is not strictly inside the support {spec.support}")


def finite_n_log_gap(spec, n: int, x: float, delta: float, m: int = DEFAULT_ORDER) -> float:
    spec = get_ensemble(spec)
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    _check_inside(spec, x, x + delta)
    if delta == 0:
        return 0.0
    grid = NystromGrid.gauss_legendre(x, x + delta, m)
    basis = WeightedOPBasis(spec.kind, n)
    return _fredholm_det(kernel_matrix(basis, grid.nodes), grid.weights)


def finite_n_gap(spec, n: int, x: float, delta: float, m: int = DEFAULT_ORDER) -> float:
    """Exact probability that no eigenvalue of the n-point ensemble lies in [x, x + delta]."""
    return math.exp(finite_n_log_gap(spec, n, x, delta, m))


def cue_comparison(spec, n: int, x: float, delta_scaled: float, m: int = DEFAULT_ORDER):
    """(ensemble gap probability, CUE gap probability) for [x, x + delta/rho(x)]."""
    spec = get_ensemble(spec)
    rho = float(spec.density_fn(x))
    return (finite_n_gap(spec, n, x, delta_scaled / rho, m),
            toeplitz_gap_cue(n, math.pi * delta_scaled))


# ---------------------------------------------------------------------------
# the y-integral over I


def lemma_scaled_gap(n: int, q: int, u: float, x: float) -> float:
    """n D_n((1 + u/log n) G_n(x)/2) / (2 log n)^(1/q - 1/2), divided by e^{c0 - x - 2u}."""
    L = math.log(n)
    alpha = (1.0 + u / L) * gn(RescaleParams(n, q, 1.0), x) / 2.0
    log_val = (math.log(n) + toeplitz_log_gap_cue(n, alpha)
               - (1.0 / q - 0.5) * math.log(2.0 * L))
    return math.exp(log_val - (c0_constant() - x - 2.0 * u))


@dataclass(frozen=True)
class LogGapInterpolant:
    """Cubic spline of alpha -> log D_n(alpha) on a uniform grid."""

    n: int
    alphas: np.ndarray
    spline: CubicSpline

    @classmethod
    def build(cls, n: int, lo: float, hi: float, points: int = ALPHA_GRID) -> "LogGapInterpolant":
        if hi > math.pi:
            raise DomainError(f"alpha range reaches {hi} > pi")
        alphas = np.linspace(lo, hi, points)
        values = np.array([toeplitz_log_gap_cue(n, a) for a in alphas])
        return cls(n, alphas, CubicSpline(alphas, values))

    def __call__(self, alpha):
        return self.spline(alpha)


def _graded_panels(a: float, b: float, focus: list[float], levels: int = 12) -> list[float]:
    # panel breakpoints accumulating geometrically at each focus point
    cuts = {a, b}
    for u in focus:
        for side in (a, b):
            span = side - u
            for j in range(levels):
                cuts.add(u + span * 0.5**j)
        cuts.add(u)
    return sorted(c for c in cuts if a <= c <= b)


def integral_lemma_value(spec, I: IntervalUnion, report: MinimizerReport, n: int, x: float,
                         order: int = 16, return_interpolant: bool = False):
    """Integral over I of D_n(rho(y)/rho_I * G_n(x)/2) dy."""
    spec = get_ensemble(spec)
    if n < 50:
        raise ValueError("the integral lemma check needs n >= 50")
    I.validate_for(spec)
    alpha0 = gn(RescaleParams(n, report.q, report.S_I or 2 * math.pi * report.rho_I), x) / 2.0
    if alpha0 <= 0:
        raise DomainError("G_n(x) must be positive")
    # maximum of rho over I: endpoints and a fine scan suffice for a smooth density
    rho_max = max(float(np.max(spec.density_fn(np.linspace(a, b, 2001)))) for a, b in I.intervals)
    interp = LogGapInterpolant.build(n, alpha0, alpha0 * rho_max / report.rho_I * (1 + 1e-9))
    t, w = np.polynomial.legendre.leggauss(order)
    minimizers = list(report.A) + list(report.B)
    total = 0.0
    for a, b in I.intervals:
        focus = [u for u in minimizers if a <= u <= b]
        cuts = _graded_panels(a, b, focus)
        for lo, hi in zip(cuts, cuts[1:]):
            half = 0.5 * (hi - lo)
            ys = lo + half * (t + 1.0)
            alphas = np.clip(spec.density_fn(ys) / report.rho_I * alpha0, interp.alphas[0], interp.alphas[-1])
            total += half * float(np.dot(w, np.exp(interp(alphas))))
    return (total, interp) if return_interpolant else total


def integral_lemma_ratio(spec, I: IntervalUnion, report: MinimizerReport, n: int, x: float) -> float:
    """Integral divided by its predicted leading term M(I) e^{c0 - x} / (n sqrt(2 log n))."""
    value = integral_lemma_value(spec, I, report, n, x)
    lead = report.M_I * math.exp(c0_constant() - x) / (n * math.sqrt(2.0 * math.log(n)))
    return value / lead


# ---------------------------------------------------------------------------
# two-interval inequality


def negative_correlation_check(spec, n: int, I1, I2, m: int = 40) -> tuple[float, float]:
    """(P(no eigenvalue in I1 u I2), P(none in I1) P(none in I2))."""
    spec = get_ensemble(spec)
    (a1, b1), (a2, b2) = sorted([tuple(map(float, I1)), tuple(map(float, I2))])
    if a1 > b1 or a2 > b2:
        raise ValueError("intervals must satisfy lo <= hi")
    if b1 > a2 and b1 > a1 and b2 > a2:
        raise ValueError("intervals must not overlap")
    _check_inside(spec, a1, b1)
    _check_inside(spec, a2, b2)
    basis = WeightedOPBasis(spec.kind, n)
    grids = [NystromGrid.gauss_legendre(a, b, m) for a, b in ((a1, b1), (a2, b2)) if b > a]
    if not grids:
        return 1.0, 1.0
    singles = [_fredholm_det(kernel_matrix(basis, g.nodes), g.weights) for g in grids]
    nodes = np.concatenate([g.nodes for g in grids])
    weights = np.concatenate([g.weights for g in grids])
    joint = _fredholm_det(kernel_matrix(basis, nodes), weights)
    return math.exp(joint), math.exp(sum(singles))
