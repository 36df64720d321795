"""Equilibrium densities, minimizer classification and the limiting-law constants.

The three canonical ensembles (GUE, LUE, JUE) carry closed-form densities and
closed-form derivatives. A ``Custom`` ensemble only needs its support and a
density callable; missing derivatives fall back to Richardson-extrapolated
central differences.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import bernoulli, gamma

from .errors import DomainError, PrecisionError, UnsupportedDegeneracyError

TWO_PI = 2.0 * math.pi
MAX_ORDER = 4
GRID_POINTS = 10_000
TIE_RTOL = 1e-12
ORDER_TOL = 1e-9


class Kind(str, enum.Enum):
    GUE = "GUE"
    LUE = "LUE"
    JUE = "JUE"
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, value: "str | Kind") -> "Kind":
        if isinstance(value, Kind):
            return value
        for kind in cls:
            if kind.value.lower() == str(value).lower():
                return kind
        raise ValueError(f"unknown ensemble {value!r}")


# ---------------------------------------------------------------------------
# closed forms


def _gue_density(x):
    return np.sqrt(4.0 - x * x) / TWO_PI


def _lue_density(x):
    return np.sqrt((4.0 - x) / x) / TWO_PI


def _jue_density(x):
    return 1.0 / (math.pi * np.sqrt(x * (1.0 - x)))


_CANONICAL = {
    Kind.GUE: ((-2.0, 2.0), _gue_density),
    Kind.LUE: ((0.0, 4.0), _lue_density),
    Kind.JUE: ((0.0, 1.0), _jue_density),
}


@functools.lru_cache(maxsize=None)
def _symbolic_derivatives(kind: Kind) -> tuple:
    """Lambdified closed-form derivatives of orders 1..4 (built lazily)."""
    import sympy as sp

    x = sp.Symbol("x", real=True)
    if kind is Kind.GUE:
        rho = sp.sqrt(4 - x**2) / (2 * sp.pi)
    elif kind is Kind.LUE:
        rho = sp.sqrt((4 - x) / x) / (2 * sp.pi)
    else:
        rho = 1 / (sp.pi * sp.sqrt(x * (1 - x)))
    out = []
    expr = rho
    for _ in range(MAX_ORDER):
        expr = sp.simplify(sp.diff(expr, x))
        out.append(sp.lambdify(x, expr, "numpy"))
    return tuple(out)


@dataclass(frozen=True)
class EnsembleSpec:
    """An equilibrium density on a single-interval support.

    ``derivatives`` (optional, Custom only) lists evaluators for the first
    ``len(derivatives)`` derivatives; higher orders use finite differences.
    """

    kind: Kind
    support: tuple[float, float]
    density_fn: Callable = field(repr=False, compare=False)
    derivatives: tuple = field(default=(), repr=False, compare=False)
    name: str = ""

    @classmethod
    def canonical(cls, kind: "str | Kind") -> "EnsembleSpec":
        kind = Kind.parse(kind)
        if kind is Kind.CUSTOM:
            raise ValueError("use EnsembleSpec.custom for custom densities")
        support, fn = _CANONICAL[kind]
        return cls(kind, support, fn, name=kind.value)

    @classmethod
    def custom(
        cls,
        support: tuple[float, float],
        density: Callable,
        derivatives: Sequence[Callable] = (),
        name: str = "custom",
    ) -> "EnsembleSpec":
        a0, b0 = map(float, support)
        if not a0 < b0:
            raise ValueError("support must satisfy a0 < b0")
        return cls(Kind.CUSTOM, (a0, b0), density, tuple(derivatives), name)

    @property
    def width(self) -> float:
        return self.support[1] - self.support[0]

    def inside(self, x) -> bool:
        a0, b0 = self.support
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > a0) & (x < b0)))

    def derivative(self, order: int, x):
        """``order``-th derivative of the density (order 0 is the density)."""
        if order == 0:
            return self.density_fn(x)
        if self.kind is not Kind.CUSTOM:
            return _symbolic_derivatives(self.kind)[order - 1](np.asarray(x, dtype=float))
        if order <= len(self.derivatives):
            return self.derivatives[order - 1](x)
        return richardson_derivative(self.density_fn, x, order, self.support)


GUE = EnsembleSpec.canonical(Kind.GUE)
LUE = EnsembleSpec.canonical(Kind.LUE)
JUE = EnsembleSpec.canonical(Kind.JUE)


def get_ensemble(kind: "str | Kind | EnsembleSpec") -> EnsembleSpec:
    if isinstance(kind, EnsembleSpec):
        return kind
    return EnsembleSpec.canonical(kind)


# ---------------------------------------------------------------------------
# finite differences

_STENCILS = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def _central(f, x, order, h):
    return math.fsum(c * float(f(x + k * h)) for k, c in _STENCILS[order]) / h**order


def richardson_derivative(f, x, order, support, levels=3, rtol=1e-4):
    """Central differences of orders 1-4 with Richardson extrapolation.

    The base step is ``1e-3 * |support|``, shrunk so the widest stencil stays
    inside the open support.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError("order must be in 1..4")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    a0, b0 = support
    out = np.empty_like(xs)
    for idx, xv in enumerate(xs):
        h = 1e-3 * (b0 - a0)
        h = min(h, 0.45 * (xv - a0), 0.45 * (b0 - xv))
        table = [[_central(f, xv, order, h / 2**i)] for i in range(levels)]
        for i in range(1, levels):
            for j in range(1, i + 1):
                prev, cur = table[i - 1][j - 1], table[i][j - 1]
                table[i].append(cur + (cur - prev) / (4**j - 1))
        best, second = table[-1][-1], table[-1][-2]
        scale = max(1.0, abs(best), abs(float(f(xv))))
        if not math.isfinite(best) or abs(best - second) > rtol * scale:
            raise PrecisionError(f"finite differences of order {order} did not converge at x={xv}")
        out[idx] = best
    return out if np.ndim(x) else float(out[0])


# ---------------------------------------------------------------------------
# operations


def density(spec: EnsembleSpec, x: float) -> float:
    if not spec.inside(x):
        raise DomainError(f"x={x} outside the open support {spec.support}")
    return float(spec.density_fn(float(x)))


def mu_mass(spec: EnsembleSpec, x0: float) -> float:
    """Equilibrium mass of ``[x0, b0]``."""
    if not spec.inside(x0):
        raise DomainError(f"x0={x0} outside the open support {spec.support}")
    b0 = spec.support[1]
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    if spec.kind is Kind.GUE:
        val, _ = integrate.quad(lambda t: math.sqrt(2.0 + t) / TWO_PI, x0, b0,
                                weight="alg", wvar=(0.0, 0.5), **opts)
    elif spec.kind is Kind.LUE:
        val, _ = integrate.quad(lambda t: 1.0 / (TWO_PI * math.sqrt(t)), x0, b0,
                                weight="alg", wvar=(0.0, 0.5), **opts)
    elif spec.kind is Kind.JUE:
        val, _ = integrate.quad(lambda t: 1.0 / (math.pi * math.sqrt(t)), x0, b0,
                                weight="alg", wvar=(0.0, -0.5), **opts)
    else:
        val, _ = integrate.quad(lambda t: float(spec.density_fn(t)), x0, b0, **opts)
    return val


def c0_constant() -> float:
    return _C0


def _log_glaisher(N: int = 16, terms: int = 8) -> float:
    # Euler-Maclaurin on sum k log k; f^(m)(N) = (-1)^m (m-2)! / N^(m-1)
    B = bernoulli(2 * terms)
    s = math.fsum(k * math.log(k) for k in range(2, N + 1))
    tail = math.fsum(
        B[2 * j] / math.factorial(2 * j) * -math.factorial(2 * j - 3) / N ** (2 * j - 2)
        for j in range(2, terms)
    )
    return s - ((N * N / 2 + N / 2 + 1 / 12) * math.log(N) - N * N / 4) - tail


LOG_GLAISHER = _log_glaisher()
ZETA_PRIME_MINUS_ONE = 1.0 / 12.0 - LOG_GLAISHER
_C0 = math.log(2.0) / 12.0 + 3.0 * ZETA_PRIME_MINUS_ONE


# ---------------------------------------------------------------------------
# interval unions


@dataclass(frozen=True)
class IntervalUnion:
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise ValueError("interval union must be nonempty")
        for (a, b) in ivs:
            if not a < b:
                raise ValueError(f"degenerate interval [{a}, {b}]")
        for (_, b), (a, _) in zip(ivs, ivs[1:]):
            if not b < a:
                raise ValueError("intervals must be disjoint and increasing")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def single(cls, a: float, b: float) -> "IntervalUnion":
        return cls(((a, b),))

    @classmethod
    def parse(cls, text: str) -> "IntervalUnion":
        """Parse ``lo:hi[,lo:hi...]``."""
        pairs = []
        for chunk in text.split(","):
            lo, sep, hi = chunk.strip().partition(":")
            if not sep:
                raise ValueError(f"bad interval {chunk!r}, expected lo:hi")
            pairs.append((float(lo), float(hi)))
        return cls(tuple(pairs))

    def __str__(self):
        return ",".join(f"{a:g}:{b:g}" for a, b in self.intervals)

    @property
    def endpoints(self) -> list[float]:
        return [e for iv in self.intervals for e in iv]

    @property
    def length(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def contains(self, x):
        """Closed membership, vectorized."""
        x = np.asarray(x, dtype=float)
        hit = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            hit |= (x >= a) & (x <= b)
        return hit

    def component(self, x):
        """Index of the closed component containing x, or -1."""
        x = np.asarray(x, dtype=float)
        comp = np.full(x.shape, -1, dtype=int)
        for j, (a, b) in enumerate(self.intervals):
            comp[(x >= a) & (x <= b)] = j
        return comp

    def interior_contains(self, x) -> bool:
        return any(a < x < b for a, b in self.intervals)

    def validate_for(self, spec: EnsembleSpec) -> None:
        a0, b0 = spec.support
        if not (a0 < self.intervals[0][0] and self.intervals[-1][1] < b0):
            raise DomainError(f"interval union {self} is not inside the bulk {spec.support}")


# ---------------------------------------------------------------------------
# minimizers and constants


@dataclass(frozen=True)
class MinimizerReport:
    rho_I: float
    q: int
    A: tuple[float, ...]
    B: tuple[float, ...]
    d: dict
    q_u: dict = field(default_factory=dict)
    M_I: Optional[float] = None
    S_I: Optional[float] = None
    c_VI: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "rho_I": self.rho_I,
            "q": self.q,
            "A": list(self.A),
            "B": list(self.B),
            "d": {repr(u): v for u, v in self.d.items()},
            "M_I": self.M_I,
            "S_I": self.S_I,
            "c_VI": self.c_VI,
        }


def _critical_points(spec: EnsembleSpec, a: float, b: float) -> list[float]:
    grid = np.linspace(a, b, GRID_POINTS)
    dv = np.asarray(spec.derivative(1, grid), dtype=float)
    if dv.shape != grid.shape:
        dv = np.array([float(spec.derivative(1, g)) for g in grid])

    def d1(t):
        return float(spec.derivative(1, t))

    roots = []
    for i in range(GRID_POINTS - 1):
        lo, hi = dv[i], dv[i + 1]
        if lo == 0.0:
            if 0 < i:
                roots.append(grid[i])
            continue
        if lo * hi < 0:
            roots.append(optimize.brentq(d1, grid[i], grid[i + 1], xtol=1e-15))
    return roots


def classify_minimizers(spec: EnsembleSpec, I: IntervalUnion) -> MinimizerReport:
    """Global minimizers of the density on the closure of ``I``.

    Candidates are the interval endpoints and the interior critical points
    (sign changes of the first derivative on a 10^4-point grid, refined by
    Brent's method). Each minimizer gets the lowest order ``q_u <= 4`` whose
    derivative is non-negligible.
    """
    I.validate_for(spec)
    candidates: list[tuple[float, bool]] = []
    for a, b in I.intervals:
        candidates += [(a, True), (b, True)]
        for r in _critical_points(spec, a, b):
            if min(r - a, b - r) > 1e-12 * max(1.0, abs(r)):
                candidates.append((r, False))
    values = [float(spec.density_fn(u)) for u, _ in candidates]
    rho_I = min(values)
    mins = [(u, bnd) for (u, bnd), v in zip(candidates, values)
            if abs(v - rho_I) <= TIE_RTOL * rho_I]

    tol = ORDER_TOL * max(1.0, rho_I)
    q_u, d = {}, {}
    for u, _ in mins:
        for j in range(1, MAX_ORDER + 1):
            dj = float(spec.derivative(j, u))
            if abs(dj) > tol:
                q_u[u] = j
                d[u] = abs(dj) / math.factorial(j)
                break
        else:
            raise UnsupportedDegeneracyError(f"density is flat to order {MAX_ORDER} at u={u}")
    q = max(q_u.values())
    A = tuple(sorted(u for u, bnd in mins if bnd and q_u[u] == q))
    B = tuple(sorted(u for u, bnd in mins if not bnd and q_u[u] == q))
    return MinimizerReport(rho_I=rho_I, q=q, A=A, B=B,
                           d={u: d[u] for u in A + B}, q_u=q_u)


def minimizer_weight(report: MinimizerReport) -> float:
    """Sum over A of d_u^(-1/q) plus twice the sum over B."""
    q = report.q
    return (math.fsum(report.d[u] ** (-1.0 / q) for u in report.A)
            + 2.0 * math.fsum(report.d[u] ** (-1.0 / q) for u in report.B))


def constants(report: MinimizerReport) -> MinimizerReport:
    q = report.q
    rho = report.rho_I
    weight = minimizer_weight(report)
    gq = float(gamma(1.0 / q)) / q
    M_I = weight * rho ** (1.0 / q) * gq
    S_I = TWO_PI * rho
    c_VI = _C0 + math.log(math.pi / 2.0 * gq * weight * rho ** (1.0 + 1.0 / q))
    return replace(report, M_I=M_I, S_I=S_I, c_VI=c_VI)


def report_for(spec: EnsembleSpec, I: IntervalUnion) -> MinimizerReport:
    return constants(classify_minimizers(spec, I))
