"""Finite-n correlation kernels from weighted orthonormal polynomials.

phi_j(x) = p_{j,n}(x) exp(-n V(x) / 2) with p_{j,n} orthonormal for e^{-nV}:

* GUE: phi_j(x) = (n/2)^{1/4} psi_j(x sqrt(n/2)), psi_j the Hermite functions;
* LUE: phi_j(x) = sqrt(n) (-1)^j L_j(n x) e^{-n x / 2};
* JUE: phi_j(x) = sqrt(2j + 1) P_j(2x - 1).

The recurrences run on the weighted functions. A shared log-scale is carried
separately and mantissas are rebalanced whenever they leave [1e-150, 1e150].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import EnsembleSpec, Kind, get_ensemble, mu_mass

_BIG = 1e150
_SMALL = 1e-150


@dataclass(frozen=True)
class WeightedOPBasis:
    kind: Kind
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        if self.kind is Kind.CUSTOM:
            raise ValueError("kernels are only available for GUE, LUE and JUE")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def spec(self) -> EnsembleSpec:
        return get_ensemble(self.kind)

    def table(self, x, jmax: int | None = None) -> np.ndarray:
        """Array of phi_j(x) for j = 0..jmax (default n - 1), shape (jmax + 1, len(x))."""
        jmax = self.n - 1 if jmax is None else jmax
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.kind is Kind.GUE:
            return _hermite_table(self.n, x, jmax)
        if self.kind is Kind.LUE:
            if np.any(x < 0):
                raise ValueError("LUE weight lives on x >= 0")
            return _laguerre_table(self.n, x, jmax)
        if np.any((x < 0) | (x > 1)):
            raise ValueError("JUE weight lives on [0, 1]")
        return _legendre_table(x, jmax)


def _scaled_three_term(first, second, step, jmax, log0):
    # Generic driver: rows[j] = mant[j] * exp(logs); step(j, m_j, m_{j-1}) -> m_{j+1}
    out = np.empty((jmax + 1, first.size))
    logs = log0.copy()
    prev = np.zeros_like(first)
    cur = first.copy()
    out[0] = cur * np.exp(logs)
    if jmax >= 1:
        prev, cur = cur, second.copy()
        out[1] = cur * np.exp(logs)
    for j in range(1, jmax):
        prev, cur = cur, step(j, cur, prev)
        big = np.abs(cur) > _BIG
        small = (np.abs(cur) < _SMALL) & (np.abs(prev) < _SMALL) & (cur != 0)
        rescale = big | small
        if np.any(rescale):
            f = np.where(rescale, np.maximum(np.abs(cur), np.abs(prev)), 1.0)
            cur = cur / f
            prev = prev / f
            logs = logs + np.log(f)
        out[j + 1] = cur * np.exp(logs)
    return out


def _hermite_table(n, x, jmax):
    t = x * math.sqrt(n / 2.0)
    c = (n / 2.0) ** 0.25 * math.pi ** -0.25
    first = np.full_like(t, c)
    second = math.sqrt(2.0) * t * c

    def step(j, cur, prev):
        return math.sqrt(2.0 / (j + 1)) * t * cur - math.sqrt(j / (j + 1.0)) * prev

    return _scaled_three_term(first, second, step, jmax, -t * t / 2.0)


def _laguerre_table(n, x, jmax):
    t = n * x
    c = math.sqrt(n)
    first = np.full_like(t, c)
    second = (1.0 - t) * c

    def step(j, cur, prev):
        return ((2 * j + 1 - t) * cur - j * prev) / (j + 1.0)

    out = _scaled_three_term(first, second, step, jmax, -t / 2.0)
    out[1::2] *= -1.0
    return out


def _legendre_table(x, jmax):
    s = 2.0 * x - 1.0
    out = np.empty((jmax + 1, x.size))
    p_prev, p = np.zeros_like(s), np.ones_like(s)
    out[0] = p
    for j in range(jmax):
        p_prev, p = p, ((2 * j + 1) * s * p - j * p_prev) / (j + 1.0)
        out[j + 1] = p
    return out * np.sqrt(2.0 * np.arange(jmax + 1) + 1.0)[:, None]


def weighted_op(basis: WeightedOPBasis, j: int, x):
    if not 0 <= j <= basis.n:
        raise IndexError(f"index j={j} outside 0..{basis.n}")
    return basis.table(x, j)[j][()] if np.ndim(x) else float(basis.table(x, j)[j][0])


def kernel_matrix(basis: WeightedOPBasis, xs, ys=None) -> np.ndarray:
    """K_n(xs[i], ys[k]) as a matrix."""
    px = basis.table(xs)
    py = px if ys is None else basis.table(ys)
    return px.T @ py


def cd_kernel(basis: WeightedOPBasis, x: float, y: float) -> float:
    p = basis.table([x, y])
    return float(math.fsum(p[:, 0] * p[:, 1]))


def _sinc(z):
    return np.sinc(z)   # sin(pi z) / (pi z)


def rescaled_kernel(basis: WeightedOPBasis, x0: float, xi, eta):
    """(1/(n rho(x0))) K_n(x0 + xi/(n rho(x0)), x0 + eta/(n rho(x0))), vectorized in xi, eta."""
    spec = basis.spec
    rho = float(spec.density_fn(x0))
    scale = basis.n * rho
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xb, eb = np.broadcast_arrays(xi, eta)
    px = basis.table(x0 + xb.ravel() / scale)
    py = basis.table(x0 + eb.ravel() / scale)
    return (np.einsum("ji,ji->i", px, py) / scale).reshape(xb.shape)[()]


def first_order_correction(spec: EnsembleSpec, n: int, x0: float, xi, eta):
    """The explicit 1/n term of the one-cut bulk expansion (already divided by n)."""
    a0, b0 = spec.support
    rho = float(spec.density_fn(x0))
    drho = float(spec.derivative(1, x0))
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    # 2 pi n mu([x0, b0]) reduced mod 2 pi before use
    frac = math.fmod(n * mu_mass(spec, x0), 1.0)
    phase = 2.0 * math.pi * frac
    drift = drho / (2.0 * rho * rho) * (xi + eta) * np.cos(math.pi * (xi - eta))
    osc = (b0 - a0) / (4.0 * math.pi * rho * (b0 - x0) * (x0 - a0)) * np.cos(phase - math.pi * (xi + eta))
    return ((drift - osc) / n)[()]


def sine_residual(basis: WeightedOPBasis, x0: float, xi, eta):
    """Return (leading_residual, second_order_residual) at (xi, eta)."""
    khat = rescaled_kernel(basis, x0, xi, eta)
    xi_a = np.asarray(xi, dtype=float)
    eta_a = np.asarray(eta, dtype=float)
    lead = khat - _sinc(xi_a - eta_a)
    second = lead - first_order_correction(basis.spec, basis.n, x0, xi_a, eta_a)
    return lead[()] if np.ndim(lead) else float(lead), second[()] if np.ndim(second) else float(second)


def residual_sup(basis: WeightedOPBasis, x0: float, half_width: float = 2.0, points: int = 41):
    """Sup-norm of both residuals over a (xi, eta) grid on [-w, w]^2."""
    g = np.linspace(-half_width, half_width, points)
    xi, eta = np.meshgrid(g, g, indexing="ij")
    lead, second = sine_residual(basis, x0, xi, eta)
    return float(np.max(np.abs(lead))), float(np.max(np.abs(second)))
