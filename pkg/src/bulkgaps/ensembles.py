"""Exact eigenvalue samplers for the beta=2 Hermite, Laguerre and Jacobi ensembles.

Scaling conventions (weights e^{-nV}):

* GUE: the Hermite tridiagonal model has joint density ~ Delta^2 exp(-sum l^2/2);
  dividing by sqrt(n) turns the weight into exp(-n sum l^2/2).
* LUE: B B^T for the complex-Wishart bidiagonal model (m = n) has density
  ~ Delta^2 exp(-sum l); dividing by n gives exp(-n sum l).
* JUE: the Killip-Nenciu model on [-2, 2] with a = b = 0 is flat; x = (l + 2)/4
  maps it to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg

from .equilibrium import Kind
from .errors import NumericalError, SizeError

DENSE_MAX_N = 64


@dataclass(frozen=True)
class SpectrumSample:
    n: int
    eigenvalues: np.ndarray
    ensemble: Kind
    seed: int
    replica_index: int


@dataclass(frozen=True)
class TridiagonalMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=float)
        e = np.ascontiguousarray(self.offdiag, dtype=float)
        if d.ndim != 1 or d.size < 1 or e.shape != (d.size - 1,):
            raise ValueError("need n >= 1 diagonal and n-1 off-diagonal entries")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def replica_rng(seed: int, replica_index: int) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, replica_index)``.

    Philox is a counter-based generator; the spawn key makes each replica an
    independent, order-free stream.
    """
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(replica_index),))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# implicit QL with Wilkinson shifts


@numba.njit(cache=True)
def _tql1(d, e, max_iter):
    # d: diagonal (overwritten with eigenvalues); e: off-diagonal padded to length n
    n = d.size
    eps = 2.220446049250313e-16
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                return False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.sqrt(f * f + g * g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


def eigvals_sym_tridiag(m: TridiagonalMatrix) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix, ascending."""
    n = m.diag.size
    d = m.diag.copy()
    e = np.zeros(n)
    e[: n - 1] = m.offdiag
    if not _tql1(d, e, 30 * n):
        raise NumericalError(f"implicit QL did not converge within {30 * n} iterations")
    d.sort()
    return d


# ---------------------------------------------------------------------------
# tridiagonal models


def _chi(rng, dof):
    # chi variate with `dof` degrees of freedom, divided by sqrt(2)
    return np.sqrt(rng.standard_gamma(np.asarray(dof, dtype=float) / 2.0))


def gue_matrix(n: int, rng: np.random.Generator) -> TridiagonalMatrix:
    diag = rng.standard_normal(n)
    off = _chi(rng, 2.0 * np.arange(n - 1, 0, -1))
    return TridiagonalMatrix(diag / math.sqrt(n), off / math.sqrt(n))


def lue_matrix(n: int, rng: np.random.Generator) -> TridiagonalMatrix:
    # lower bidiagonal B: diag_i ~ chi_{2(n-i)}/sqrt2, sub_i ~ chi_{2(n-1-i)}/sqrt2 (0-based)
    bd = _chi(rng, 2.0 * np.arange(n, 0, -1))
    bs = _chi(rng, 2.0 * np.arange(n - 1, 0, -1))
    diag = bd * bd
    diag[1:] += bs * bs
    off = bd[:-1] * bs
    return TridiagonalMatrix(diag / n, off / n)


def jue_matrix(n: int, rng: np.random.Generator) -> TridiagonalMatrix:
    # Killip-Nenciu coefficients alpha_0..alpha_{2n-2} for beta=2, a=b=0.
    # B(s, t) on [-1, 1] has density ~ (1-x)^(s-1) (1+x)^(t-1): x = 2Y - 1, Y ~ Beta(t, s).
    k = np.arange(2 * n - 1)
    s = np.where(k % 2 == 0, (2 * n - k) / 2.0, (2 * n - k + 1) / 2.0)
    t = np.where(k % 2 == 0, (2 * n - k) / 2.0, (2 * n - k - 1) / 2.0)
    alpha = np.empty(2 * n + 1)
    alpha[0] = -1.0                      # alpha_{-1}
    alpha[1:-1] = 2.0 * rng.beta(t, s) - 1.0
    alpha[-1] = -1.0                     # alpha_{2n-1}

    def a(j):
        return alpha[j + 1]

    kk = np.arange(n)
    even = a(2 * kk)
    odd_before = a(2 * kk - 1)
    prev_even = np.where(kk > 0, a(np.maximum(2 * kk - 2, 0)), 0.0)
    diag = (1.0 - odd_before) * even - (1.0 + odd_before) * prev_even
    kk = np.arange(n - 1)
    prod = (1.0 - a(2 * kk - 1)) * (1.0 - a(2 * kk) ** 2) * (1.0 + a(2 * kk + 1))
    off = np.sqrt(np.maximum(prod, 0.0))
    return TridiagonalMatrix((diag + 2.0) / 4.0, off / 4.0)


_BUILDERS = {Kind.GUE: gue_matrix, Kind.LUE: lue_matrix, Kind.JUE: jue_matrix}


def _finish(kind, n, rng, draw, seed, replica_index):
    eig = draw()
    if n > 1 and np.any(np.diff(eig) <= 0.0):
        eig = draw()
        if np.any(np.diff(eig) <= 0.0):
            raise NumericalError("repeated eigenvalue ties after resampling")
    if kind is Kind.LUE:
        eig = np.maximum(eig, 0.0)
    elif kind is Kind.JUE:
        eig = np.clip(eig, 0.0, 1.0)
    return SpectrumSample(n, eig, kind, int(seed), int(replica_index))


def sample(kind, n: int, seed: int, replica_index: int = 0) -> SpectrumSample:
    """Tridiagonal-model sample keyed by ``(seed, replica_index)``."""
    kind = Kind.parse(kind)
    if n < 1:
        raise ValueError("n must be positive")
    rng = replica_rng(seed, replica_index)
    build = _BUILDERS[kind]
    return _finish(kind, n, rng, lambda: eigvals_sym_tridiag(build(n, rng)), seed, replica_index)


def sample_gue(n: int, seed: int, replica_index: int = 0) -> SpectrumSample:
    return sample(Kind.GUE, n, seed, replica_index)


def sample_lue(n: int, seed: int, replica_index: int = 0) -> SpectrumSample:
    return sample(Kind.LUE, n, seed, replica_index)


def sample_jue(n: int, seed: int, replica_index: int = 0) -> SpectrumSample:
    return sample(Kind.JUE, n, seed, replica_index)


# ---------------------------------------------------------------------------
# dense cross-check


def _ginibre(rng, rows, cols):
    # complex Gaussian entries with E|g|^2 = 1
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)


def _hermitian_eigvals(h: np.ndarray) -> np.ndarray:
    # Householder reduction to Hermitian tridiagonal form; a diagonal unitary
    # similarity then makes the off-diagonal real and nonnegative.
    t = scipy.linalg.hessenberg(h)
    diag = np.real(np.diag(t))
    off = np.abs(np.diag(t, -1))
    return eigvals_sym_tridiag(TridiagonalMatrix(diag, off))


def sample_dense(kind, n: int, seed: int, replica_index: int = 0) -> SpectrumSample:
    """Full-matrix sampler used to cross-validate the tridiagonal models."""
    kind = Kind.parse(kind)
    if n > DENSE_MAX_N:
        raise SizeError(f"dense sampler supports n <= {DENSE_MAX_N}")
    rng = replica_rng(seed, replica_index)

    def draw():
        if kind is Kind.GUE:
            g = _ginibre(rng, n, n)
            h = (g + g.conj().T) / math.sqrt(2.0)   # diagonal N(0,1), off-diagonal E|h|^2 = 1
            return _hermitian_eigvals(h) / math.sqrt(n)
        if kind is Kind.LUE:
            g = _ginibre(rng, n, n)
            return _hermitian_eigvals(g @ g.conj().T) / n
        a = _ginibre(rng, n, n)
        b = _ginibre(rng, n, n)
        wa = a.conj().T @ a
        chol = np.linalg.cholesky(wa + b.conj().T @ b)
        x = scipy.linalg.solve_triangular(chol, wa, lower=True)
        c = scipy.linalg.solve_triangular(chol, x.conj().T, lower=True)
        return _hermitian_eigvals((c + c.conj().T) / 2.0)

    return _finish(kind, n, rng, draw, seed, replica_index)
