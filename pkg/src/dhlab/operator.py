"""Truncated Hankel operators induced by a radial measure.

The unit scheme gives the generalized Hilbert matrix ``(mu_{n+k})`` and the
derivative scheme the matrix ``((n+1) mu_{n+k})``.  Products are formed by a
circular convolution of the moment sequence with the reversed input, so a
matrix of order N costs O(N log N) per application.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import measure as _measure
from .analytic import PowerSeries
from .measure import RadialMeasure
from .quadrature import QuadratureError

__all__ = [
    "SCHEMES",
    "PLATEAU_RATIO",
    "GROWTH_RATIO",
    "InsufficientMomentsError",
    "ConvergenceWarning",
    "WeightedHankelMatrix",
    "NormProfile",
    "build",
    "apply",
    "apply_integral",
    "dh_series",
    "representation_gap",
    "spectral_norm",
    "norm_profile",
    "tail_block_norm",
]

SCHEMES = ("unit", "derivative")

# empirical per-doubling thresholds for the growth verdict
PLATEAU_RATIO = 1.02
GROWTH_RATIO = 1.05


class InsufficientMomentsError(ValueError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


def _weights(scheme: str, N: int) -> np.ndarray:
    if scheme == "unit":
        return np.ones(N)
    if scheme == "derivative":
        return np.arange(1.0, N + 1.0)
    raise ValueError(f"unknown weight scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass(frozen=True, eq=False)
class WeightedHankelMatrix:
    """Entries ``w_n * mu_{n+k}`` for ``0 <= n, k < N``."""

    moments: np.ndarray
    N: int
    scheme: str = "unit"
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mu = np.asarray(getattr(self.moments, "values", self.moments), dtype=float)
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if mu.size < 2 * self.N - 1:
            raise InsufficientMomentsError(
                f"order {self.N} needs {2 * self.N - 1} moments, got {mu.size}"
            )
        object.__setattr__(self, "moments", mu[: 2 * self.N - 1].copy())
        object.__setattr__(self, "weights", _weights(self.scheme, self.N))

    def entry(self, n: int, k: int) -> float:
        return float(self.weights[n] * self.moments[n + k])

    def dense(self) -> np.ndarray:
        idx = np.add.outer(np.arange(self.N), np.arange(self.N))
        return self.weights[:, None] * self.moments[idx]

    @cached_property
    def _fft_len(self) -> int:
        return 1 << int(math.ceil(math.log2(3 * self.N)))

    @cached_property
    def _moment_fft(self) -> np.ndarray:
        return np.fft.fft(self.moments, self._fft_len)

    def _correlate(self, a: np.ndarray) -> np.ndarray:
        # sum_k mu_{n+k} a_k is entry n + N - 1 of mu convolved with reversed a
        L, N = self._fft_len, self.N
        conv = np.fft.ifft(self._moment_fft * np.fft.fft(a[::-1], L))
        return conv[N - 1 : 2 * N - 1]

    def matvec(self, a, method: str = "fast") -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.N,):
            raise ValueError(f"input must have length {self.N}")
        if method == "fast":
            out = self._correlate(a.astype(complex))
            if not np.iscomplexobj(a):
                out = out.real
            return self.weights * out
        if method == "naive":
            out = np.empty(self.N, dtype=np.result_type(a, float))
            for n in range(self.N):
                out[n] = self.moments[n : n + self.N] @ a
            return self.weights * out
        raise ValueError(f"unknown apply method {method!r}")

    def rmatvec(self, y) -> np.ndarray:
        """Adjoint product; the Hankel part is real symmetric."""
        y = np.asarray(y)
        out = self._correlate((self.weights * y).astype(complex))
        return out if np.iscomplexobj(y) else out.real


def build(moments, N: int, scheme: str = "unit") -> WeightedHankelMatrix:
    return WeightedHankelMatrix(moments, N, scheme)


def apply(matrix: WeightedHankelMatrix, a, method: str = "fast") -> np.ndarray:
    """``b_n = w_n sum_k mu_{n+k} a_k`` by FFT (``"fast"``) or row sums (``"naive"``)."""
    return matrix.matvec(a, method)


# ---------------------------------------------------------------------------
# integral form and the series/integral identity


def _evaluator(f):
    return f if callable(f) else PowerSeries(f)


def apply_integral(m: RadialMeasure, f, z, alpha: int = 2):
    """``int f(t) / (1 - t z)**alpha dmu(t)``, vectorized over ``z``.

    ``f`` may be a :class:`PowerSeries` or any vectorized callable that stays
    finite on [0, 1] (t rounds to 1 deep in the tail).  A
    non-integrable integrand gives ``complex(inf, nan)`` entries.
    """
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ValueError("need |z| < 1")
    f = _evaluator(f)
    zf = z.ravel()

    def integrand(t, s):
        return f(t)[None, :] / (1.0 - np.outer(zf, t)) ** alpha

    try:
        out = _measure.integrate(m, integrand)
    except QuadratureError:
        return np.full(z.shape, complex(math.inf, math.nan))
    out = np.broadcast_to(np.asarray(out, dtype=complex), zf.shape)
    return out.reshape(z.shape)


def dh_series(m_or_moments, f: PowerSeries, N: int, scheme: str = "derivative") -> PowerSeries:
    """Coefficients ``w_n sum_{k<N} mu_{n+k} a_k`` for ``n < N``."""
    if isinstance(m_or_moments, RadialMeasure):
        mu = _measure.moments(m_or_moments, 2 * N - 1)
    else:
        mu = m_or_moments
    a = np.zeros(N, dtype=complex)
    c = f.coeffs[:N]
    a[: c.size] = c
    return PowerSeries(build(mu, N, scheme).matvec(a))


def representation_gap(m: RadialMeasure, f: PowerSeries, z_grid, N: int) -> float:
    """``max_z |DH_mu(f)(z) - I_mu2(f)(z)|`` with the series truncated at order N."""
    z_grid = np.asarray(z_grid, dtype=complex)
    series = dh_series(m, f, N)(z_grid)
    integral = apply_integral(m, f, z_grid, 2)
    return float(np.max(np.abs(series - integral)))


# ---------------------------------------------------------------------------
# spectral diagnostics


def spectral_norm(matrix: WeightedHankelMatrix, tol: float = 1e-8, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on ``A^T A``.

    Starts from the all-ones vector, which cannot be orthogonal to the Perron
    vector of a nonnegative matrix.  The Rayleigh quotient is nondecreasing,
    so every iterate is a lower bound; iteration stops once it changes by
    less than ``tol`` relative.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    N = matrix.N
    x = np.full(N, 1.0 / math.sqrt(N))
    rng = None
    lam = 0.0
    for _ in range(max_iter):
        y = matrix.rmatvec(matrix.matvec(x))
        new = float(x @ y)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            if not np.any(matrix.moments):
                return 0.0
            # stagnation on a null vector: restart at random
            rng = rng or np.random.default_rng(seed)
            x = rng.standard_normal(N)
            x /= np.linalg.norm(x)
            continue
        x = y / ny
        if abs(new - lam) <= tol * new:
            return math.sqrt(new)
        lam = new
    warnings.warn(
        f"power iteration did not converge in {max_iter} steps; returning last iterate",
        ConvergenceWarning,
        stacklevel=2,
    )
    return math.sqrt(lam)


@dataclass(frozen=True)
class NormProfile:
    orders: list
    norms: list
    growth_verdict: str
    ratios: list


def growth_verdict(norms) -> str:
    """``plateau`` if the last doubling grew < 2 %, ``growing`` if each of the
    last three grew > 5 %, ``inconclusive`` otherwise."""
    ratios = [b / a for a, b in zip(norms, norms[1:]) if a > 0]
    if not ratios:
        return "inconclusive"
    if ratios[-1] < PLATEAU_RATIO:
        return "plateau"
    if len(ratios) >= 3 and all(r > GROWTH_RATIO for r in ratios[-3:]):
        return "growing"
    return "inconclusive"


def norm_profile(m: RadialMeasure, scheme: str = "derivative", orders=None, tol: float = 1e-8) -> NormProfile:
    orders = list(orders or [64 << i for i in range(7)])
    if any(b <= a for a, b in zip(orders, orders[1:])):
        raise ValueError("orders must be increasing")
    mu = _measure.moments(m, 2 * orders[-1] - 1)
    norms = [spectral_norm(build(mu, N, scheme), tol) for N in orders]
    ratios = [b / a if a > 0 else math.nan for a, b in zip(norms, norms[1:])]
    return NormProfile(orders, norms, growth_verdict(norms), ratios)


def tail_block_norm(m: RadialMeasure, scheme: str, N: int, r_list, tol: float = 1e-8) -> list:
    """Spectral norms of the order-N matrices of ``mu`` restricted to ``(r, 1)``."""
    out = []
    for r in r_list:
        if not 0.0 < r < 1.0:
            raise ValueError("r values must lie in (0, 1)")
        tail = _measure.restrict_tail(m, r)
        mu = _measure.moments(tail, 2 * N - 1)
        out.append((float(r), spectral_norm(build(mu, N, scheme), tol)))
    return out
