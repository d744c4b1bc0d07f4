"""Truncated power series on the unit disc and the norms used on them.

Integral means ``M_p(r, f)`` are taken by trapezoidal sampling of the circle
``|z| = r``; for a polynomial the samples come from one FFT of the scaled
coefficients ``a_k r**k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "PowerSeries",
    "NormEstimate",
    "monomial",
    "geometric",
    "circle_samples",
    "circle_mean",
    "circle_mean_parseval",
    "hardy_norm",
    "bq_norm",
    "bloch_norm",
    "bmoa_profile",
    "bmoa_seminorm",
    "binomial_kernel_coeffs",
    "test_function_f",
    "test_function_g",
    "default_radii",
]

TAIL_TOL = 1e-12
DEFAULT_SAMPLES = 4096
_MAX_SAMPLES = 1 << 22
_MEAN_TOL = 1e-9
_MAX_TERMS = 2_000_000


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """``f(z) = sum_{k<=M} a_k z**k`` with complex coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def truncation_order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __call__(self, z):
        """Horner evaluation, vectorized over ``z``."""
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            out = out * z + c
        return out

    def derivative(self) -> "PowerSeries":
        c = self.coeffs
        if c.size == 1:
            return PowerSeries([0.0])
        return PowerSeries(c[1:] * np.arange(1, c.size))

    def __add__(self, other):
        if isinstance(other, PowerSeries):
            n = max(len(self), len(other))
            out = np.zeros(n, dtype=complex)
            out[: len(self)] += self.coeffs
            out[: len(other)] += other.coeffs
            return PowerSeries(out)
        out = self.coeffs.copy()
        out[0] += other
        return PowerSeries(out)

    __radd__ = __add__

    def __mul__(self, scalar):
        return PowerSeries(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return PowerSeries(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, PowerSeries) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None


def monomial(k: int, c: complex = 1.0) -> PowerSeries:
    out = np.zeros(k + 1, dtype=complex)
    out[k] = c
    return PowerSeries(out)


def geometric(a: complex, M: int, scale: complex = 1.0) -> PowerSeries:
    """Coefficients ``scale * a**k`` for ``k = 0..M``."""
    return PowerSeries(scale * np.asarray(a, dtype=complex) ** np.arange(M + 1))


# ---------------------------------------------------------------------------
# circle sampling


def circle_samples(f: PowerSeries, r: float, K: int) -> np.ndarray:
    """``f(r e^{i theta_j})`` at ``theta_j = 2 pi j / K`` (exact aliasing fold)."""
    b = f.coeffs * r ** np.arange(f.coeffs.size)
    pad = -b.size % K
    folded = np.concatenate([b, np.zeros(pad, dtype=complex)]).reshape(-1, K).sum(axis=0)
    return K * np.fft.ifft(folded)


def _check_samples(K):
    if K < 256 or K & (K - 1):
        raise ValueError("sample count must be a power of two >= 256")


def _mean_p(vals, p):
    return float(np.mean(np.abs(vals) ** p) ** (1.0 / p))


def circle_mean(f: PowerSeries, p: float, r: float, samples: int = DEFAULT_SAMPLES) -> float:
    """``M_p(r, f)``, doubling the sample count until two estimates agree to 1e-9."""
    if p <= 0:
        raise ValueError("p must be positive")
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    _check_samples(samples)
    K = samples
    prev = _mean_p(circle_samples(f, r, K), p)
    while K < _MAX_SAMPLES:
        K *= 2
        cur = _mean_p(circle_samples(f, r, K), p)
        if abs(cur - prev) <= _MEAN_TOL * max(1.0, cur):
            return cur
        prev = cur
    return prev


def circle_mean_parseval(f: PowerSeries, r: float) -> float:
    """``M_2(r, f)`` from the coefficients."""
    k = np.arange(f.coeffs.size)
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * r ** (2 * k))))


def default_radii(jmax: int = 12) -> np.ndarray:
    return 1.0 - 2.0 ** -np.arange(1, jmax + 1, dtype=float)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    p_or_q: float
    r_grid: np.ndarray
    monotone_ok: bool
    means: np.ndarray


def hardy_norm(f: PowerSeries, p: float, r_grid=None, samples: int = DEFAULT_SAMPLES) -> NormEstimate:
    """``||f||_{H^p}`` read off at the largest radius of ``r_grid``.

    A truncated series is continuous on the closed disc, so the mean at
    ``r = 1 - 2**-12`` is already within sampling error of the supremum.
    """
    r_grid = default_radii() if r_grid is None else np.sort(np.asarray(r_grid, dtype=float))
    means = np.array([circle_mean(f, p, r, samples) for r in r_grid])
    ok = bool(np.all(np.diff(means) >= -1e-9))
    return NormEstimate(float(means[-1]), p, r_grid, ok, means)


def bq_norm(f: PowerSeries, q: float, nodes: int = 32) -> float:
    """``int_0^1 (1-r)**(1/q - 2) M_1(r, f) dr`` by Gauss-Jacobi in ``r``.

    The node count doubles until two rules agree to 1e-10 relative.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    gamma = 1.0 / q - 2.0

    def rule(n):
        x, w = special.roots_jacobi(n, gamma, 0.0)
        r = 0.5 * (x + 1.0)
        m1 = np.array([circle_mean(f, 1.0, ri) for ri in r])
        return 2.0 ** (-gamma - 1.0) * float(w @ m1)

    prev = rule(nodes)
    while nodes < 1024:
        nodes *= 2
        cur = rule(nodes)
        if abs(cur - prev) <= 1e-10 * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


def bloch_norm(f: PowerSeries, radii=None, angles: int = 64) -> float:
    """``|f(0)| + sup (1-|z|^2) |f'(z)|`` over a radius/angle grid.

    The default radii are 513 equispaced points in ``[0, 1 - 2**-12]``
    together with ``1 - 2**-j``, ``j = 1..12``.
    """
    if radii is None:
        radii = np.union1d(np.linspace(0.0, 1.0 - 2.0**-12, 513), default_radii())
    radii = np.asarray(radii, dtype=float)
    df = f.derivative()
    K = max(angles, 1 << int(math.ceil(math.log2(max(4 * len(df), 2)))))
    best = 0.0
    for r in radii:
        vals = np.abs(circle_samples(df, r, K))
        best = max(best, (1.0 - r * r) * float(vals.max()))
    return abs(f.coeffs[0]) + best


def _moebius(a, z):
    return (a - z) / (1.0 - np.conj(a) * z)


def bmoa_profile(f: PowerSeries, a_grid, rho: float = 1.0 - 2.0**-10, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """``||f o phi_a - f(a)||_{H^2}`` for each ``a``, sampled on ``|z| = rho``."""
    out = []
    for a in a_grid:
        if not 0.0 <= a < 1.0:
            raise ValueError("a_grid must lie in [0, 1)")
        fa = f(a)

        def norm_at(K):
            z = rho * np.exp(2j * np.pi * np.arange(K) / K)
            return float(np.sqrt(np.mean(np.abs(f(_moebius(a, z)) - fa) ** 2)))

        K = samples
        cur = norm_at(K)
        while K < (1 << 20):
            K *= 2
            prev, cur = cur, norm_at(K)
            if abs(cur - prev) <= _MEAN_TOL * max(1.0, cur):
                break
        out.append(cur)
    return np.array(out)


def bmoa_seminorm(f: PowerSeries, a_grid, rho: float = 1.0 - 2.0**-10, samples: int = DEFAULT_SAMPLES) -> float:
    """Radial probe of ``sup_a ||f o phi_a - f(a)||_{H^2}`` (real ``a`` only)."""
    return float(np.max(bmoa_profile(f, a_grid, rho, samples)))


# ---------------------------------------------------------------------------
# kernel test families


def binomial_kernel_coeffs(gamma: float, a: float, M: int | None = None) -> np.ndarray:
    """Taylor coefficients of ``(1 - a z)**-gamma``.

    Uses ``c_{k+1} = c_k (k + gamma) / (k + 1) * a``.  Without ``M`` the
    series is extended until the dropped tail is below 1e-12.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError("a must lie in [0, 1)")
    if M is not None:
        k = np.arange(M)
        ratios = (k + gamma) / (k + 1.0) * a
        return np.concatenate([[1.0], np.cumprod(ratios)])
    out = [1.0]
    c = 1.0
    k = 0
    while True:
        rho = (k + gamma) / (k + 1.0) * a
        # ratios decrease toward a when gamma >= 1 and increase toward a otherwise
        bound = rho if gamma >= 1.0 else a
        if bound < 1.0 and c * bound / (1.0 - bound) < TAIL_TOL:
            return np.array(out)
        c *= rho
        k += 1
        out.append(c)
        if k > _MAX_TERMS:
            raise ValueError("series does not reach the tail tolerance")


def _check_order(a, M):
    if M is not None and a**M >= TAIL_TOL:
        raise ValueError(f"truncation M={M} too short: a**M >= {TAIL_TOL}")


def test_function_f(p: float, a: float, M: int | None = None) -> PowerSeries:
    """``((1 - a^2) / (1 - a z)^2)**(1/p)``, unit norm in ``H^p``."""
    if p <= 0:
        raise ValueError("p must be positive")
    _check_order(a, M)
    return PowerSeries((1.0 - a * a) ** (1.0 / p) * binomial_kernel_coeffs(2.0 / p, a, M))


def _log_coeffs(a, M):
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    if M is None:
        if a == 1.0:
            raise ValueError("a = 1 needs an explicit truncation order M")
        M = 1
        while a ** (M + 1) / ((M + 1) * (1.0 - a)) >= TAIL_TOL:
            M += 1
            if M > _MAX_TERMS:
                raise ValueError("series does not reach the tail tolerance")
    k = np.arange(1, M + 1)
    return np.concatenate([[1.0], a**k / k])


def test_function_g(kind: str, a: float, param: float | None = None, M: int | None = None) -> PowerSeries:
    """Dual-side test functions.

    ``kind`` is ``"log"`` for ``log(e/(1 - a z))``, ``"cauchy"`` for
    ``(1 - a^2)/(1 - a z)``, or ``"power"`` for
    ``((1 - a^2)/(1 - a z)^2)**(1/param)`` with ``param = q'``.
    """
    if kind == "log":
        if M is None and a == 0:
            return PowerSeries([1.0])
        return PowerSeries(_log_coeffs(a, M))
    if kind == "cauchy":
        _check_order(a, M)
        if M is None:
            M = 0
            while (1.0 + a) * a ** (M + 1) >= TAIL_TOL:
                M += 1
        return PowerSeries((1.0 - a * a) * a ** np.arange(M + 1))
    if kind == "power":
        if param is None or param <= 0:
            raise ValueError("power kind needs a positive exponent parameter q'")
        return test_function_f(param, a, M)
    raise ValueError(f"unknown g family {kind!r}")
