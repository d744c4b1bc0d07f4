"""Positive radial measures on [0, 1): moments, tails and Carleson tests.

A measure is a finite sum of atoms ``w * delta_t`` and densities

    c * (1 - t)**(beta - 1) * log(e / (1 - t))**lam  dt   on [lower, 1).

Every density integral is evaluated in ``u = -log(1 - t)``, where the
density becomes ``c * exp(-beta*u) * (1 + u)**lam du``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
from scipy import special

from .quadrature import QuadratureError, integrate_halfline

__all__ = [
    "Atom",
    "Density",
    "RadialMeasure",
    "MomentSequence",
    "CarlesonReport",
    "QuadratureError",
    "dyadic_grid",
    "moment",
    "moments",
    "tail_mass",
    "carleson_constant",
    "log_carleson_constant",
    "restrict_tail",
    "singular_integral",
    "embedding_constant",
    "integrate",
]

_CHUNK = 256


@dataclass(frozen=True)
class Atom:
    t: float
    w: float

    def __post_init__(self):
        if not 0.0 <= self.t < 1.0:
            raise ValueError(f"atom position t={self.t} outside [0, 1)")
        if not self.w > 0.0:
            raise ValueError(f"atom weight w={self.w} must be positive")


@dataclass(frozen=True)
class Density:
    c: float
    beta: float
    lam: int = 0
    lower: float = 0.0

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError(f"density coefficient c={self.c} must be positive")
        if not self.beta > 0.0:
            raise ValueError(f"density exponent beta={self.beta} must be positive")
        if int(self.lam) != self.lam or self.lam < 0:
            raise ValueError(f"log order lam={self.lam} must be a nonnegative integer")
        if not 0.0 <= self.lower < 1.0:
            raise ValueError(f"lower cutoff {self.lower} outside [0, 1)")
        object.__setattr__(self, "lam", int(self.lam))

    @property
    def u0(self) -> float:
        return -math.log1p(-self.lower)


@dataclass(frozen=True)
class RadialMeasure:
    atoms: tuple[Atom, ...] = ()
    densities: tuple[Density, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "densities", tuple(self.densities))

    @classmethod
    def atom(cls, t: float, w: float = 1.0) -> "RadialMeasure":
        return cls(atoms=(Atom(t, w),))

    @classmethod
    def density(cls, beta: float, c: float = 1.0, lam: int = 0) -> "RadialMeasure":
        return cls(densities=(Density(c, beta, lam),))

    @classmethod
    def lebesgue(cls) -> "RadialMeasure":
        return cls.density(1.0)

    @classmethod
    def from_dict(cls, spec: dict) -> "RadialMeasure":
        """Build from the ``{"atoms": [...], "densities": [...]}`` file schema.

        Raises ``ValueError`` naming the offending field on malformed input.
        """
        if not isinstance(spec, dict):
            raise ValueError("measure spec must be an object")
        extra = set(spec) - {"atoms", "densities"}
        if extra:
            raise ValueError(f"unknown measure field(s): {sorted(extra)}")
        atoms = []
        for i, a in enumerate(_list(spec, "atoms")):
            where = f"atoms[{i}]"
            t, w = _fields(a, where, ("t", "w"), {})
            atoms.append(_checked(Atom, where, t, w))
        dens = []
        for i, d in enumerate(_list(spec, "densities")):
            where = f"densities[{i}]"
            c, beta, lam = _fields(d, where, ("c", "beta", "lam"), {"lam": 0})
            if lam != int(lam):
                raise ValueError(f"{where}.lam must be an integer")
            dens.append(_checked(Density, where, c, beta, int(lam)))
        return cls(tuple(atoms), tuple(dens))

    def to_dict(self) -> dict:
        if any(d.lower > 0 for d in self.densities):
            raise ValueError("restricted measures have no file representation")
        return {
            "atoms": [{"t": a.t, "w": a.w} for a in self.atoms],
            "densities": [{"c": d.c, "beta": d.beta, "lam": d.lam} for d in self.densities],
        }

    @property
    def is_empty(self) -> bool:
        return not self.atoms and not self.densities

    def describe(self) -> str:
        parts = [f"{a.w:g}*delta({a.t:g})" for a in self.atoms]
        for d in self.densities:
            s = f"{d.c:g}*(1-t)^{d.beta - 1:g}"
            if d.lam:
                s += f"*log(e/(1-t))^{d.lam}"
            if d.lower:
                s += f" on ({d.lower:g},1)"
            parts.append(s)
        return " + ".join(parts) or "0"


def _fields(obj, where, names, defaults):
    if not isinstance(obj, dict):
        raise ValueError(f"{where} must be an object")
    extra = set(obj) - set(names)
    if extra:
        raise ValueError(f"{where}: unknown field(s) {sorted(extra)}")
    out = []
    for name in names:
        if name not in obj:
            if name in defaults:
                out.append(defaults[name])
                continue
            raise ValueError(f"{where}.{name} is missing")
        v = obj[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValueError(f"{where}.{name} must be a number")
        if not math.isfinite(v):
            raise ValueError(f"{where}.{name} must be finite")
        out.append(float(v))
    return out


def _list(spec, key):
    v = spec.get(key, [])
    if not isinstance(v, list):
        raise ValueError(f"{key} must be a list")
    return v


def _checked(kind, where, *args):
    try:
        return kind(*args)
    except ValueError as exc:
        raise ValueError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``mu_0 .. mu_{N-1}`` of a radial measure."""

    values: np.ndarray
    source: str = ""

    def __len__(self):
        return len(self.values)

    def __getitem__(self, item):
        return self.values[item]

    def hankel_block(self, size: int) -> np.ndarray:
        from scipy.linalg import hankel

        if 2 * size - 1 > len(self.values):
            raise ValueError("not enough moments for the requested block")
        v = self.values
        return hankel(v[:size], v[size - 1 : 2 * size - 1])

    def is_monotone(self, slack: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) <= slack * self.values[0]))

    def min_hankel_eigenvalue(self, size: int | None = None) -> float:
        size = size or (len(self.values) + 1) // 2
        return float(np.linalg.eigvalsh(self.hankel_block(size))[0])


@dataclass(frozen=True)
class CarlesonReport:
    s: float
    constant: float
    exponent_estimate: float
    vanishing: str
    log_alpha: float
    grid: np.ndarray
    ratios: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# integration against the measure


def _density_integral(d: Density, func, u0=None, extra_decay=0.0):
    """c * int func(t, s) (1-t)^(beta-1) log^lam(e/(1-t)) dt over [max(u0, d.u0), inf)."""
    start = d.u0 if u0 is None else max(u0, d.u0)

    def h(u):
        s = np.exp(-u)
        return func(-np.expm1(-u), s)

    return d.c * integrate_halfline(h, start, d.beta - extra_decay, d.lam)


def _log_density_mass(d: Density, decay: float, u0: float) -> float:
    """c * int_{u0}^inf e^(-decay u) (1+u)^lam du via the upper incomplete gamma."""
    x = decay * (1.0 + u0)
    q = special.gammaincc(d.lam + 1, x)
    if q == 0.0:
        return 0.0
    log_val = decay + special.gammaln(d.lam + 1) + math.log(q) - (d.lam + 1) * math.log(decay)
    return d.c * math.exp(log_val)


def integrate(m: RadialMeasure, func: Callable, lower: float = 0.0):
    """Integrate ``func(t, s)`` (``s = 1 - t``) against ``m`` over ``[lower, 1)``.

    ``func`` must be vectorized over ``t``; leading output axes form a batch.
    Atoms contribute exact point evaluations.
    """
    u0 = -math.log1p(-lower)
    total = 0.0
    for a in m.atoms:
        if a.t >= lower:
            total = total + a.w * np.asarray(func(np.array([a.t]), np.array([1.0 - a.t])))[..., 0]
    for d in m.densities:
        total = total + _density_integral(d, func, u0)
    return total


# ---------------------------------------------------------------------------
# moments


def _beta_moments(d: Density, n: np.ndarray) -> np.ndarray:
    vals = np.exp(special.betaln(n + 1.0, d.beta))
    if d.lower > 0.0:
        vals = vals * special.betainc(d.beta, n + 1.0, 1.0 - d.lower)
    return d.c * vals


def _log_moments_closed(d: Density, n: np.ndarray) -> np.ndarray:
    """Moments with log^lam weight from beta-derivatives of B(n+1, beta).

    (1 + u)^lam expands binomially, and int t^n (1-t)^(beta-1) u^j dt is
    (-d/dbeta)^j B(n+1, beta) = B * Y_j with Y_j the complete Bell polynomial
    in the cumulants (-1)^i d^i/dbeta^i log B.
    """
    b = d.beta
    base = np.exp(special.betaln(n + 1.0, b))
    kappa = [None]
    for i in range(1, d.lam + 1):
        deriv = special.polygamma(i - 1, b) - special.polygamma(i - 1, n + 1.0 + b)
        kappa.append((-1) ** i * deriv)
    bell = [np.ones_like(base)]
    for j in range(d.lam):
        bell.append(sum(math.comb(j, i) * bell[j - i] * kappa[i + 1] for i in range(j + 1)))
    total = sum(math.comb(d.lam, j) * bell[j] for j in range(d.lam + 1))
    return d.c * base * total


def _quad_moments(d: Density, n: np.ndarray) -> np.ndarray:
    out = np.empty(n.size)
    for lo in range(0, n.size, _CHUNK):
        block = n[lo : lo + _CHUNK, None]

        def f(t, s, block=block):
            # t^n through log1p keeps precision near t = 1
            return np.exp(block * np.log1p(-s))

        out[lo : lo + _CHUNK] = _density_integral(d, f)
    return out


def _density_moments(d: Density, n: np.ndarray, method: str) -> np.ndarray:
    if method == "auto":
        method = "closed" if d.lam == 0 else "quadrature"
    if method == "quadrature":
        return _quad_moments(d, n)
    if method == "closed":
        if d.lam == 0:
            return _beta_moments(d, n)
        if d.lower > 0.0:
            raise ValueError("no closed form for restricted logarithmic densities")
        return _log_moments_closed(d, n)
    raise ValueError(f"unknown moment method {method!r}")


def _moment_values(m: RadialMeasure, n: np.ndarray, method: str = "auto") -> np.ndarray:
    n = np.asarray(n, dtype=float)
    vals = np.zeros(n.shape)
    for a in m.atoms:
        vals += a.w * a.t**n
    for d in m.densities:
        vals += _density_moments(d, n, method)
    return vals


def moment(m: RadialMeasure, n: int, method: str = "auto") -> float:
    """The moment ``int t^n dmu``.

    ``method`` selects the density path: ``"closed"`` (beta functions and
    their beta-derivatives), ``"quadrature"`` or ``"auto"`` (closed form when
    ``lam == 0``, quadrature otherwise).
    """
    if n < 0:
        raise ValueError("moment index must be nonnegative")
    return float(_moment_values(m, np.array([n]), method)[0])


def moments(m: RadialMeasure, count: int, method: str = "auto") -> MomentSequence:
    if count < 1:
        raise ValueError("count must be at least 1")
    return MomentSequence(_moment_values(m, np.arange(count), method), m.describe())


# ---------------------------------------------------------------------------
# tails and Carleson tests


def tail_mass(m: RadialMeasure, t: float) -> float:
    """``mu([t, 1))``."""
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    total = sum(a.w for a in m.atoms if a.t >= t)
    for d in m.densities:
        cut = max(t, d.lower)
        if d.lam == 0:
            total += d.c * (1.0 - cut) ** d.beta / d.beta
        else:
            total += _log_density_mass(d, d.beta, -math.log1p(-cut))
    return float(total)


def dyadic_grid(jmax: int, jmin: int = 1) -> np.ndarray:
    """Probe points ``1 - 2**-j`` for ``j = jmin..jmax``."""
    j = np.arange(jmin, jmax + 1, dtype=float)
    return 1.0 - 2.0 ** -j


def _trend(ratios: np.ndarray) -> str:
    last = ratios[-5:]
    if len(last) and not np.any(last):
        # tail mass has vanished, as for compactly supported measures
        return "decaying"
    if len(last) < 2 or last[0] == 0.0:
        return "bounded"
    d = np.diff(last)
    q = last[-1] / last[0]
    if np.all(d < 0) and q < 0.5:
        return "decaying"
    if np.all(d > 0) and q > 1.1:
        return "growing"
    return "bounded"


def log_carleson_constant(m: RadialMeasure, s: float, alpha: float, grid) -> CarlesonReport:
    """Estimate ``sup mu([t,1)) log(1/(1-t))**alpha / (1-t)**s`` on a grid.

    Arcs ``I`` are identified with ``2*pi*(1-t)``, so the logarithm
    ``log(2*pi/|I|)`` becomes ``log(1/(1-t))``.  The exponent estimate is the
    least-squares slope of ``log mu([t,1))`` against ``log(1-t)``.
    """
    if s <= 0 or alpha < 0:
        raise ValueError("need s > 0 and alpha >= 0")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any((grid < 0) | (grid >= 1)):
        raise ValueError("grid must be nonempty and inside [0, 1)")
    tails = np.array([tail_mass(m, t) for t in grid])
    gap = 1.0 - grid
    ratios = tails / gap**s
    if alpha:
        ratios = ratios * np.log(1.0 / gap) ** alpha
    pos = tails > 0
    if pos.sum() >= 2:
        slope = np.polyfit(np.log(gap[pos]), np.log(tails[pos]), 1)[0]
    else:
        slope = math.inf
    return CarlesonReport(
        s=s,
        constant=float(ratios.max()),
        exponent_estimate=float(slope),
        vanishing=_trend(ratios),
        log_alpha=alpha,
        grid=grid,
        ratios=ratios,
    )


def carleson_constant(m: RadialMeasure, s: float, grid) -> CarlesonReport:
    return log_carleson_constant(m, s, 0.0, grid)


def restrict_tail(m: RadialMeasure, r: float) -> RadialMeasure:
    """The measure ``chi_(r,1) * mu``; an atom sitting exactly at ``r`` is dropped."""
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    atoms = tuple(a for a in m.atoms if a.t > r)
    dens = tuple(replace(d, lower=max(d.lower, r)) for d in m.densities)
    return RadialMeasure(atoms, dens)


def singular_integral(m: RadialMeasure, alpha: float) -> float:
    """``int (1-t)**-alpha dmu``; returns ``math.inf`` when it diverges."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    total = sum(a.w * (1.0 - a.t) ** -alpha for a in m.atoms)
    for d in m.densities:
        if d.beta <= alpha:
            return math.inf
        if d.lam == 0:
            total += d.c * (1.0 - d.lower) ** (d.beta - alpha) / (d.beta - alpha)
            continue
        total += _log_density_mass(d, d.beta - alpha, d.u0)
    return float(total)


def embedding_constant(m: RadialMeasure, p: float, q: float, a_grid: Iterable[float]) -> float:
    """Lower bound for the best ``C`` in ``(int |f|^q dmu)^(1/q) <= C ||f||_{H^p}``.

    Tested on the unit-norm kernels ``f_a = ((1-a^2)/(1-a z)^2)^(1/p)``, which
    are positive on [0, 1), so the closed form is used instead of a series.
    """
    if p <= 0 or q < p:
        raise ValueError("need 0 < p <= q")
    best = 0.0
    for a in a_grid:
        if not 0.0 <= a < 1.0:
            raise ValueError("a_grid must lie in [0, 1)")
        expo = q / p

        def f(t, s, a=a):
            return ((1.0 - a * a) / (1.0 - a * t) ** 2) ** expo

        val = float(integrate(m, f)) ** (1.0 / q)
        best = max(best, val)
    return best
