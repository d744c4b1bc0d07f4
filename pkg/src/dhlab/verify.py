"""Named numerical checks for the Derivative-Hilbert operator.

Each scenario binds a set of operations from :mod:`dhlab.measure`,
:mod:`dhlab.analytic` and :mod:`dhlab.operator` to a concrete grid and a
pass/fail rule.  Outcomes are deterministic: every random draw is seeded
from the scenario config.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytic as an
from . import measure as ms
from . import operator as op
from .analytic import PowerSeries
from .measure import RadialMeasure

__all__ = [
    "VerificationOutcome",
    "UnknownScenarioError",
    "standard_corpus",
    "duality_pairing_lhs",
    "duality_pairing_rhs",
    "hilbert_inequality_check",
    "hilbert_moments",
    "necessity_functional",
    "coefficient_decay_check",
    "SCENARIOS",
    "scenario_defaults",
    "run_scenario",
]


class UnknownScenarioError(KeyError):
    pass


def standard_corpus() -> dict[str, RadialMeasure]:
    """delta_{1/2}, Lebesgue, beta in {1.5, 2, 2.5, 3}, and a log-weighted beta = 2 density."""
    corpus = {"delta-0.5": RadialMeasure.atom(0.5), "lebesgue": RadialMeasure.lebesgue()}
    for b in (1.5, 2.0, 2.5, 3.0):
        corpus[f"beta-{b:g}"] = RadialMeasure.density(b)
    corpus["log-beta-2"] = RadialMeasure.density(2.0, lam=1)
    return corpus


@dataclass(frozen=True)
class VerificationOutcome:
    scenario_id: str
    passed: bool | None
    metrics: list = field(default_factory=list)
    tolerance: float = 0.0
    inputs: dict = field(default_factory=dict)
    inputs_digest: str = ""

    @property
    def status(self) -> str:
        if self.passed is None:
            return "informational"
        return "pass" if self.passed else "fail"

    def metric(self, name: str):
        for k, v in self.metrics:
            if k == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "status": self.status,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "metrics": [[k, v] for k, v in self.metrics],
            "inputs": self.inputs,
            "inputs_digest": self.inputs_digest,
        }


# ---------------------------------------------------------------------------
# pairing identity


def duality_pairing_lhs(m: RadialMeasure, f: PowerSeries, g: PowerSeries, r: float, K: int = 1024, terms: int = 512):
    """``(1/2pi) int conj(DH_mu(f)(r e^{it})) g(e^{it}) dt`` from ``K`` samples.

    ``DH_mu(f)`` is the series truncated after ``terms`` coefficients.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    if K < 1 or K & (K - 1):
        raise ValueError("K must be a power of two")
    N = max(terms, len(f))
    dh = op.dh_series(m, f, N)
    theta = 2.0 * np.pi * np.arange(K) / K
    zs = np.exp(1j * theta)
    return complex(np.mean(np.conj(dh(r * zs)) * g(zs)))


def duality_pairing_rhs(m: RadialMeasure, f: PowerSeries, g: PowerSeries, r: float):
    """``int conj(f(t)) (g(rt) + rt g'(rt)) dmu(t)``."""
    if not 0.0 <= r < 1.0:
        raise ValueError("r must lie in [0, 1)")
    dg = g.derivative()

    def integrand(t, s):
        rt = r * t
        return np.conj(f(t)) * (g(rt) + rt * dg(rt))

    return complex(ms.integrate(m, integrand))


# ---------------------------------------------------------------------------
# Hilbert inequality


def hilbert_moments(N: int) -> np.ndarray:
    """Exact Lebesgue moments ``1/(n+1)``, ``n < 2N - 1``."""
    return 1.0 / np.arange(1.0, 2.0 * N)


def hilbert_inequality_check(a, N: int | None = None):
    """Return ``(lhs, rhs, passed)`` for sum_n |sum_k a_k/(n+k+1)|^2 <= pi^2 sum |a_k|^2."""
    a = np.asarray(a)
    N = a.size if N is None else N
    if a.size != N:
        raise ValueError("length of a must equal N")
    H = op.build(hilbert_moments(N), N, "unit")
    b = H.matvec(a)
    lhs = float(np.sum(np.abs(b) ** 2))
    rhs = float(np.sum(np.abs(a) ** 2))
    return lhs, rhs, lhs <= math.pi**2 * rhs * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# necessity functionals


def _kernel(a, expo):
    return lambda t: ((1.0 - a * a) / (1.0 - a * t) ** 2) ** expo


def _dual_factor(target, a, q_prime, r):
    """``g(x) + x g'(x)`` for the matching g family, as a function of t."""
    if target == "Hq":
        # evaluated at t (not rt)
        e = 1.0 / q_prime
        c = (1.0 - a * a) ** e

        def factor(t):
            base = c * (1.0 - a * t) ** (-2.0 * e)
            return base + t * (2.0 * a * e) * c * (1.0 - a * t) ** (-2.0 * e - 1.0)

        return factor
    if target == "H1":
        def factor(t):
            x = a * r * t
            return np.log(np.e / (1.0 - x)) + x / (1.0 - x)

        return factor
    if target == "Bq":
        def factor(t):
            x = a * r * t
            return (1.0 - a * a) / (1.0 - x) + x * (1.0 - a * a) / (1.0 - x) ** 2

        return factor
    raise ValueError(f"unknown target {target!r}; expected Hq, H1 or Bq")


def necessity_exponent(p: float, target: str, q_prime: float | None = None) -> float:
    if target == "Hq":
        return 1.0 / p + 1.0 / q_prime + 1.0
    return 1.0 / p + 1.0


def necessity_functional(m: RadialMeasure, p: float, target: str, a: float, q_prime: float | None = None, r: float | None = None):
    """``(lhs, rhs)`` for the test-function lower bound on ``[a, 1)``.

    lhs is ``int_[a,1) f_a(t) (g_a(x) + x g_a'(x)) dmu`` with ``x = t`` for the
    ``Hq`` target and ``x = r t`` (default ``r = a``) for ``H1`` and ``Bq``;
    rhs is ``mu([a,1)) / (1 - a^2)**E``.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    if p <= 0:
        raise ValueError("p must be positive")
    if target == "Hq" and (q_prime is None or q_prime <= 1.0):
        raise ValueError("Hq target needs q' > 1")
    r = a if r is None else r
    if target != "Hq" and not a <= r < 1.0:
        raise ValueError("need a <= r < 1")
    f = _kernel(a, 1.0 / p)
    g = _dual_factor(target, a, q_prime, r)
    lhs = float(ms.integrate(m, lambda t, s: f(t) * g(t), lower=a))
    E = necessity_exponent(p, target, q_prime)
    rhs = ms.tail_mass(m, a) / (1.0 - a * a) ** E
    return lhs, rhs


def coefficient_decay_check(f: PowerSeries, p: float):
    """``(max_n |a_n| / (n+1)^(1/p-1), sum_n (n+1)^(p-2) |a_n|^p)``."""
    if not 0.0 < p <= 2.0:
        raise ValueError("p must lie in (0, 2]")
    n1 = np.arange(1.0, len(f) + 1.0)
    mag = np.abs(f.coeffs)
    return float(np.max(mag / n1 ** (1.0 / p - 1.0))), float(np.sum(n1 ** (p - 2.0) * mag**p))


# ---------------------------------------------------------------------------
# scenarios


def _grid(jmax, jmin=1):
    return [float(x) for x in ms.dyadic_grid(jmax, jmin)]


def _random_poly(rng, max_degree):
    deg = int(rng.integers(0, max_degree + 1))
    c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    return PowerSeries(c / math.sqrt(deg + 1))


def _z_grid(radius, points):
    rings = [radius * k / 3.0 for k in (1, 2, 3)]
    theta = 2.0 * np.pi * np.arange(points) / points
    return np.concatenate([[0.0], *[rr * np.exp(1j * theta) for rr in rings]])


def _repr_identity(cfg, measures):
    rng = np.random.default_rng(cfg["seed"])
    z = _z_grid(cfg["z_radius"], cfg["z_points"])
    polys = [PowerSeries([1.0])] + [
        PowerSeries(rng.standard_normal(cfg["degree"] + 1)) for _ in range(cfg["trials"])
    ]
    metrics = []
    worst = 0.0
    for name, m in measures.items():
        gap = max(op.representation_gap(m, f, z, cfg["N"]) for f in polys)
        metrics.append((f"gap[{name}]", gap))
        worst = max(worst, gap)
    metrics.append(("max_gap", worst))
    return worst <= cfg["tol"], metrics, cfg["tol"]


def _pairing_identity(cfg, measures):
    rng = np.random.default_rng(cfg["seed"])
    pairs = [(_random_poly(rng, cfg["degree"]), _random_poly(rng, cfg["degree"])) for _ in range(cfg["trials"])]
    worst = 0.0
    metrics = []
    for name, m in measures.items():
        # the lhs series needs moments of order terms + degree; compute them once
        w = 0.0
        for f, g in pairs:
            for r in cfg["radii"]:
                lhs = duality_pairing_lhs(m, f, g, r, cfg["K"], cfg["terms"])
                rhs = duality_pairing_rhs(m, f, g, r)
                w = max(w, abs(lhs - rhs) / (1.0 + abs(lhs)))
        metrics.append((f"scaled_diff[{name}]", w))
        worst = max(worst, w)
    metrics.append(("max_scaled_diff", worst))
    return worst <= cfg["tol"], metrics, cfg["tol"]


def _hilbert_ineq(cfg, measures):
    rng = np.random.default_rng(cfg["seed"])
    N = cfg["N"]
    H = op.build(hilbert_moments(N), N, "unit")
    violations = 0
    worst = 0.0
    for _ in range(cfg["trials"]):
        a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        a /= np.linalg.norm(a)
        lhs = float(np.sum(np.abs(H.matvec(a)) ** 2))
        if lhs > math.pi**2 * (1.0 + 1e-12):
            violations += 1
        worst = max(worst, lhs / math.pi**2)
    metrics = [("violations", violations), ("max_lhs_over_pi2_rhs", worst), ("trials", cfg["trials"])]
    return violations == 0, metrics, 1e-12


def _carleson_growing(m, s, jmax=20):
    return ms.carleson_constant(m, s, _grid(jmax)).vanishing == "growing"


def _bounded_dichotomy(cfg, measures):
    ok = True
    metrics = []
    for name, m in measures.items():
        prof = op.norm_profile(m, cfg["scheme"], cfg["orders"])
        predicted = "growing" if _carleson_growing(m, 2.0) else "plateau"
        metrics += [
            (f"verdict[{name}]", prof.growth_verdict),
            (f"predicted[{name}]", predicted),
            (f"last_ratio[{name}]", prof.ratios[-1]),
            (f"norm_max_order[{name}]", prof.norms[-1]),
        ]
        ok &= prof.growth_verdict == predicted
    return ok, metrics, op.PLATEAU_RATIO


def _compact_dichotomy(cfg, measures):
    ok = True
    metrics = []
    r_list = _grid(cfg["jmax"])
    for name, m in measures.items():
        norms = np.array([v for _, v in op.tail_block_norm(m, cfg["scheme"], cfg["N"], r_list)])
        vanishing = ms.carleson_constant(m, 2.0, _grid(20)).vanishing == "decaying"
        first = norms[0]
        if first == 0.0:
            # no mass near the boundary: every tail block vanishes
            good = not np.any(norms)
        elif vanishing:
            d = np.diff(norms)
            good = bool(np.all((d < 0) | (norms[1:] == 0)) and norms[-1] < cfg["decay_factor"] * first)
        else:
            good = bool(np.all(norms >= cfg["floor_factor"] * first))
        metrics += [
            (f"vanishing_2_carleson[{name}]", vanishing),
            (f"final_over_initial[{name}]", float(norms[-1] / first) if first > 0 else math.nan),
            (f"min_over_initial[{name}]", float(norms.min() / first) if first > 0 else math.nan),
        ]
        ok &= good
    return ok, metrics, cfg["decay_factor"]


def _necessity(target):
    def run(cfg, measures):
        ok = True
        metrics = []
        grid = _grid(cfg["jmax"])
        for name, m in measures.items():
            ratios = []
            rhs_vals = []
            for a in grid:
                lhs, rhs = necessity_functional(m, cfg["p"], target, a, cfg.get("q_prime"))
                ok &= lhs >= 0.0
                if rhs > 0:
                    ratios.append(lhs / rhs)
                    rhs_vals.append(rhs)
            if not ratios:
                metrics.append((f"probes[{name}]", 0))
                continue
            ratios = np.array(ratios)
            c_fit = float(ratios.min())
            k = max(1, min(3, len(ratios) // 2))
            stable = ratios[-k:].min() >= 0.5 * ratios[:k].min()
            ok &= c_fit > 0 and bool(stable)
            metrics += [
                (f"c_fit[{name}]", c_fit),
                (f"ratio_spread[{name}]", float(ratios.max() / c_fit)),
                (f"rhs_growth[{name}]", float(rhs_vals[-1] / rhs_vals[0])),
            ]
        return ok, metrics, 0.5

    return run


def _embedding(cfg, measures):
    ok = True
    metrics = []
    p, q = cfg["p"], cfg["q"]
    grid = _grid(cfg["jmax"])
    for name, m in measures.items():
        consts = np.maximum.accumulate([ms.embedding_constant(m, p, q, [a]) for a in grid])
        last = consts[-1] / consts[-2]
        plateau = last < op.PLATEAU_RATIO
        carleson = not _carleson_growing(m, q / p)
        metrics += [
            (f"constant[{name}]", float(consts[-1])),
            (f"last_ratio[{name}]", float(last)),
            (f"carleson_{q / p:g}[{name}]", carleson),
        ]
        ok &= plateau == carleson
    return ok, metrics, op.PLATEAU_RATIO


def _lemma41(cfg, measures):
    ok = True
    metrics = []
    for name, m in measures.items():
        expo = ms.carleson_constant(m, 1.0, _grid(20)).exponent_estimate
        metrics.append((f"carleson_exponent[{name}]", expo))
        for alpha in cfg["alphas"]:
            val = ms.singular_integral(m, alpha)
            metrics.append((f"integral[{name},alpha={alpha:g}]", val))
            if expo > alpha + cfg["margin"]:
                ok &= math.isfinite(val)
    return ok, metrics, cfg["margin"]


def _coefficient_lemmas(cfg, measures):
    ok = True
    metrics = []
    for p in cfg["ps"]:
        scaled, sums = [], []
        for a in cfg["a_values"]:
            f = an.test_function_f(p, a)
            m1, s1 = coefficient_decay_check(f, p)
            longer = an.test_function_f(p, a, 2 * len(f))
            m2, s2 = coefficient_decay_check(longer, p)
            ok &= abs(s2 - s1) <= cfg["stability"] * s2 and abs(m2 - m1) <= cfg["stability"] * m2
            scaled.append(m1)
            sums.append(s1)
        spread_m = max(scaled) / min(scaled)
        spread_s = max(sums) / min(sums)
        ok &= spread_m <= cfg["spread"] and spread_s <= cfg["spread"]
        metrics += [
            (f"max_scaled_coeff[p={p:g}]", max(scaled)),
            (f"lemma32_sum[p={p:g}]", max(sums)),
            (f"spread[p={p:g}]", max(spread_m, spread_s)),
        ]
    return ok, metrics, cfg["spread"]


def _conjecture_probe(cfg, measures):
    metrics = []
    N = cfg["N"]
    for name, m in measures.items():
        mu = ms.moments(m, 2 * N - 1)
        for p in cfg["ps"]:
            ratios = []
            for a in _grid(cfg["jmax"]):
                f = an.test_function_f(p, a)
                dh = op.dh_series(mu, f, N)
                ratios.append(an.hardy_norm(dh, p).value / an.hardy_norm(f, p).value)
            metrics.append((f"test_ratios[{name},p={p:g}]", [float(x) for x in ratios]))
    return None, metrics, 0.0


_CORPUS = "corpus"

SCENARIOS: dict[str, tuple[Callable, dict]] = {
    "repr-identity": (
        _repr_identity,
        dict(measures=["delta-0.5", "beta-2"], N=400, degree=8, trials=5, seed=0, z_radius=0.9, z_points=16, tol=1e-6),
    ),
    "pairing-identity": (
        _pairing_identity,
        dict(measures=_CORPUS, trials=50, degree=32, radii=[0.3, 0.6, 0.9], K=1024, terms=512, seed=0, tol=1e-8),
    ),
    "hilbert-ineq": (_hilbert_ineq, dict(measures=[], trials=1000, N=512, seed=0)),
    "h2-bounded-dichotomy": (
        _bounded_dichotomy,
        dict(measures=["lebesgue", "beta-1.5", "beta-2", "beta-2.5", "beta-3"], scheme="derivative", orders=[64 << i for i in range(7)]),
    ),
    "h2-compact-dichotomy": (
        _compact_dichotomy,
        dict(measures=["beta-3", "beta-2"], scheme="derivative", N=1024, jmax=8, decay_factor=0.2, floor_factor=0.5),
    ),
    "necessity-4.1-i": (_necessity("Hq"), dict(measures=["beta-2.5"], p=1.0, q_prime=2.0, jmax=10)),
    "necessity-4.1-ii": (_necessity("H1"), dict(measures=["beta-2"], p=1.0, jmax=10)),
    "necessity-4.1-iii": (_necessity("Bq"), dict(measures=["beta-3"], p=0.5, jmax=10)),
    "embedding-hastings": (
        _embedding,
        dict(measures={"lebesgue": RadialMeasure.lebesgue(), "beta-0.5": RadialMeasure.density(0.5)}, p=2.0, q=2.0, jmax=15),
    ),
    "lemma-4.1-integrability": (_lemma41, dict(measures=_CORPUS, alphas=[0.5, 1.0, 1.5, 2.0, 2.5], margin=0.05)),
    "coefficient-lemmas": (
        _coefficient_lemmas,
        dict(measures=[], ps=[0.5, 1.0, 2.0], a_values=[0.5, 0.9, 0.99], spread=4.0, stability=1e-6),
    ),
    "conjecture-4.1-probe": (_conjecture_probe, dict(measures=["beta-2"], ps=[3.0, 4.0], jmax=5, N=2048)),
}


def scenario_defaults(scenario_id: str) -> dict:
    if scenario_id not in SCENARIOS:
        raise UnknownScenarioError(scenario_id)
    return dict(SCENARIOS[scenario_id][1])


def _resolve_measures(spec) -> dict[str, RadialMeasure]:
    corpus = standard_corpus()
    if spec == _CORPUS:
        return corpus
    if isinstance(spec, dict):
        out = {}
        for k, v in spec.items():
            out[k] = v if isinstance(v, RadialMeasure) else RadialMeasure.from_dict(v)
        return out
    out = {}
    for name in spec:
        if name not in corpus:
            raise ValueError(f"unknown corpus measure {name!r}")
        out[name] = corpus[name]
    return out


def _jsonable(x):
    if isinstance(x, RadialMeasure):
        return x.to_dict()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def digest(inputs: dict) -> str:
    blob = json.dumps(_jsonable(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run_scenario(scenario_id: str, config: dict | None = None) -> VerificationOutcome:
    """Run a catalogued scenario; ``config`` overrides its defaults.

    Raises :class:`UnknownScenarioError` for an id outside the catalog and
    ``ValueError`` for config keys the scenario does not take.
    """
    if scenario_id not in SCENARIOS:
        raise UnknownScenarioError(scenario_id)
    fn, defaults = SCENARIOS[scenario_id]
    cfg = dict(defaults)
    extra = set(config or {}) - set(defaults)
    if extra:
        raise ValueError(f"unknown config key(s) for {scenario_id}: {sorted(extra)}")
    cfg.update(config or {})
    measures = _resolve_measures(cfg["measures"])
    passed, metrics, tol = fn(cfg, measures)
    metrics = [(k, _jsonable(v)) for k, v in metrics]
    inputs = {"scenario": scenario_id, "config": _jsonable({**cfg, "measures": measures})}
    return VerificationOutcome(
        scenario_id=scenario_id,
        passed=None if passed is None else bool(passed),
        metrics=metrics,
        tolerance=tol,
        inputs=inputs,
        inputs_digest=digest(inputs),
    )
