import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dhlab import analytic as an
from dhlab import measure as ms
from dhlab import verify as vf
from dhlab.analytic import PowerSeries
from dhlab.measure import RadialMeasure

HALF = RadialMeasure.atom(0.5)
CORPUS = vf.standard_corpus()


def test_corpus_contents():
    assert list(CORPUS) == ["delta-0.5", "lebesgue", "beta-1.5", "beta-2", "beta-2.5", "beta-3", "log-beta-2"]
    assert CORPUS["log-beta-2"].densities[0].lam == 1


# --- pairing -------------------------------------------------------------------


def test_pairing_examples():
    one, z = PowerSeries([1]), PowerSeries([0, 1])
    for r in (0.0, 0.4, 0.9):
        assert vf.duality_pairing_lhs(HALF, one, one, r) == pytest.approx(1.0, abs=1e-14)
        assert vf.duality_pairing_rhs(HALF, one, one, r) == pytest.approx(1.0, abs=1e-14)
    assert vf.duality_pairing_lhs(HALF, one, z, 0.5) == pytest.approx(0.5, abs=1e-14)
    assert vf.duality_pairing_rhs(HALF, one, z, 0.5) == pytest.approx(0.5, abs=1e-14)
    for m in CORPUS.values():
        mu0 = ms.moment(m, 0)
        assert vf.duality_pairing_rhs(m, one, one, 0.7) == pytest.approx(mu0, rel=1e-12)


def test_pairing_rejects_bad_arguments():
    one = PowerSeries([1])
    with pytest.raises(ValueError):
        vf.duality_pairing_lhs(HALF, one, one, 1.0)
    with pytest.raises(ValueError):
        vf.duality_pairing_lhs(HALF, one, one, 0.5, K=1000)
    with pytest.raises(ValueError):
        vf.duality_pairing_rhs(HALF, one, one, -0.1)


def coeff_lists(max_size):
    return st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=max_size)


@given(coeff_lists(33), coeff_lists(33), st.sampled_from([0.0, 0.3, 0.6, 0.9]), st.sampled_from(list(CORPUS)))
def test_pairing_identity(fc, gc, r, name):
    f, g, m = PowerSeries(fc), PowerSeries(gc), CORPUS[name]
    lhs = vf.duality_pairing_lhs(m, f, g, r)
    rhs = vf.duality_pairing_rhs(m, f, g, r)
    assert abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs))


# --- Hilbert inequality ------------------------------------------------------------


def test_hilbert_examples():
    N = 64
    lhs, rhs, ok = vf.hilbert_inequality_check(np.eye(N)[0])
    assert ok and rhs == 1.0
    assert lhs == pytest.approx(sum(1 / (n + 1) ** 2 for n in range(N)), rel=1e-12)
    assert lhs < math.pi**2 / 6
    assert vf.hilbert_inequality_check(np.zeros(8), 8) == (0.0, 0.0, True)
    with pytest.raises(ValueError):
        vf.hilbert_inequality_check(np.ones(3), 4)


@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_hilbert_never_violated(N, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    lhs, rhs, ok = vf.hilbert_inequality_check(a)
    assert ok and lhs <= math.pi**2 * rhs


def test_hilbert_extremal_direction_stays_below_bound():
    # a_k = 1/sqrt(k+1) is the classical near-extremal sequence
    N = 4096
    a = 1 / np.sqrt(np.arange(1, N + 1))
    lhs, rhs, ok = vf.hilbert_inequality_check(a)
    assert ok and lhs / rhs > 4.0


# --- necessity functionals --------------------------------------------------------------


def g_factor_from_series(kind, a, param, x):
    g = an.test_function_g(kind, a, param)
    return g(x) + x * g.derivative()(x)


@pytest.mark.parametrize("target, kind, param", [("Hq", "power", 2.0), ("Hq", "power", 3.0), ("H1", "log", None), ("Bq", "cauchy", None)])
def test_dual_factor_matches_series(target, kind, param):
    a = 0.8
    factor = vf._dual_factor(target, a, param, a)
    t = np.linspace(0, 0.999, 7)
    x = t if target == "Hq" else a * t
    assert factor(t) == pytest.approx(g_factor_from_series(kind, a, param, x).real, rel=1e-10)


def test_necessity_examples():
    assert vf.necessity_functional(HALF, 1.0, "H1", 0.9) == (0.0, 0.0)
    leb = RadialMeasure.lebesgue()
    grid = ms.dyadic_grid(10)
    pairs = [vf.necessity_functional(leb, 1.0, "H1", a) for a in grid]
    rhs = np.array([p[1] for p in pairs])
    lhs = np.array([p[0] for p in pairs])
    assert rhs == pytest.approx((1 - grid) / (1 - grid**2) ** 2, rel=1e-12)
    assert np.all(np.diff(rhs) > 0) and np.all(np.diff(lhs) > 0)
    ratio = lhs / rhs
    assert ratio.max() / ratio.min() < 3


def test_necessity_critical_density_ratio_bounded():
    p, qp = 1.0, 2.0
    E = vf.necessity_exponent(p, "Hq", qp)
    m = RadialMeasure.density(E)
    ratios = []
    for a in ms.dyadic_grid(10):
        lhs, rhs = vf.necessity_functional(m, p, "Hq", a, qp)
        ratios.append(lhs / rhs)
    assert max(ratios) / min(ratios) < 2


def test_necessity_validation():
    m = RadialMeasure.lebesgue()
    with pytest.raises(ValueError):
        vf.necessity_functional(m, 1.0, "Hq", 0.5)
    with pytest.raises(ValueError):
        vf.necessity_functional(m, 1.0, "H1", 1.0)
    with pytest.raises(ValueError):
        vf.necessity_functional(m, 1.0, "H1", 0.5, r=0.4)
    with pytest.raises(ValueError):
        vf.necessity_functional(m, 1.0, "BMO", 0.5)


@given(
    st.sampled_from(list(CORPUS)),
    st.sampled_from(["Hq", "H1", "Bq"]),
    st.floats(0.3, 1.0),
    st.floats(0.01, 0.999),
)
def test_necessity_lhs_nonnegative(name, target, p, a):
    lhs, rhs = vf.necessity_functional(CORPUS[name], p, target, a, q_prime=2.0)
    assert lhs >= 0 and rhs >= 0


# --- coefficient lemmas -------------------------------------------------------------------


def test_coefficient_examples():
    assert vf.coefficient_decay_check(PowerSeries([1]), 0.7) == (1.0, 1.0)
    f = an.test_function_f(2, 0.5)
    assert vf.coefficient_decay_check(f, 2)[1] == pytest.approx(1.0, abs=1e-12)
    scaled = [vf.coefficient_decay_check(an.test_function_f(1, a), 1)[0] for a in (0.5, 0.9, 0.99)]
    assert max(scaled) <= 1.0
    with pytest.raises(ValueError):
        vf.coefficient_decay_check(f, 2.5)


# --- scenarios ------------------------------------------------------------------------------


def test_unknown_scenario():
    with pytest.raises(vf.UnknownScenarioError):
        vf.run_scenario("riemann-hypothesis")


def test_unknown_config_key():
    with pytest.raises(ValueError, match="colour"):
        vf.run_scenario("hilbert-ineq", {"colour": "red"})


def test_unknown_corpus_name():
    with pytest.raises(ValueError):
        vf.run_scenario("repr-identity", {"measures": ["beta-7"]})


def test_repr_identity_example():
    out = vf.run_scenario("repr-identity", {"measures": ["delta-0.5"], "trials": 0})
    assert out.passed and out.metric("max_gap") <= 1e-8


def test_scenarios_are_deterministic():
    a = vf.run_scenario("hilbert-ineq", {"trials": 50, "seed": 3})
    b = vf.run_scenario("hilbert-ineq", {"trials": 50, "seed": 3})
    c = vf.run_scenario("hilbert-ineq", {"trials": 50, "seed": 4})
    assert a.metrics == b.metrics and a.inputs_digest == b.inputs_digest
    assert c.inputs_digest != a.inputs_digest


def test_bounded_dichotomy_beta1_vs_beta2():
    m = {"b1": RadialMeasure.density(1.0), "b2": RadialMeasure.density(2.0)}
    out = vf.run_scenario("h2-bounded-dichotomy", {"measures": m})
    assert out.passed
    assert out.metric("verdict[b1]") == "growing" and out.metric("verdict[b2]") == "plateau"


def test_misclassified_prediction_fails():
    # two orders give one ratio, so Lebesgue reads inconclusive instead of growing
    out = vf.run_scenario("h2-bounded-dichotomy", {"measures": ["lebesgue"], "orders": [64, 128]})
    assert out.passed is False


@pytest.mark.parametrize(
    "sid",
    [
        "necessity-4.1-i",
        "necessity-4.1-ii",
        "necessity-4.1-iii",
        "embedding-hastings",
        "lemma-4.1-integrability",
        "coefficient-lemmas",
    ],
)
def test_default_scenarios_pass(sid):
    out = vf.run_scenario(sid)
    assert out.status == "pass", out.metrics


def test_compact_dichotomy_beta3():
    out = vf.run_scenario("h2-compact-dichotomy", {"measures": ["beta-3", "delta-0.5"]})
    assert out.passed
    assert out.metric("final_over_initial[beta-3]") < 0.2


def test_conjecture_probe_is_informational():
    out = vf.run_scenario("conjecture-4.1-probe", {"jmax": 3, "N": 512})
    assert out.passed is None and out.status == "informational"
    ratios = out.metric("test_ratios[beta-2,p=3]")
    assert len(ratios) == 3 and all(r > 0 for r in ratios)


def test_outcome_serializes():
    d = vf.run_scenario("coefficient-lemmas").to_dict()
    assert d["status"] == "pass" and len(d["inputs_digest"]) == 64
    assert d["inputs"]["scenario"] == "coefficient-lemmas"
