import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special
from scipy.linalg import hilbert

from dhlab import measure as ms
from dhlab import operator as op
from dhlab.analytic import PowerSeries
from dhlab.measure import RadialMeasure

LEB = RadialMeasure.lebesgue()
HALF = RadialMeasure.atom(0.5)


def dense_norm(matrix):
    return float(np.linalg.norm(matrix.dense(), 2))


# --- build / apply -------------------------------------------------------------


def test_build_examples():
    mu = ms.moments(LEB, 3)
    assert op.build(mu, 2, "unit").dense() == pytest.approx(np.array([[1, 1 / 2], [1 / 2, 1 / 3]]))
    assert op.build(mu, 2, "derivative").dense() == pytest.approx(np.array([[1, 1 / 2], [1, 2 / 3]]))
    assert op.build(ms.moments(HALF, 3), 2).dense().tolist() == [[1, 0.5], [0.5, 0.25]]


def test_build_rejects_short_moments_and_bad_scheme():
    with pytest.raises(op.InsufficientMomentsError):
        op.build(ms.moments(LEB, 4), 3)
    with pytest.raises(ValueError):
        op.build(ms.moments(LEB, 5), 3, "half")


def test_apply_examples():
    H = op.build(ms.moments(HALF, 5), 3, "derivative")
    assert op.apply(H, [1, 0, 0]) == pytest.approx([1, 1, 0.75])
    mu = ms.moments(LEB, 7)
    D = op.build(mu, 4, "derivative")
    assert op.apply(D, np.eye(4)[0]) == pytest.approx(np.arange(1, 5) * mu.values[:4])


@given(st.integers(1, 64), st.integers(0, 63), st.integers(0, 63), st.sampled_from(op.SCHEMES))
def test_hankel_structure(N, n, k, scheme):
    n, k = n % N, k % N
    H = op.build(ms.moments(RadialMeasure.density(1.5), 2 * N - 1), N, scheme)
    col = op.apply(H, np.eye(N)[k])
    w = H.weights
    assert col[n] / w[n] == pytest.approx(H.moments[n + k], rel=1e-12, abs=1e-15)
    assert np.all(H.dense() >= 0)


@given(st.sampled_from([1, 2, 3, 16, 100, 256]), st.integers(0, 2**31), st.sampled_from(op.SCHEMES))
def test_fast_matches_naive(N, seed, scheme):
    rng = np.random.default_rng(seed)
    H = op.build(ms.moments(RadialMeasure.density(2.0, lam=1), 2 * N - 1), N, scheme)
    a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    fast, naive = op.apply(H, a), op.apply(H, a, "naive")
    assert np.linalg.norm(fast - naive) <= 1e-10 * np.linalg.norm(naive)
    assert np.allclose(naive, H.dense() @ a, rtol=1e-12, atol=0)


def test_real_input_gives_real_output():
    H = op.build(ms.moments(LEB, 15), 8)
    assert not np.iscomplexobj(H.matvec(np.ones(8)))
    assert H.rmatvec(np.ones(8)) == pytest.approx(H.dense().T @ np.ones(8))


def test_apply_validates_length_and_method():
    H = op.build(ms.moments(LEB, 5), 3)
    with pytest.raises(ValueError):
        op.apply(H, [1, 2])
    with pytest.raises(ValueError):
        op.apply(H, [1, 2, 3], "slow")


# --- integral form ---------------------------------------------------------------


def test_apply_integral_examples():
    one = PowerSeries([1])
    z = np.array([0, 0.5, 0.3j])
    assert op.apply_integral(HALF, one, z, 2) == pytest.approx(1 / (1 - z / 2) ** 2)
    assert op.apply_integral(LEB, one, 0.0, 1) == pytest.approx(1.0)


def test_apply_integral_against_riemann_sum():
    n = 1_000_000
    t = (np.arange(n) + 0.5) / n
    riemann = float(np.mean(1 / (1 - 0.5 * t) ** 2))
    got = op.apply_integral(LEB, PowerSeries([1]), 0.5, 2)
    assert got == pytest.approx(riemann, abs=1e-8)
    assert got == pytest.approx(2.0, rel=1e-13)


def test_apply_integral_accepts_callables_and_flags_divergence():
    blowup = lambda t: 1 / (1 - t)  # noqa: E731
    with np.errstate(divide="ignore", invalid="ignore"):
        assert np.isinf(op.apply_integral(LEB, blowup, 0.0).real)
    exp_series = PowerSeries(1 / special.factorial(np.arange(30)))
    m = RadialMeasure.density(3.0, lam=1)
    z = np.array([0.2, -0.7j])
    assert op.apply_integral(m, np.exp, z) == pytest.approx(op.apply_integral(m, exp_series, z), rel=1e-13)
    with pytest.raises(ValueError):
        op.apply_integral(LEB, PowerSeries([1]), 1.0)


def test_representation_gap_examples():
    z = 0.9 * np.exp(2j * np.pi * np.arange(16) / 16)
    assert op.representation_gap(HALF, PowerSeries([1]), z, 200) <= 1e-8
    assert op.representation_gap(LEB, PowerSeries([0, 1]), z, 400) <= 1e-6
    assert op.representation_gap(RadialMeasure(), PowerSeries([1]), z, 10) == 0.0


def test_representation_gap_shrinks_with_order():
    z = np.array([0.9, -0.9, 0.9j])
    gaps = [op.representation_gap(LEB, PowerSeries([0, 1]), z, N) for N in (25, 50, 100)]
    assert gaps[1] <= gaps[0] / 2 and gaps[2] <= gaps[1] / 2


# --- spectral norms --------------------------------------------------------------


def test_spectral_norm_trivial_cases():
    assert op.spectral_norm(op.build([0.7], 1)) == pytest.approx(0.7)
    delta0 = op.build(ms.moments(RadialMeasure.atom(0.0), 63), 32)
    assert op.spectral_norm(delta0) == pytest.approx(1.0)
    assert op.spectral_norm(op.build(np.zeros(7), 4)) == 0.0


def test_hilbert_matrix_norms_against_dense_eigenvalues():
    # the truncated Hilbert norms approach pi only logarithmically: 2.3793 at N = 512
    for N in (64, 512):
        got = op.spectral_norm(op.build(ms.moments(LEB, 2 * N - 1), N, "unit"))
        want = float(np.linalg.eigvalsh(hilbert(N))[-1])
        assert got == pytest.approx(want, rel=1e-8)
        assert got < math.pi
    assert op.spectral_norm(op.build(ms.moments(LEB, 1023), 512, "unit")) == pytest.approx(2.3793125, abs=1e-6)


@given(st.sampled_from([0.7, 1.0, 1.5, 2.0, 3.0]), st.integers(0, 2), st.integers(1, 40), st.sampled_from(op.SCHEMES))
def test_spectral_norm_against_svd(beta, lam, N, scheme):
    H = op.build(ms.moments(RadialMeasure.density(beta, lam=lam), 2 * N - 1), N, scheme)
    assert op.spectral_norm(H, tol=1e-12) == pytest.approx(dense_norm(H), rel=1e-6)


def test_spectral_norm_monotone_in_order():
    mu = ms.moments(RadialMeasure.density(1.5), 1023)
    norms = [op.spectral_norm(op.build(mu, N, "derivative")) for N in (8, 32, 128, 512)]
    assert all(b >= a for a, b in zip(norms, norms[1:]))


def test_spectral_norm_restarts_on_null_start():
    # moments (1, -1, 1, -1, ...) give a rank-one matrix with the all-ones vector in its kernel
    mu = np.array([(-1.0) ** n for n in range(7)])
    assert op.spectral_norm(op.build(mu, 4)) == pytest.approx(4.0)


def test_spectral_norm_warns_without_convergence():
    H = op.build(ms.moments(LEB, 255), 128)
    with pytest.warns(op.ConvergenceWarning):
        val = op.spectral_norm(H, tol=1e-15, max_iter=2)
    assert 0 < val <= dense_norm(H)
    with pytest.raises(ValueError):
        op.spectral_norm(H, tol=0)


@pytest.mark.parametrize("beta", [2.0, 2.5, 3.0])
def test_norms_stay_below_hilbert_ceiling(beta):
    # mu_n <= 2C/(n+1)^2 for a 2-Carleson measure with constant C, so
    # (n+1) mu_{n+k} <= 2C/(n+k+1) and the Hilbert inequality caps the norm at 2 pi C
    m = RadialMeasure.density(beta)
    C = ms.carleson_constant(m, 2.0, ms.dyadic_grid(20, 0)).constant
    prof = op.norm_profile(m, "derivative", [64, 256, 1024, 4096])
    assert max(prof.norms) <= 2 * math.pi * C <= math.pi**2 * C


# --- profiles ---------------------------------------------------------------------


def test_growth_verdict_rule():
    assert op.growth_verdict([1, 1.5, 1.51]) == "plateau"
    assert op.growth_verdict([1, 1.1, 1.2, 1.3]) == "growing"
    assert op.growth_verdict([1, 1.1, 1.2, 1.23]) == "inconclusive"
    assert op.growth_verdict([1]) == "inconclusive"


@pytest.mark.parametrize("beta, verdict", [(3.0, "plateau"), (2.0, "plateau"), (1.0, "growing")])
def test_norm_profile_examples(beta, verdict):
    prof = op.norm_profile(RadialMeasure.density(beta))
    assert prof.orders == [64, 128, 256, 512, 1024, 2048, 4096]
    assert prof.growth_verdict == verdict
    assert all(b >= a * (1 - 1e-9) for a, b in zip(prof.norms, prof.norms[1:]))


def test_norm_profile_rejects_unsorted_orders():
    with pytest.raises(ValueError):
        op.norm_profile(LEB, orders=[128, 64])


def test_tail_blocks_of_empty_tail_vanish():
    assert op.tail_block_norm(HALF, "derivative", 16, [0.9]) == [(0.9, 0.0)]
    with pytest.raises(ValueError):
        op.tail_block_norm(HALF, "derivative", 16, [1.0])


def test_tail_blocks_against_dense_svd():
    r_list = [0.5, 0.75, 0.875]
    m = RadialMeasure.density(2.0)
    got = op.tail_block_norm(m, "derivative", 128, r_list)
    for r, val in got:
        H = op.build(ms.moments(ms.restrict_tail(m, r), 255), 128, "derivative")
        assert val == pytest.approx(dense_norm(H), rel=1e-7)


def test_beta2_tail_floor_recovers_at_larger_order():
    # at N = 1024 the deepest cut 1 - 2^-8 is too close to the truncation scale;
    # with four times the order the floor of half the initial norm holds
    res = op.tail_block_norm(RadialMeasure.density(2.0), "derivative", 4096, ms.dyadic_grid(8))
    norms = np.array([v for _, v in res])
    assert norms.min() >= 0.5 * norms[0]
