import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_interference, naive_rates, naive_sum_rate, to_lists
from thzhbf.ici import IciProfile, cfo_profile, none_profile, scalar_profile
from thzhbf.objectives import (
    NoiseModel,
    ObjectiveKind,
    grad_interference,
    grad_objective_fd,
    interference_power,
    link_gains,
    objective_value,
    per_user_rate,
    rate_matrix,
    sinr,
    sum_rate,
    wirtinger_fd,
)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def instance(seed, U, K, n_t, n_rf):
    rng = np.random.default_rng(seed)
    H = crandn(rng, U, n_t, K)
    W = np.exp(2j * np.pi * rng.random((n_t, n_rf))) / math.sqrt(n_t)
    F = crandn(rng, K, n_rf, U)
    return H, W, F


def profiles(K):
    return [none_profile(K), scalar_profile(K, 0.3), cfo_profile(K, 0.2)]


def coeff_map(p):
    return {int(i): complex(s) for i, s in zip(p.offsets, p.coefficients)}


SMALL = [
    (U, K, n_t, n_rf)
    for U, K, n_t in itertools.product((1, 2), (1, 2, 3, 4), (1, 2, 3, 4))
    for n_rf in range(1, n_t + 1)
]


@pytest.mark.parametrize("U, K, n_t, n_rf", SMALL)
def test_naive_oracle_equivalence(U, K, n_t, n_rf):
    H, W, F = instance(1000 * U + 100 * K + 10 * n_t + n_rf, U, K, n_t, n_rf)
    lists = to_lists(H), to_lists(W), to_lists(F)
    psi = 0.37
    for p in profiles(K):
        S = coeff_map(p)
        rates, _ = naive_rates(*lists, S, psi)
        R = rate_matrix(H, W, F, p, psi)
        for q in range(U):
            for k in range(K):
                assert per_user_rate(H, W, F, p, psi, q, k) == pytest.approx(rates[q][k], rel=1e-12, abs=1e-12)
                assert R[q, k] == pytest.approx(rates[q][k], rel=1e-12, abs=1e-12)
        assert sum_rate(H, W, F, p, psi) == pytest.approx(naive_sum_rate(*lists, S, psi), rel=1e-12, abs=1e-12)
        assert interference_power(H, W, F, p) == pytest.approx(naive_interference(*lists, S), rel=1e-12, abs=1e-12)


def test_link_gains_definition():
    H, W, F = instance(5, 2, 3, 4, 2)
    G = link_gains(H, W, F)
    for q, u, i in itertools.product(range(2), range(2), range(3)):
        assert G[q, u, i] == pytest.approx(H[q, :, i] @ W @ F[i][:, u], rel=1e-13)


class TestExamples:
    def test_trivial_scalar_case(self):
        one = np.ones((1, 1, 1), dtype=complex)
        assert per_user_rate(one, np.ones((1, 1)), one, none_profile(1), 1.0, 0, 0) == pytest.approx(1.0)
        assert sum_rate(one, np.ones((1, 1)), one, none_profile(1), 1.0) == pytest.approx(1.0)

    def test_none_single_user(self):
        H, W, F = instance(2, 1, 3, 4, 2)
        G = link_gains(H, W, F)
        expected = np.log2(1 + np.abs(G[0, 0]) ** 2 / 0.2)
        np.testing.assert_allclose(rate_matrix(H, W, F, none_profile(3), 0.2)[0], expected, rtol=1e-13)

    def test_two_subcarrier_hand_value(self):
        H = np.ones((1, 1, 2), dtype=complex)
        W = np.ones((1, 1), dtype=complex)
        F = np.ones((2, 1, 1), dtype=complex)
        p = scalar_profile(2, 0.1)
        expected = math.log2(1 + 1 / (0.01 + 0.1))
        assert expected == pytest.approx(3.33, abs=5e-3)
        for k in range(2):
            assert per_user_rate(H, W, F, p, 0.1, 0, k) == pytest.approx(expected, rel=1e-14)
        assert interference_power(H, W, F, scalar_profile(2, 0.25)) == pytest.approx(2 * 0.25**2)

    def test_zero_channel(self):
        H, W, F = instance(3, 2, 3, 4, 2)
        assert sum_rate(np.zeros_like(H), W, F, scalar_profile(3, 0.3), 0.1) == 0.0

    def test_user_symmetric(self):
        H, W, F = instance(4, 1, 3, 4, 2)
        H2 = np.concatenate([H, H])
        F2 = np.concatenate([F, F], axis=2)
        p = scalar_profile(3, 0.2)
        R = rate_matrix(H2, W, F2, p, 0.5)
        np.testing.assert_allclose(R[0], R[1])
        assert sum_rate(H2, W, F2, p, 0.5) == pytest.approx(R[0].sum(), rel=1e-14)

    def test_none_interference_single_user(self):
        H, W, F = instance(6, 1, 4, 4, 2)
        assert interference_power(H, W, F, none_profile(4)) == 0.0

    def test_sinr_exposed(self):
        H, W, F = instance(7, 2, 3, 4, 2)
        p = cfo_profile(3, 0.1)
        np.testing.assert_allclose(np.log2(1 + sinr(H, W, F, p, 0.3)), rate_matrix(H, W, F, p, 0.3))


@pytest.mark.parametrize("seed", range(5))
def test_zero_offset_equivalence(seed):
    H, W, F = instance(seed, 2, 4, 9, 3)
    ref = rate_matrix(H, W, F, none_profile(4), 0.1)
    for p in (cfo_profile(4, 0.0), scalar_profile(4, 0.0)):
        np.testing.assert_allclose(rate_matrix(H, W, F, p, 0.1), ref, rtol=0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), S=st.floats(0.0, 0.9))
def test_user_relabeling_invariance(seed, S):
    H, W, F = instance(seed, 3, 3, 4, 3)
    perm = np.random.default_rng(seed).permutation(3)
    p = scalar_profile(3, S)
    a = sum_rate(H, W, F, p, 0.2)
    b = sum_rate(H[perm], W, F[:, :, perm], p, 0.2)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_rate_nonnegative_and_interference_increasing(seed):
    H, W, F = instance(seed, 2, 3, 4, 2)
    assert np.all(rate_matrix(H, W, F, cfo_profile(3, 0.4), 1e-3) >= 0)
    lo = interference_power(H, W, F, scalar_profile(3, 0.1))
    hi = interference_power(H, W, F, scalar_profile(3, 0.3))
    assert 0 <= lo < hi


class TestGradients:
    def test_zero_when_links_vanish(self):
        H, W, F = instance(8, 2, 3, 4, 2)
        g = grad_interference(np.zeros_like(H), W, F, scalar_profile(3, 0.3))
        assert np.all(g == 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_analytic_vs_generic_fd(self, seed):
        H, W, F = instance(seed, 2, 3, 4, 2)
        p = cfo_profile(3, 0.25)
        fd = wirtinger_fd(lambda X: interference_power(H, X, F, p), W, 1e-6)
        g = grad_interference(H, W, F, p)
        assert np.max(np.abs(g - fd)) / np.max(np.abs(g)) < 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_analytic_vs_batched_fd(self, seed):
        H, W, F = instance(seed, 2, 4, 9, 3)
        p = scalar_profile(4, 0.3)
        fd = grad_objective_fd(ObjectiveKind.NEGATIVE_INTERFERENCE, H, W, F, p, 1.0, 1e-5)
        g = grad_interference(H, W, F, p)
        assert np.max(np.abs(-fd - g)) / np.max(np.abs(g)) < 1e-6

    def test_quadratic_in_coefficients(self):
        H, W, F = instance(9, 2, 3, 4, 2)
        base = cfo_profile(3, 0.3)
        scaled = IciProfile(3, 0.5 * base.coefficients, "cfo", 0.3)
        np.testing.assert_allclose(grad_interference(H, W, F, scaled),
                                   0.25 * grad_interference(H, W, F, base), rtol=1e-12)

    @pytest.mark.parametrize("kind", [ObjectiveKind.SUM_RATE_WITH_ICI, ObjectiveKind.SUM_RATE_NO_ICI])
    def test_rate_fd_vs_generic(self, kind):
        H, W, F = instance(10, 2, 3, 4, 2)
        p = scalar_profile(3, 0.3)
        fast = grad_objective_fd(kind, H, W, F, p, 0.1)
        slow = wirtinger_fd(lambda X: objective_value(kind, H, X, F, p, 0.1), W, 1e-6)
        assert np.max(np.abs(fast - slow)) / np.max(np.abs(slow)) < 1e-6

    def test_fd_zero_channel(self):
        H, W, F = instance(11, 2, 3, 4, 2)
        g = grad_objective_fd(ObjectiveKind.SUM_RATE_WITH_ICI, np.zeros_like(H), W, F,
                              scalar_profile(3, 0.3), 0.1)
        assert np.all(g == 0)

    def test_wirtinger_probe(self):
        x = np.array([0.3 - 0.7j, 2.0 + 1.0j])
        g = wirtinger_fd(lambda z: float(np.sum(np.abs(z) ** 2)), x, 1e-6)
        np.testing.assert_allclose(g, x, atol=1e-9)

    def test_fd_step_validation(self):
        H, W, F = instance(12, 1, 2, 4, 1)
        with pytest.raises(ValueError):
            grad_objective_fd(ObjectiveKind.SUM_RATE_WITH_ICI, H, W, F, none_profile(2), 1.0, 0.0)


class TestValidation:
    def test_shape_mismatch(self):
        H, W, F = instance(13, 2, 3, 4, 2)
        with pytest.raises(ValueError):
            sum_rate(H, W[:3], F, none_profile(3), 1.0)
        with pytest.raises(ValueError):
            sum_rate(H, W, F[:2], none_profile(3), 1.0)
        with pytest.raises(ValueError):
            sum_rate(H, W, F, none_profile(4), 1.0)

    def test_index_range(self):
        H, W, F = instance(14, 2, 3, 4, 2)
        with pytest.raises(IndexError):
            per_user_rate(H, W, F, none_profile(3), 1.0, 2, 0)

    def test_noise_model(self):
        n = NoiseModel.from_snr_db(20.0)
        assert n.psi == pytest.approx(0.01)
        assert n.snr_db == pytest.approx(20.0)
        with pytest.raises(ValueError):
            NoiseModel(0.0)
