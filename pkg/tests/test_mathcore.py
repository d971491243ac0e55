import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thzhbf.errors import RankDeficiencyError
from thzhbf.mathcore import (
    GmmParams,
    RngStream,
    as_complex_matrix,
    derive_stream,
    frobenius_norm,
    right_pseudo_inverse,
    sample_gmm,
)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestStreams:
    def test_same_inputs_same_draws(self):
        a = derive_stream(7, 0).generator().random(100)
        b = derive_stream(7, 0).generator().random(100)
        assert a.tobytes() == b.tobytes()

    def test_distinct_ids_differ(self):
        a = derive_stream(7, 0).generator().random(100)
        b = derive_stream(7, 1).generator().random(100)
        assert not np.array_equal(a, b)

    def test_children_are_distinct_and_reproducible(self):
        s = derive_stream(7, 3)
        assert s.child(0) != s.child(1)
        assert np.array_equal(s.child(2).generator().random(5), s.child(2).generator().random(5))
        assert s.stream_id == 3

    def test_thread_independent(self):
        ref = derive_stream(7, 3).generator().random(50)
        out = [None] * 8

        def work(j):
            out[j] = derive_stream(7, 3).generator().random(50)

        threads = [threading.Thread(target=work, args=(j,)) for j in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for o in out:
            assert o.tobytes() == ref.tobytes()

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            derive_stream(-1, 0)
        with pytest.raises(ValueError):
            derive_stream(1, -2)

    def test_stream_is_hashable_value(self):
        assert RngStream(1, (2,)) == derive_stream(1, 2)


class TestGmm:
    def test_invalid_params(self):
        with pytest.raises(ValueError):
            GmmParams(sigma1=0.0)
        with pytest.raises(ValueError):
            GmmParams(sigma2=-0.1)
        with pytest.raises(ValueError):
            GmmParams(a1=0.0, a2=0.0)
        with pytest.raises(ValueError):
            GmmParams(a1=-1.0)

    def test_single_component_mean(self):
        x = sample_gmm(GmmParams(1.0, 0.0, 0.1, 0.3), derive_stream(11, 0), 100_000)
        assert abs(x.mean()) < 0.005

    def test_equal_components_variance(self):
        x = sample_gmm(GmmParams(0.5, 0.5, 0.2, 0.2), derive_stream(11, 1), 100_000)
        assert x.var() == pytest.approx(0.04, rel=0.10)

    def test_mixture_variance(self):
        # independent arithmetic: 0.5 * 0.1**2 + 0.5 * 0.3**2
        p = GmmParams(0.5, 0.5, 0.1, 0.3)
        assert p.variance == pytest.approx(0.05, rel=1e-12)
        x = sample_gmm(p, derive_stream(11, 2), 100_000)
        assert x.var() == pytest.approx(0.05, rel=0.10)

    def test_unnormalized_weights_are_normalized(self):
        p = GmmParams(3.0, 1.0, 0.1, 0.3)
        assert p.variance == pytest.approx(0.75 * 0.01 + 0.25 * 0.09)
        x = sample_gmm(p, derive_stream(12, 0), 100_000)
        assert x.var() == pytest.approx(p.variance, rel=0.10)

    def test_mean_bound(self):
        n = 100_000
        x = sample_gmm(GmmParams(), derive_stream(13, 0), n)
        assert abs(x.mean()) < 3 * 5 * 0.3 / np.sqrt(n)

    def test_scalar_draw(self):
        v = sample_gmm(GmmParams(), np.random.default_rng(0))
        assert np.isscalar(v) or np.ndim(v) == 0


class TestPseudoInverse:
    def test_identity(self):
        np.testing.assert_allclose(right_pseudo_inverse(np.eye(3)), np.eye(3), atol=1e-15)

    def test_random_2x3(self):
        M = crandn(np.random.default_rng(0), 2, 3)
        np.testing.assert_allclose(M @ right_pseudo_inverse(M), np.eye(2), atol=1e-10)

    def test_matches_numpy_pinv(self):
        M = crandn(np.random.default_rng(1), 3, 7)
        np.testing.assert_allclose(right_pseudo_inverse(M), np.linalg.pinv(M), atol=1e-12)

    def test_row_duplicated_is_rank_deficient(self):
        r = crandn(np.random.default_rng(2), 1, 3)
        with pytest.raises(RankDeficiencyError):
            right_pseudo_inverse(np.vstack([r, r]))

    def test_tall_rejected(self):
        with pytest.raises(ValueError):
            right_pseudo_inverse(np.ones((3, 2)))

    @settings(max_examples=60, deadline=None)
    @given(
        u=st.integers(1, 4),
        extra=st.integers(0, 6),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_right_inverse_property(self, u, extra, seed):
        M = crandn(np.random.default_rng(seed), u, u + extra)
        P = right_pseudo_inverse(M)
        err = np.linalg.norm(M @ P - np.eye(u))
        assert err < 1e-8 * np.linalg.norm(M)


class TestFrobenius:
    @pytest.mark.parametrize(
        "M, expected",
        [(np.zeros((2, 3)), 0.0), (np.eye(4), 2.0), (np.array([[3, 4j]]), 5.0)],
    )
    def test_examples(self, M, expected):
        assert frobenius_norm(M) == pytest.approx(expected)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            as_complex_matrix(np.array([[np.nan, 1.0]]))
