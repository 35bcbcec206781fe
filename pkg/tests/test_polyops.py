import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from svarma import polyops
from svarma.oracle import dense_theta, series_by_division
from svarma.polyops import (check_theta, invert_series, shift_down, theta_inverse_lags,
                            toeplitz_apply, toeplitz_dense)

from conftest import random_theta


class TestCheckTheta:
    def test_accepts_unit_leading(self):
        np.testing.assert_array_equal(check_theta([1, 0.5]), [1.0, 0.5])

    def test_scalar_identity(self):
        assert check_theta(1.0).shape == (1,)

    @pytest.mark.parametrize("bad", [[0.9, 0.5], [], [1.0, np.nan], [[1.0, 0.2]]])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            check_theta(bad)


class TestInvertSeries:
    def test_identity_polynomial(self):
        np.testing.assert_array_equal(invert_series([1.0], 4), [1, 0, 0, 0])

    def test_first_order(self):
        np.testing.assert_allclose(invert_series([1, 0.5], 3), [1, -0.5, 0.25], atol=0)

    def test_perfect_square(self):
        # (1 + 0.5 L)^2
        np.testing.assert_allclose(invert_series([1, 1, 0.25], 3), [1, -1, 0.75], atol=1e-15)

    def test_matches_long_division(self, rng):
        th = random_theta(rng, 5, hi=0.97)
        np.testing.assert_allclose(invert_series(th, 300), series_by_division(th, 300),
                                   rtol=1e-12, atol=1e-14)

    def test_reproduces_impulse(self, rng):
        for q, T in [(1, 17), (3, 512), (6, 4096)]:
            th = random_theta(rng, q, hi=0.95)
            c = invert_series(th, T)
            back = np.convolve(th, c)[:T]
            expected = np.zeros(T)
            expected[0] = 1.0
            np.testing.assert_allclose(back, expected, atol=1e-12)

    def test_rejects_zero_length(self):
        with pytest.raises(ValueError):
            invert_series([1, 0.2], 0)


class TestToeplitzApply:
    series = np.array([1.0, -0.5, 0.25])

    def test_identity_series(self):
        np.testing.assert_array_equal(toeplitz_apply([1.0, 0, 0], np.array([1.0, 2, 3])), [1, 2, 3])

    def test_impulse_returns_series(self):
        np.testing.assert_allclose(toeplitz_apply(self.series, np.array([1.0, 0, 0])), self.series)

    def test_shifted_impulse(self):
        np.testing.assert_allclose(toeplitz_apply(self.series, np.array([0.0, 1, 0])), [0, 1, -0.5])

    @pytest.mark.parametrize("T", [5, 63, 64, 65, 200, 1000, 2048])
    def test_fft_path_equals_dense(self, rng, T):
        s = invert_series(random_theta(rng, 3), T)
        A = rng.standard_normal((T, 3))
        np.testing.assert_allclose(toeplitz_apply(s, A), toeplitz_dense(s) @ A,
                                   rtol=0, atol=1e-10 * (1 + np.abs(A).sum()))

    def test_block_convolution_short_kernel(self, rng):
        # a short kernel padded with zeros exercises the multi-block branch
        T = 3000
        s = np.zeros(T)
        s[:6] = rng.standard_normal(6)
        A = rng.standard_normal((T, 2))
        expected = np.column_stack([np.convolve(s[:6], A[:, j])[:T] for j in range(2)])
        out = polyops._overlap_save(s[:6], A, T)
        np.testing.assert_allclose(out, expected, atol=1e-10)

    def test_fft_equals_direct_random(self, rng):
        for _ in range(10):
            T = int(rng.integers(64, 2049))
            s = rng.standard_normal(T) * 0.9 ** np.arange(T)
            A = rng.standard_normal((T, 2))
            np.testing.assert_allclose(polyops._overlap_save(s, A, T), polyops._direct(s, A),
                                       atol=1e-10)

    def test_cutoff_drops_tail(self, rng):
        s = invert_series([1, 0.5], 200)
        A = rng.standard_normal((200, 1))
        approx = toeplitz_apply(s, A, cutoff=1e-12)
        np.testing.assert_allclose(approx, toeplitz_apply(s, A), atol=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            toeplitz_apply([1.0, 0.0], np.ones(3))

    def test_empty_columns(self):
        assert toeplitz_apply(np.ones(4), np.zeros((4, 0))).shape == (4, 0)

    @settings(max_examples=40, deadline=None)
    @given(a=st.lists(st.floats(-0.9, 0.9), min_size=0, max_size=3),
           b=st.lists(st.floats(-0.9, 0.9), min_size=0, max_size=3),
           T=st.integers(1, 150))
    def test_homomorphism(self, a, b, T):
        # Toeplitz image of a product equals the product of the images
        a = np.r_[1.0, a]
        b = np.r_[1.0, b]
        ab = np.convolve(a, b)
        A = np.random.default_rng(T).standard_normal((T, 2))

        def pad(c):
            out = np.zeros(T)
            out[:min(T, c.size)] = c[:T]
            return out

        lhs = toeplitz_apply(pad(ab), A)
        rhs = toeplitz_apply(pad(a), toeplitz_apply(pad(b), A))
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


class TestToeplitzDense:
    def test_matches_scipy(self):
        s = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(toeplitz_dense(s), linalg.toeplitz(s, np.zeros(3)))

    def test_inverse_of_theta(self, rng):
        th = random_theta(rng, 2)
        np.testing.assert_allclose(toeplitz_dense(invert_series(th, 20)) @ dense_theta(th, 20),
                                   np.eye(20), atol=1e-13)


def test_shift_down():
    A = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(shift_down(A, 1), [[0, 0], [0, 1], [2, 3]])
    np.testing.assert_array_equal(shift_down(A, 5), np.zeros((3, 2)))


class TestThetaInverseLags:
    def test_no_lags(self, rng):
        th = np.array([1, 0.5])
        X = rng.standard_normal((6, 2))
        (only,) = theta_inverse_lags(th, X, 0)
        np.testing.assert_allclose(only, linalg.solve_triangular(dense_theta(th, 6), X, lower=True))

    def test_impulse(self):
        out = theta_inverse_lags([1, 0.5], np.array([1.0, 0, 0, 0]), 1)
        np.testing.assert_allclose(out[1][:, 0], [1, -0.5, 0.25], atol=1e-15)

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_matches_direct_solve(self, rng, p):
        th = np.array([1, 0.5]) if p == 1 else random_theta(rng, 2)
        T = 5 if p == 1 else 40
        X = rng.standard_normal((T + p, 2))
        Th = dense_theta(th, T)
        out = theta_inverse_lags(th, X, p)
        assert len(out) == p + 1
        for i in range(p + 1):
            lagged = X[p - i:p - i + T]
            np.testing.assert_allclose(out[i], linalg.solve_triangular(Th, lagged, lower=True),
                                       atol=1e-12)

    def test_rejects_short_sample(self):
        with pytest.raises(ValueError):
            theta_inverse_lags([1, 0.2], np.ones((2, 1)), 2)
