import numpy as np
import pytest
from scipy import linalg

from svarma.kernel import (build_kernel, build_lambda, build_sigma, inner_product_K,
                           log_det_kbar, presample_block, szego_limit)
from svarma.oracle import (dense_k_matrix, dense_lambda, dense_presample, dense_sigma,
                           dense_theta)

from conftest import random_theta

LAM3 = np.array([0.5, -0.25, 0.125])


class TestPresample:
    def test_block_layout(self):
        B = presample_block([1, 0.1, 0.2, 0.3])
        np.testing.assert_array_equal(B, [[0.3, 0.2, 0.1], [0, 0.3, 0.2], [0, 0, 0.3]])

    def test_oracle_derivation_agrees(self):
        th = [1, 0.1, 0.2, 0.3]
        np.testing.assert_array_equal(dense_presample(th, 5)[:3], presample_block(th))
        assert not dense_presample(th, 5)[3:].any()


class TestBuildLambda:
    def test_first_order(self):
        np.testing.assert_allclose(build_lambda([1, 0.5], 3)[:, 0], LAM3, atol=1e-15)

    def test_vanishing_coefficient(self):
        np.testing.assert_array_equal(build_lambda([1, 0.0], 3), np.zeros((3, 1)))

    def test_second_order_matches_dense(self):
        np.testing.assert_allclose(build_lambda([1, 0.3, 0.1], 4), dense_lambda([1, 0.3, 0.1], 4),
                                   atol=1e-15)

    def test_random_against_dense(self, rng):
        for q in range(1, 5):
            th = random_theta(rng, q)
            T = int(rng.integers(q, 64))
            np.testing.assert_allclose(build_lambda(th, T), dense_lambda(th, T), atol=1e-12)

    def test_q_zero(self):
        assert build_lambda([1.0], 5).shape == (5, 0)

    def test_short_sample_rejected(self):
        with pytest.raises(ValueError):
            build_lambda([1, 0.1, 0.1, 0.1], 2)


class TestBuildKernel:
    def test_zero_lambda(self):
        h = build_kernel(np.zeros((4, 1)))
        np.testing.assert_array_equal(h.kbar, [[1.0]])
        N = np.arange(8.0).reshape(4, 2)
        np.testing.assert_allclose(inner_product_K(h, N, N), N.T @ N)

    def test_kbar_value(self):
        h = build_kernel(LAM3[:, None])
        np.testing.assert_allclose(h.kbar, [[1.328125]], rtol=0, atol=1e-15)

    def test_woodbury_random(self, rng):
        lam = rng.standard_normal((6, 2))
        h = build_kernel(lam)
        K = np.eye(6) - lam @ np.linalg.solve(h.kbar, lam.T)
        np.testing.assert_allclose((np.eye(6) + lam @ lam.T) @ K, np.eye(6), atol=1e-12)

    def test_kbar_spectrum(self, rng):
        h = build_kernel(build_lambda(random_theta(rng, 3), 40))
        assert np.min(np.linalg.eigvalsh(h.kbar)) >= 1.0 - 1e-12
        np.testing.assert_allclose(h.chol @ h.chol.T, h.kbar, rtol=1e-13)

    def test_nonfinite_raises(self):
        with pytest.raises(FloatingPointError):
            build_kernel(np.array([[np.inf], [0.0]]))


class TestInnerProduct:
    def test_unit_vector(self):
        h = build_kernel(build_lambda([1, 0.5], 3))
        e1 = np.array([[1.0], [0], [0]])
        np.testing.assert_allclose(inner_product_K(h, e1, e1), [[1 - 0.25 / 1.328125]], atol=1e-15)
        assert abs(1 - 0.25 / 1.328125 - 0.8117647058823529) < 1e-15

    def test_matches_dense_solve(self, rng):
        th = random_theta(rng, 2)
        lam = build_lambda(th, 32)
        h = build_kernel(lam)
        N = rng.standard_normal((32, 3))
        M = rng.standard_normal((32, 2))
        expected = N.T @ np.linalg.solve(np.eye(32) + lam @ lam.T, M)
        np.testing.assert_allclose(inner_product_K(h, N, M), expected, atol=1e-10)

    def test_cholesky_form_agrees(self, rng):
        # projected evaluation equals N'M - (C^-1 lam'N)'(C^-1 lam'M)
        lam = build_lambda(random_theta(rng, 3), 50)
        h = build_kernel(lam)
        N = rng.standard_normal((50, 2))
        np.testing.assert_allclose(inner_product_K(h, N, N),
                                   N.T @ N - h.whiten(N).T @ h.whiten(N), atol=1e-12)

    def test_row_mismatch(self):
        h = build_kernel(np.zeros((3, 1)))
        with pytest.raises(ValueError):
            inner_product_K(h, np.ones((2, 1)), np.ones((3, 1)))


class TestSigma:
    def test_first_order(self):
        S = build_sigma([1, 0.5], 3)
        np.testing.assert_allclose(S.gamma, [1.25, 0.5])
        assert abs(np.linalg.det(S.to_dense()) - 1.328125) < 1e-12

    def test_identity(self):
        np.testing.assert_array_equal(build_sigma([1.0], 7).to_dense(), np.eye(7))

    def test_second_order_gammas(self):
        np.testing.assert_allclose(build_sigma([1, 0.3, 0.1], 5).gamma, [1.10, 0.33, 0.1],
                                   atol=1e-15)

    def test_band_equals_factored_form(self, rng):
        th = random_theta(rng, 4, hi=1.5)
        np.testing.assert_allclose(build_sigma(th, 30).to_dense(), dense_sigma(th, 30), atol=1e-12)

    def test_positive_definite_any_theta(self, rng):
        th = np.r_[1.0, rng.uniform(-3, 3, 3)]
        assert np.min(np.linalg.eigvalsh(build_sigma(th, 25).to_dense())) > 0

    def test_scaled(self):
        np.testing.assert_allclose(build_sigma([1, 0.5], 3).scaled(4).gamma, [5.0, 2.0])


class TestLogDet:
    def test_zero_lambda(self):
        assert log_det_kbar(build_kernel(np.zeros((5, 2)))) == 0.0

    def test_first_order(self):
        h = build_kernel(build_lambda([1, 0.5], 3))
        assert abs(log_det_kbar(h) - np.log(1.328125)) < 1e-14

    def test_dense_sigma(self):
        th = [1, 0.3, 0.1]
        dense = np.linalg.slogdet(build_sigma(th, 50).to_dense())[1]
        assert abs(log_det_kbar(build_kernel(build_lambda(th, 50))) - dense) < 1e-9


class TestIdentities:
    """Exact matrix identities relating Sigma_T, Theta_T and K."""

    def test_sigma_inverse_and_determinant(self, rng):
        for _ in range(30):
            q = int(rng.integers(1, 5))
            T = int(rng.integers(q, 65))
            th = random_theta(rng, q)
            Th_inv = np.linalg.inv(dense_theta(th, T))
            K = dense_k_matrix(th, T)
            S = build_sigma(th, T).to_dense()
            np.testing.assert_allclose(Th_inv.T @ K @ Th_inv, np.linalg.inv(S), atol=1e-9)
            h = build_kernel(build_lambda(th, T))
            ld_S = np.linalg.slogdet(S)[1]
            assert abs(np.expm1(log_det_kbar(h) - ld_S)) < 1e-9
            # det(Kbar) det(K) = 1
            assert abs(log_det_kbar(h) + np.linalg.slogdet(K)[1]) < 1e-9

    def test_k_matrix_example(self):
        K = dense_k_matrix([1, 0.5], 3)
        np.testing.assert_allclose(K, np.eye(3) - np.outer(LAM3, LAM3) / 1.328125, atol=1e-15)
        assert np.allclose(dense_k_matrix([1, 0.0, 0.0], 4), np.eye(4))

    def test_k_spectrum(self, rng):
        K = dense_k_matrix(random_theta(rng, 3), 40)
        w = np.linalg.eigvalsh(K)
        assert w.min() > 0 and w.max() <= 1 + 1e-12

    def test_projection_positivity(self, rng):
        for _ in range(20):
            T = int(rng.integers(8, 65))
            K = dense_k_matrix(random_theta(rng, 3), T)
            M = rng.standard_normal((T, int(rng.integers(1, 5))))
            KM = K @ M
            P = K - KM @ np.linalg.solve(M.T @ KM, KM.T)
            assert np.min(np.linalg.eigvalsh(0.5 * (P + P.T))) >= -1e-10

    def test_first_order_closed_form(self):
        for t1 in (0.5, -0.8, 0.3):
            for T in range(1, 51):
                expected = sum(t1 ** (2 * i) for i in range(T + 1))
                got = np.exp(log_det_kbar(build_kernel(build_lambda([1, t1], T))))
                assert abs(got - expected) <= 1e-12 * expected


class TestSzego:
    def test_first_order(self):
        assert szego_limit([1, 0.5]) == pytest.approx(0.75, abs=1e-15)

    def test_trivial(self):
        assert szego_limit([1.0]) == 1.0

    def test_imaginary_pair(self):
        # ((1 + t2)^2 - t1^2)(1 - t2)^2 with t1 = 0, t2 = 1/16
        expected = 1.0625 ** 2 * 0.9375 ** 2
        assert szego_limit([1, 0, 0.0625]) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.9922027587890625, abs=1e-16)
        S = build_sigma([1, 0, 0.0625], 500).to_dense()
        assert abs(np.exp(-np.linalg.slogdet(S)[1]) - expected) < 1e-12

    def test_second_order_formula(self, rng):
        for _ in range(10):
            th = random_theta(rng, 2, hi=0.8)
            t1, t2 = th[1:]
            closed = ((1 + t2) ** 2 - t1 ** 2) * (1 - t2) ** 2
            assert szego_limit(th) == pytest.approx(closed, rel=1e-12)

    def test_tabulated_second_order_entry_disagrees(self):
        # the short-hand (1 - t1^2)(1 - t2) does not match det Sigma_T
        th = [1, 0.4, 0.3]
        limit = 1.0 / np.exp(log_det_kbar(build_kernel(build_lambda(th, 400))))
        assert limit == pytest.approx(szego_limit(th), abs=1e-12)
        assert abs(limit - (1 - 0.4 ** 2) * (1 - 0.3)) > 0.1

    def test_convergence(self, rng):
        for _ in range(20):
            th = random_theta(rng, int(rng.integers(1, 5)), hi=0.8)
            det = np.exp(log_det_kbar(build_kernel(build_lambda(th, 200))))
            assert abs(1 / det - szego_limit(th)) <= 1e-6

    def test_not_invertible(self):
        with pytest.raises(ValueError):
            szego_limit([1, 1.5])
