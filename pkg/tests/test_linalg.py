import numpy as np
import pytest

from evorules.linalg import normal_equations_fit, ols_fit, random_psd_2x2


class TestOlsFit:
    def test_exact_linear_data(self):
        intercept, w = ols_fit(np.array([[1.0], [2.0], [3.0]]), np.array([2.0, 4.0, 6.0]))
        assert intercept == pytest.approx(0.0, abs=1e-9)
        assert w[0] == pytest.approx(2.0, abs=1e-9)

    def test_degenerate_rank_still_predicts(self):
        # constant column: intercept and weight are not identified, the
        # prediction intercept + w*1 still is
        X = np.ones((3, 1))
        intercept, w = ols_fit(X, np.array([5.0, 5.0, 5.0]), ridge_epsilon=1e-8)
        assert intercept + w[0] == pytest.approx(5.0, abs=1e-6)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(42)
        X = rng.normal(size=(20, 4))
        y = rng.normal(size=20)
        got = ols_fit(X, y, ridge_epsilon=0.0)
        want = normal_equations_fit(X, y)
        assert got[0] == pytest.approx(want[0], abs=1e-8)
        np.testing.assert_allclose(got[1], want[1], atol=1e-8)

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError, match="zero examples"):
            ols_fit(np.empty((0, 2)), np.empty(0))

    def test_underdetermined_fits_through_points(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(3, 6))
        y = rng.normal(size=3)
        intercept, w = ols_fit(X, y)
        np.testing.assert_allclose(X @ w + intercept, y, atol=1e-4)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            X = rng.normal(size=(30, 5))
            y = rng.normal(size=30)
            intercept, w = ols_fit(X, y, ridge_epsilon=0.0)
            residual = y - (X @ w + intercept)
            np.testing.assert_allclose(X.T @ residual, 0.0, atol=1e-6)
            assert residual.sum() == pytest.approx(0.0, abs=1e-6)


class TestRandomPsd2x2:
    def test_zero_eigenvalue_range_gives_zero_matrix(self):
        m = random_psd_2x2(np.random.default_rng(0), 0.0, 0.0)
        np.testing.assert_allclose(m, np.zeros((2, 2)), atol=1e-15)

    def test_axis_aligned_case(self):
        class FixedRng:
            def uniform(self, low, high, size=None):
                if size == 2:
                    return np.array([2.0, 5.0])
                return 0.0  # rotation angle

        m = random_psd_2x2(FixedRng(), 0.0, 30.0)
        np.testing.assert_allclose(m, np.diag([2.0, 5.0]), atol=1e-12)

    def test_eigenvalues_in_range(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            m = random_psd_2x2(rng, 0.0, 30.0)
            np.testing.assert_allclose(m, m.T, atol=1e-12)
            eig = np.linalg.eigvalsh(m)
            assert (eig >= -1e-9).all() and (eig <= 30.0 + 1e-9).all()

    def test_quadratic_form_non_negative(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            m = random_psd_2x2(rng, 0.0, 30.0)
            v = rng.normal(size=2)
            assert v @ m @ v >= -1e-12

    def test_rejects_bad_range(self):
        with pytest.raises(ValueError):
            random_psd_2x2(np.random.default_rng(0), 5.0, 1.0)
