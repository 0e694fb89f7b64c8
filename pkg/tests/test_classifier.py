import numpy as np
import pytest

from evorules.classifier import (
    Classifier,
    IntervalCondition,
    LocalModel,
    NotFittedError,
    UNFITTED_ERROR,
    build_feature_matrix,
    build_features,
    feature_count,
    feature_names,
    fit,
    local_argmax,
    local_predict,
    matches,
    render_rule,
)
from evorules.data import Dataset
from evorules.linalg import normal_equations_fit
from evorules.problems import frog_dataset


def full_range(dx):
    return IntervalCondition(np.full(dx, -1.0), np.full(dx, 1.0))


def make_model(coef, dx, da, intercept=0.0, include_linear=False):
    return LocalModel(intercept, np.asarray(coef, dtype=float), dx, da, include_linear)


class TestIntervalCondition:
    def test_full_range_matches_everything(self):
        c = Classifier(full_range(1))
        assert matches(c, [0.3])

    def test_boundary_inclusive(self):
        c = Classifier(IntervalCondition(np.array([0.0]), np.array([0.5])))
        assert matches(c, [0.5]) and matches(c, [0.0])

    def test_per_dimension_check(self):
        c = Classifier(
            IntervalCondition(np.array([0.2, -1.0]), np.array([0.4, 0.0]))
        )
        assert not matches(c, [0.3, 0.5])

    def test_dimension_mismatch(self):
        c = Classifier(full_range(2))
        with pytest.raises(ValueError, match="components"):
            matches(c, [0.1])

    def test_rejects_inverted_interval(self):
        with pytest.raises(ValueError, match="lower <= upper"):
            IntervalCondition(np.array([0.5]), np.array([0.2]))

    def test_widening_never_shrinks_match_set(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(-1, 1, (200, 3))
        for _ in range(50):
            draws = rng.uniform(-1, 1, (3, 2))
            cond = IntervalCondition(draws.min(1), draws.max(1))
            grow = rng.uniform(0, 0.5, 3)
            wider = IntervalCondition(
                np.maximum(cond.lower - grow, -1), np.minimum(cond.upper + grow, 1)
            )
            assert (cond.contains_batch(X) <= wider.contains_batch(X)).all()


class TestFeatures:
    def test_hand_evaluated_vector(self):
        # x^2, x*a, a^2 at x=0.5, a=0.2
        np.testing.assert_allclose(
            build_features([0.5], [0.2]), [0.25, 0.10, 0.04]
        )

    def test_counting_formula(self):
        assert feature_count(2, 1) == 2 * 3 // 2 + 2 + 1
        assert len(build_features([0.1, 0.2], [0.3])) == 6

    def test_zero_inputs_vanish(self):
        feats = build_features([0.0, 0.0], [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(feats, np.zeros(len(feats)))

    def test_linear_terms_appended(self):
        feats = build_features([0.5], [0.2], include_linear=True)
        np.testing.assert_allclose(feats, [0.25, 0.10, 0.04, 0.5, 0.2])

    def test_canonical_order(self):
        names = feature_names(2, 2)
        assert names == [
            "x1^2", "x1*x2", "x2^2",
            "x1*a1", "x1*a2", "x2*a1", "x2*a2",
            "a1^2", "a2^2",
        ]

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(-1, 1, (10, 3))
        A = rng.uniform(-1, 1, (10, 2))
        mat = build_feature_matrix(X, A, include_linear=True)
        for i in range(10):
            np.testing.assert_array_equal(
                mat[i], build_features(X[i], A[i], include_linear=True)
            )


class TestFit:
    def test_interpolation_regime_has_zero_error(self):
        # 3 examples, 3 features + intercept: plane through the points
        data = Dataset(
            np.array([[0.1], [0.5], [-0.4]]),
            np.array([[0.2], [-0.3], [0.9]]),
            np.array([1.0, 2.0, 3.0]),
        )
        c = fit(Classifier(full_range(1)), data)
        assert c.experience == 3
        assert c.train_error == pytest.approx(0.0, abs=1e-12)

    def test_zero_matches_gives_unfitted_sentinel(self):
        data = Dataset(np.array([[0.9]]), np.array([[0.0]]), np.array([1.0]))
        cond = IntervalCondition(np.array([-1.0]), np.array([0.0]))
        c = fit(Classifier(cond), data)
        assert not c.fitted
        assert c.experience == 0
        assert c.train_error == UNFITTED_ERROR

    def test_train_error_matches_oracle_refit(self):
        data = frog_dataset(50, np.random.default_rng(8))
        c = fit(Classifier(full_range(1)), data)
        feats = build_feature_matrix(data.X, data.A)
        intercept, w = normal_equations_fit(feats, data.q)
        preds = feats @ w + intercept
        oracle_mse = float(np.mean((preds - data.q) ** 2))
        assert c.train_error == pytest.approx(oracle_mse, abs=1e-9)
        np.testing.assert_allclose(c.model.coef, w, atol=1e-7)

    def test_fit_idempotent(self):
        data = frog_dataset(40, np.random.default_rng(2))
        cond = IntervalCondition(np.array([-0.8]), np.array([0.7]))
        a = fit(Classifier(cond), data)
        b = fit(a, data)
        np.testing.assert_array_equal(a.model.coef, b.model.coef)
        assert a.train_error == b.train_error

    def test_precomputed_features_match(self):
        data = frog_dataset(30, np.random.default_rng(5))
        feats = build_feature_matrix(data.X, data.A)
        cond = IntervalCondition(np.array([-0.5]), np.array([0.9]))
        a = fit(Classifier(cond), data)
        b = fit(Classifier(cond), data, features=feats)
        np.testing.assert_array_equal(a.model.coef, b.model.coef)


class TestLocalPredict:
    def test_constant_model(self):
        c = Classifier(full_range(1), make_model([0.0, 0.0, 0.0], 1, 1, intercept=1.7), 0.0, 1)
        assert local_predict(c, [0.3], [0.9]) == pytest.approx(1.7)

    def test_hand_evaluated_quadratic(self):
        # only a^2 coefficient: q = -a^2
        c = Classifier(full_range(1), make_model([0.0, 0.0, -1.0], 1, 1), 0.0, 1)
        assert local_predict(c, [0.1], [0.5]) == pytest.approx(-0.25)

    def test_unfitted_raises(self):
        c = Classifier(full_range(1))
        with pytest.raises(NotFittedError):
            local_predict(c, [0.0], [0.0])


class TestLocalArgmax:
    def test_downward_vertex(self):
        # slope term 0.4*x, curvature -1: vertex at 0.4*0.5/2 = 0.1
        c = Classifier(full_range(1), make_model([0.0, 0.4, -1.0], 1, 1), 0.0, 1)
        a = local_argmax(c, [0.5])
        assert a[0] == pytest.approx(0.1, abs=1e-12)
        grid = np.linspace(-1, 1, 20001)[:, None]
        preds = c.model.predict(np.full((20001, 1), 0.5), grid)
        assert local_predict(c, [0.5], a) >= preds.max() - 1e-9

    def test_upward_tie_breaks_positive(self):
        c = Classifier(full_range(1), make_model([0.0, 0.0, 1.0], 1, 1), 0.0, 1)
        assert local_argmax(c, [0.3])[0] == 1.0

    def test_vertex_clipped_to_box(self):
        # vertex at 4*1/(2*1) = 2, clipped to 1
        c = Classifier(full_range(1), make_model([0.0, 4.0, -1.0], 1, 1), 0.0, 1)
        assert local_argmax(c, [1.0])[0] == 1.0

    def test_flat_dimension_uses_slope_sign(self):
        c = Classifier(full_range(1), make_model([0.0, 2.0, 0.0], 1, 1), 0.0, 1)
        assert local_argmax(c, [-0.5])[0] == -1.0
        assert local_argmax(c, [0.5])[0] == 1.0
        assert local_argmax(c, [0.0])[0] == 0.0

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            local_argmax(Classifier(full_range(1)), [0.0])

    @pytest.mark.parametrize("seed", range(20))
    def test_beats_grid_search(self, seed):
        rng = np.random.default_rng(seed)
        dx = int(rng.integers(1, 4))
        da = int(rng.integers(1, 3))
        include_linear = bool(rng.integers(2))
        coef = rng.normal(size=feature_count(dx, da, include_linear))
        c = Classifier(
            full_range(dx),
            make_model(coef, dx, da, rng.normal(), include_linear),
            0.0,
            1,
        )
        x = rng.uniform(-1, 1, dx)
        best = local_predict(c, x, local_argmax(c, x))
        axes = [np.linspace(-1, 1, 2001)] * da
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, da)
        preds = c.model.predict(np.broadcast_to(x, (len(grid), dx)), grid)
        assert best >= preds.max() - 1e-9


class TestRendering:
    def test_one_line_per_rule(self):
        c = Classifier(
            IntervalCondition(np.array([-0.25]), np.array([0.75])),
            make_model([1.5, -0.002, 0.25], 1, 1, intercept=0.125),
            0.0123,
            42,
        )
        line = render_rule(c)
        assert line.startswith("IF x1 ∈ [-0.25, 0.75] THEN q ≈ ")
        assert "1.5*x1^2" in line and "0.002*x1*a1" in line and "0.25*a1^2" in line
        assert "(MSE=0.0123, n=42)" in line
        assert "\n" not in line

    def test_unfitted_rendering(self):
        line = render_rule(Classifier(full_range(2)))
        assert "unfitted" in line and "x2" in line

    def test_four_significant_digits(self):
        c = Classifier(
            full_range(1),
            make_model([0.1234567, 0.0, 0.0], 1, 1, intercept=9.876543),
            0.5,
            3,
        )
        line = render_rule(c)
        assert "9.877" in line and "0.1235*x1^2" in line
