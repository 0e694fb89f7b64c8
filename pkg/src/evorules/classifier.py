"""Local models: interval conditions over situation space with quadratic
regression heads.

A classifier is one if-then rule. The IF part is an axis-aligned box over
the situation components; the THEN part is a linear regression on a
restricted set of second-order features chosen so the best parametrization
under the local model has a closed form: the feature set contains no
cross terms between different parametrization dimensions, so the predicted
quality decomposes per parametrization component into independent
one-dimensional parabolas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .linalg import DEFAULT_RIDGE, ols_fit

# Training error assigned to classifiers that match nothing. Kept at the
# largest finite double so model files stay valid JSON.
UNFITTED_ERROR = float(np.finfo(np.float64).max)


class NotFittedError(RuntimeError):
    """Raised when a prediction is requested from an unfitted classifier."""


def feature_count(dx: int, da: int, include_linear: bool = False) -> int:
    n = dx * (dx + 1) // 2 + dx * da + da
    if include_linear:
        n += dx + da
    return n


def feature_names(dx: int, da: int, include_linear: bool = False) -> list[str]:
    """Names aligned with the canonical feature order of build_features."""
    names = []
    for i in range(dx):
        for j in range(i, dx):
            names.append(f"x{i + 1}^2" if i == j else f"x{i + 1}*x{j + 1}")
    for i in range(dx):
        for k in range(da):
            names.append(f"x{i + 1}*a{k + 1}")
    for k in range(da):
        names.append(f"a{k + 1}^2")
    if include_linear:
        names += [f"x{i + 1}" for i in range(dx)]
        names += [f"a{k + 1}" for k in range(da)]
    return names


def build_feature_matrix(X, A, include_linear: bool = False) -> np.ndarray:
    """Feature rows for a batch of (situation, parametrization) pairs.

    Canonical order: x_i*x_j for i <= j (i-major), then x_i*a_k (i-major),
    then a_k^2; with `include_linear`, the raw x and a components follow.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n, dx = X.shape
    da = A.shape[1]
    iu, ju = np.triu_indices(dx)
    xx = X[:, iu] * X[:, ju]
    xa = (X[:, :, None] * A[:, None, :]).reshape(n, dx * da)
    aa = A * A
    parts = [xx, xa, aa]
    if include_linear:
        parts += [X, A]
    return np.concatenate(parts, axis=1)


def build_features(x, a, include_linear: bool = False) -> np.ndarray:
    """Feature vector for a single (situation, parametrization) pair."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    return build_feature_matrix(x[None, :], a[None, :], include_linear)[0]


@dataclass(frozen=True)
class LocalModel:
    """Fitted regression head: intercept plus coefficients in canonical
    feature order."""

    intercept: float
    coef: np.ndarray
    dx: int
    da: int
    include_linear: bool = False

    def __post_init__(self):
        coef = np.asarray(self.coef, dtype=float)
        expected = feature_count(self.dx, self.da, self.include_linear)
        if coef.shape != (expected,):
            raise ValueError(
                f"expected {expected} coefficients for dx={self.dx}, "
                f"da={self.da}, got {coef.shape}"
            )
        if not (np.isfinite(self.intercept) and np.isfinite(coef).all()):
            raise ValueError("model coefficients must be finite")
        object.__setattr__(self, "coef", coef)

    # Coefficient blocks, sliced out of the flat vector.
    @property
    def w_xx(self) -> np.ndarray:
        return self.coef[: self.dx * (self.dx + 1) // 2]

    @property
    def w_xa(self) -> np.ndarray:
        start = self.dx * (self.dx + 1) // 2
        return self.coef[start : start + self.dx * self.da].reshape(self.dx, self.da)

    @property
    def w_aa(self) -> np.ndarray:
        start = self.dx * (self.dx + 1) // 2 + self.dx * self.da
        return self.coef[start : start + self.da]

    @property
    def w_x(self) -> np.ndarray:
        if not self.include_linear:
            return np.zeros(self.dx)
        start = self.dx * (self.dx + 1) // 2 + self.dx * self.da + self.da
        return self.coef[start : start + self.dx]

    @property
    def w_a(self) -> np.ndarray:
        if not self.include_linear:
            return np.zeros(self.da)
        return self.coef[-self.da :]

    def predict_features(self, features: np.ndarray) -> np.ndarray:
        return features @ self.coef + self.intercept

    def predict(self, X, A) -> np.ndarray:
        return self.predict_features(build_feature_matrix(X, A, self.include_linear))


@dataclass(frozen=True)
class IntervalCondition:
    """Axis-aligned closed box over situation space; lower_i <= upper_i.

    Components normally live in [-1, 1]; mutation with clipping disabled
    may push bounds outside, which only widens effective coverage since
    situations themselves stay normalized.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if (lower > upper).any():
            raise ValueError("interval needs lower <= upper in every dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dx(self) -> int:
        return len(self.lower)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != self.lower.shape:
            raise ValueError(
                f"situation has {x.shape} components, condition covers {self.lower.shape}"
            )
        return bool(((self.lower <= x) & (x <= self.upper)).all())

    def contains_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return ((self.lower <= X) & (X <= self.upper)).all(axis=1)


@dataclass(frozen=True)
class Classifier:
    """One rule: condition, optional fitted local model, and bookkeeping.

    `experience` counts the training examples matched at fit time;
    `train_error` is the mean squared error over those examples, or the
    UNFITTED_ERROR sentinel when nothing matched.
    """

    condition: IntervalCondition
    model: LocalModel | None = None
    train_error: float = UNFITTED_ERROR
    experience: int = 0

    @property
    def fitted(self) -> bool:
        return self.model is not None


def matches(classifier: Classifier, x) -> bool:
    """Closed-interval matching on the situation components only."""
    return classifier.condition.contains(x)


def fit(
    classifier: Classifier,
    train: Dataset,
    include_linear: bool = False,
    ridge_epsilon: float = DEFAULT_RIDGE,
    features: np.ndarray | None = None,
) -> Classifier:
    """Refit a classifier's local model on the training examples it matches.

    `features` may carry the precomputed feature matrix of the full
    training set (one row per example) to avoid rebuilding it for every
    classifier. With zero matched examples the classifier comes back
    unfitted and carries the worst-case error sentinel.
    """
    mask = classifier.condition.contains_batch(train.X)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return Classifier(classifier.condition)
    if features is None:
        feats = build_feature_matrix(train.X[idx], train.A[idx], include_linear)
    else:
        feats = features[idx]
    y = train.q[idx]
    intercept, coef = ols_fit(feats, y, ridge_epsilon)
    model = LocalModel(intercept, coef, train.dx, train.da, include_linear)
    residual = model.predict_features(feats) - y
    train_error = float(residual @ residual / idx.size)
    return Classifier(classifier.condition, model, train_error, int(idx.size))


def local_predict(classifier: Classifier, x, a) -> float:
    """Quality predicted by the classifier's own model, matching aside."""
    if not classifier.fitted:
        raise NotFittedError("cannot predict with an unfitted classifier")
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    return float(classifier.model.predict(x[None, :], a[None, :])[0])


def local_argmax_batch(classifier: Classifier, X) -> np.ndarray:
    """Per-situation maximizers of the local model over [-1, 1]^da.

    Without cross terms between parametrization dimensions the model is,
    for fixed x, a sum of independent parabolas u_k * a_k^2 + s_k * a_k.
    Downward parabolas take their vertex clipped to the box, upward ones
    the better box corner (+1 on ties), flat ones the sign of the slope.
    """
    if not classifier.fitted:
        raise NotFittedError("cannot compute a choice for an unfitted classifier")
    model = classifier.model
    X = np.atleast_2d(np.asarray(X, dtype=float))
    slope = X @ model.w_xa + model.w_a
    curv = model.w_aa
    out = np.empty_like(slope)
    down = curv < 0
    up = curv > 0
    flat = ~(down | up)
    if down.any():
        out[:, down] = np.clip(-slope[:, down] / (2.0 * curv[down]), -1.0, 1.0)
    if up.any():
        out[:, up] = np.where(slope[:, up] >= 0.0, 1.0, -1.0)
    if flat.any():
        out[:, flat] = np.sign(slope[:, flat])
    return out


def local_argmax(classifier: Classifier, x) -> np.ndarray:
    """Parametrization maximizing the local model for one situation."""
    x = np.asarray(x, dtype=float)
    return local_argmax_batch(classifier, x[None, :])[0]


def render_rule(classifier: Classifier) -> str:
    """One-line human-readable rendering, coefficients to 4 significant
    digits: IF <intervals> THEN q ~ <polynomial> (MSE=..., n=...)."""
    cond = classifier.condition
    parts = [
        f"x{i + 1} ∈ [{cond.lower[i]:.4g}, {cond.upper[i]:.4g}]"
        for i in range(cond.dx)
    ]
    head = "IF " + " AND ".join(parts)
    if not classifier.fitted:
        return head + " THEN q ≈ ? (unfitted, n=0)"
    model = classifier.model
    names = feature_names(model.dx, model.da, model.include_linear)
    body = f"{model.intercept:.4g}"
    for name, w in zip(names, model.coef):
        sign = "-" if w < 0 else "+"
        body += f" {sign} {abs(w):.4g}*{name}"
    return (
        head
        + f" THEN q ≈ {body} "
        + f"(MSE={classifier.train_error:.4g}, n={classifier.experience})"
    )
