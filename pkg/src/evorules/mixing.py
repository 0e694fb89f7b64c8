"""Combine matching classifiers into system-level predictions.

Weights derive from training-set goodness of fit: every matching
classifier's error is shifted by one (avoiding zero terms), inverted, and
normalized over the match set, so weights always sum to one and lower
error means more say. Because the error sum runs over the match set, a
classifier's weight depends on which other classifiers match the query.

A situation no fitted classifier matches is a coverage gap: predictions
fall back to 0.0 (quality) or the zero vector (parametrization) and the
accompanying flag reports the gap to the caller.
"""

from __future__ import annotations

import numpy as np

from .classifier import Classifier, build_feature_matrix, local_argmax_batch

DEFAULT_QUALITY = 0.0


def _classifiers(individual) -> list[Classifier]:
    return list(getattr(individual, "classifiers", individual))


def match_set(individual, x) -> list[Classifier]:
    """Fitted classifiers matching x, in population order."""
    return [c for c in _classifiers(individual) if c.fitted and c.condition.contains(x)]


def mix_weights(errors) -> np.ndarray:
    """Normalized goodness-of-fit weights for one match set.

    errors are the training MSEs of the matching classifiers; the chain is
    E = sum(e + 1), g' = E / (e + 1), g = g' / sum(g').
    """
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("cannot mix an empty match set")
    if (errors < 0).any() or not np.isfinite(errors).all():
        raise ValueError("errors must be finite and non-negative")
    shifted = errors + 1.0
    raw = shifted.sum() / shifted
    return raw / raw.sum()


def predict_quality(individual, x, a) -> tuple[float, bool]:
    """Mixed quality prediction for one (situation, parametrization) pair.

    Returns (value, covered); an uncovered situation yields the default
    prediction 0.0 with covered=False.
    """
    matched = match_set(individual, x)
    if not matched:
        return DEFAULT_QUALITY, False
    weights = mix_weights([c.train_error for c in matched])
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    locals_ = np.array(
        [c.model.predict(x[None, :], a[None, :])[0] for c in matched]
    )
    return float(weights @ locals_), True


def predict_parametrization(individual, x, da: int | None = None) -> tuple[np.ndarray, bool]:
    """Mixed parametrization choice for one situation.

    The per-classifier maximizers are combined with the same weights as
    quality predictions; a convex combination of points in [-1, 1]^da
    stays in the box, the clip only guards rounding. Uncovered situations
    yield the zero vector with covered=False.
    """
    x = np.asarray(x, dtype=float)
    matched = match_set(individual, x)
    if not matched:
        return np.zeros(da if da is not None else _infer_da(individual)), False
    weights = mix_weights([c.train_error for c in matched])
    choices = np.stack([local_argmax_batch(c, x[None, :])[0] for c in matched])
    return np.clip(weights @ choices, -1.0, 1.0), True


def _infer_da(individual) -> int:
    for c in _classifiers(individual):
        if c.fitted:
            return c.model.da
    return 0


def predict_quality_batch(individual, X, A, features=None):
    """Vectorized quality predictions for aligned batches X (n, dx) and
    A (n, da).

    `features` may carry precomputed feature rows for (X, A). Returns
    (predictions, covered) where uncovered entries hold the default 0.0.
    """
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    n = len(X)
    fitted = [c for c in _classifiers(individual) if c.fitted]
    if not fitted:
        return np.full(n, DEFAULT_QUALITY), np.zeros(n, dtype=bool)
    if features is None:
        features = build_feature_matrix(X, A, fitted[0].model.include_linear)
    masks = np.stack([c.condition.contains_batch(X) for c in fitted])
    shifted = np.array([c.train_error for c in fitted]) + 1.0
    raw = np.where(masks, (masks * shifted[:, None]).sum(axis=0) / shifted[:, None], 0.0)
    total = raw.sum(axis=0)
    covered = total > 0.0
    locals_ = np.stack([c.model.predict_features(features) for c in fitted])
    mixed = (raw * locals_).sum(axis=0)
    out = np.full(n, DEFAULT_QUALITY)
    np.divide(mixed, total, out=out, where=covered)
    return out, covered


def predict_parametrization_batch(individual, X, da: int | None = None):
    """Vectorized parametrization choices for a batch of situations.

    Returns (choices, covered); uncovered rows hold the zero vector.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    fitted = [c for c in _classifiers(individual) if c.fitted]
    if not fitted:
        return np.zeros((n, da if da is not None else 0)), np.zeros(n, dtype=bool)
    da = fitted[0].model.da
    masks = np.stack([c.condition.contains_batch(X) for c in fitted])
    shifted = np.array([c.train_error for c in fitted]) + 1.0
    raw = np.where(masks, (masks * shifted[:, None]).sum(axis=0) / shifted[:, None], 0.0)
    total = raw.sum(axis=0)
    covered = total > 0.0
    choices = np.stack([local_argmax_batch(c, X) for c in fitted])
    mixed = np.einsum("cn,cnk->nk", raw, choices)
    out = np.zeros((n, da))
    np.divide(mixed, total[:, None], out=out, where=covered[:, None])
    return np.clip(out, -1.0, 1.0), covered
