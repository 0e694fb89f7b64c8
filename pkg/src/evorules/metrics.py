"""Evaluation quantities: prediction errors, choice quality gaps,
action-space errors, and coverage counts."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import mixing
from .data import Dataset, denormalize


def mse(predictions, targets) -> float:
    """Mean squared difference; raises on empty input."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError("prediction and target shapes differ")
    if predictions.size == 0:
        raise ValueError("cannot average zero residuals")
    diff = predictions - targets
    return float(diff.ravel() @ diff.ravel() / diff.size)


def rmse(predictions, targets) -> float:
    return float(np.sqrt(mse(predictions, targets)))


def unmatched_count(individual, data: Dataset) -> int:
    """Number of examples whose situation no fitted classifier matches."""
    _, covered = mixing.predict_quality_batch(individual, data.X, data.A)
    return int((~covered).sum())


@dataclass(frozen=True)
class OptimalChoices:
    """Frozen ground truth for a set of situations: the true best
    parametrization (native units) and the quality it achieves."""

    a_native: np.ndarray
    q: np.ndarray


def optimal_choices(problem, X_norm) -> OptimalChoices:
    """Evaluate the problem's oracle once for a batch of normalized
    situations; the result is reusable across generations."""
    X_native = denormalize(X_norm, problem.bounds.x_bounds)
    a_native = problem.optimal_parametrization(X_native)
    q = np.asarray(problem.quality(X_native, a_native), dtype=float)
    return OptimalChoices(np.atleast_2d(a_native), q)


def predicted_choices_native(individual, X_norm, problem) -> np.ndarray:
    """Model parametrization choices for normalized situations, mapped to
    native units (coverage gaps choose the box center)."""
    choices, _ = mixing.predict_parametrization_batch(
        individual, X_norm, da=problem.da
    )
    return denormalize(choices, problem.bounds.a_bounds)


def choice_gap(individual, X_norm, problem, opt: OptimalChoices | None = None) -> float:
    """Root mean squared quality shortfall of the model's choices.

    Per situation the gap is q(x, a_best) - q(x, a_chosen) under the TRUE
    quality function; `opt` may carry precomputed ground truth.
    """
    if opt is None:
        opt = optimal_choices(problem, X_norm)
    X_native = denormalize(X_norm, problem.bounds.x_bounds)
    chosen = predicted_choices_native(individual, X_norm, problem)
    achieved = np.asarray(problem.quality(X_native, chosen), dtype=float)
    gaps = opt.q - achieved
    return float(np.sqrt(gaps @ gaps / len(gaps)))


def action_mse(individual, X_norm, problem, opt: OptimalChoices | None = None) -> float:
    """Mean squared distance between chosen and truly optimal
    parametrizations, in native units."""
    if opt is None:
        opt = optimal_choices(problem, X_norm)
    chosen = predicted_choices_native(individual, X_norm, problem)
    diff = chosen - opt.a_native
    return float((diff * diff).sum(axis=1).mean())


@dataclass(frozen=True)
class GenerationMetrics:
    """One row of the per-generation metric history."""

    generation: int
    rmse_quality_train: float
    rmse_quality_valid: float
    rmse_quality_holdout: float
    rmse_choice_gap_holdout: float
    mse_action_holdout: float
    n_classifiers_elitist: int
    unmatched_train: int
    step_size: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def quality_rmse(individual, data: Dataset) -> float:
    """RMSE of mixed quality predictions over a dataset (coverage gaps
    predicted as the 0.0 default)."""
    preds, _ = mixing.predict_quality_batch(individual, data.X, data.A)
    return rmse(preds, data.q)


def generation_metrics(generation: int, elitist, step_size: float,
                       train: Dataset, valid: Dataset, holdout: Dataset,
                       problem, opt: OptimalChoices) -> GenerationMetrics:
    """Assemble the full metric row for one generation's elitist."""
    return GenerationMetrics(
        generation=generation,
        rmse_quality_train=quality_rmse(elitist, train),
        rmse_quality_valid=quality_rmse(elitist, valid),
        rmse_quality_holdout=quality_rmse(elitist, holdout),
        rmse_choice_gap_holdout=choice_gap(elitist, holdout.X, problem, opt),
        mse_action_holdout=action_mse(elitist, holdout.X, problem, opt),
        n_classifiers_elitist=len(elitist),
        unmatched_train=unmatched_count(elitist, train),
        step_size=step_size,
    )
