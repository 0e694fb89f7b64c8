"""Evolutionary interval-rule regression.

Learns a population of human-readable rules, each pairing an interval
condition over situation space with a small quadratic model, and mixes
them into a global approximation of a quality function q(x, a). From that
approximation the system predicts both quality values and, per situation,
the parametrization expected to maximize quality.
"""

from .classifier import (
    Classifier,
    IntervalCondition,
    LocalModel,
    NotFittedError,
    UNFITTED_ERROR,
    build_features,
    build_feature_matrix,
    fit,
    local_argmax,
    local_predict,
    matches,
    render_rule,
)
from .data import (
    BoundsSpec,
    Dataset,
    Example,
    denormalize,
    load_dataset_csv,
    normalize,
    save_dataset_csv,
    split_dataset,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    config_from_mapping,
    evaluate_model,
    load_model,
    parse_config_file,
    run_experiment,
    save_model,
)
from .ga import (
    FitContext,
    GaConfig,
    GenerationReport,
    Individual,
    StepSizeState,
    adapt_step_size,
    crossover,
    evolve,
    init_population,
    mutate,
    random_classifier,
    rank_population,
    tournament,
)
from .linalg import ols_fit, random_psd_2x2
from .metrics import (
    GenerationMetrics,
    action_mse,
    choice_gap,
    generation_metrics,
    mse,
    optimal_choices,
    quality_rmse,
    rmse,
    unmatched_count,
)
from .mixing import (
    match_set,
    mix_weights,
    predict_parametrization,
    predict_parametrization_batch,
    predict_quality,
    predict_quality_batch,
)
from .problems import (
    AmGaussInstance,
    AmGaussProblem,
    FrogProblem,
    am_gauss_dataset,
    am_gauss_generate,
    am_gauss_gradient,
    am_gauss_quality,
    am_gauss_quality_batch,
    frog_dataset,
    frog_optimal,
    frog_quality,
    load_instance,
    oracle_argmax,
    save_instance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
