"""Experiment orchestration: configuration, seed bookkeeping, training
runs, and model/metric serialization.

A run is fully determined by its configuration: the master run seed
expands into named per-purpose streams (holdout sampling, per-repetition
pool sampling, splitting, evolution) through SeedSequence spawn keys, so
adding a consumer never disturbs the draws of another.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .classifier import Classifier, IntervalCondition, LocalModel, UNFITTED_ERROR
from .data import Dataset, load_dataset_csv, save_dataset_csv, split_dataset
from .ga import GaConfig, Individual, evolve
from .problems import AmGaussProblem, FrogProblem, load_instance, save_instance

MODEL_FORMAT_VERSION = 1

# Spawn-key prefixes for the named seed streams.
_STREAM_HOLDOUT = 0
_STREAM_POOL = 1
_STREAM_SPLIT = 2
_STREAM_EVOLVE = 3


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown key, bad value)."""


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=tuple(key))
    )


def derive_seed_sequence(master_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=tuple(key))


@dataclass
class ExperimentConfig:
    """Everything a training run needs, GA hyperparameters included."""

    problem: str
    k: float
    problem_seed: int = 0
    n_train_pool: int = 100
    n_holdout: int = 1000
    validation_fraction: float = 0.5
    run_seed: int = 0
    n_repetitions: int = 1
    output_dir: str = "runs"
    oracle_restarts: int = 64
    oracle_tol: float = 1e-8
    train_csv: str = ""
    holdout_csv: str = ""
    instance_file: str = ""
    # GA hyperparameters (see GaConfig for semantics).
    population_size: int = 30
    elitists: int = 1
    initial_individual_size: int = 30
    one_fifth_factor: float = 1.05
    crossover_rate: float = 0.9
    initial_step_size: float = 2.0 / 1000.0
    generations: int = 100
    random_classifier_prob: float = 0.5
    clip_mutation: bool = True
    include_linear: bool = False

    def __post_init__(self):
        if self.problem not in ("frog", "am-gauss"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.n_train_pool < 2 or self.n_holdout < 1:
            raise ConfigError("data sizes must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie in (0, 1)")
        if self.n_repetitions < 1:
            raise ConfigError("need at least one repetition")
        self.ga_config()  # surfaces invalid GA values early

    def ga_config(self) -> GaConfig:
        try:
            return GaConfig(
                k=self.k,
                population_size=self.population_size,
                elitists=self.elitists,
                initial_individual_size=self.initial_individual_size,
                one_fifth_factor=self.one_fifth_factor,
                crossover_rate=self.crossover_rate,
                initial_step_size=self.initial_step_size,
                generations=self.generations,
                random_classifier_prob=self.random_classifier_prob,
                clip_mutation=self.clip_mutation,
                include_linear=self.include_linear,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> dict:
        """Flat config dump for model metadata; output paths excluded so
        identical runs in different directories stay byte-identical."""
        out = dataclasses.asdict(self)
        out.pop("output_dir")
        return out


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind == "bool":
        lowered = raw.strip().lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ConfigError(f"cannot read {raw!r} as a boolean for {key}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw.strip()


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build a config from string-keyed values, rejecting unknown keys."""
    values = {}
    for key, raw in mapping.items():
        name = key.replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[name] = _coerce(name, raw) if isinstance(raw, str) else raw
    missing = [k for k in ("problem", "k") if k not in values]
    if missing:
        raise ConfigError(f"missing required configuration keys: {missing}")
    return ExperimentConfig(**values)


def parse_config_file(path) -> dict:
    """Flat `key = value` text format; blank lines and # comments ignored."""
    mapping = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'key = value', got {line.rstrip()!r}"
                )
            key, value = stripped.split("=", 1)
            mapping[key.strip()] = value.strip()
    return mapping


def build_problem(config: ExperimentConfig):
    if config.problem == "frog":
        return FrogProblem()
    if config.instance_file:
        instance = load_instance(config.instance_file)
    else:
        from .problems import am_gauss_generate

        instance = am_gauss_generate(config.problem_seed)
    return AmGaussProblem(instance, config.oracle_restarts, config.oracle_tol)


# ---------------------------------------------------------------------------
# Model files


def _model_payload(individual: Individual, dx: int, da: int,
                   include_linear: bool, metadata: dict) -> dict:
    rules = []
    for c in individual.classifiers:
        entry = {
            "lower": [float(v) for v in c.condition.lower],
            "upper": [float(v) for v in c.condition.upper],
            "train_error": float(c.train_error),
            "experience": int(c.experience),
        }
        if c.fitted:
            m = c.model
            entry["intercept"] = float(m.intercept)
            entry["w_xx"] = [float(v) for v in m.w_xx]
            entry["w_xa"] = [[float(v) for v in row] for row in m.w_xa]
            entry["w_aa"] = [float(v) for v in m.w_aa]
            if include_linear:
                entry["w_x"] = [float(v) for v in m.w_x]
                entry["w_a"] = [float(v) for v in m.w_a]
        rules.append(entry)
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "metadata": metadata,
        "dx": dx,
        "da": da,
        "include_linear": include_linear,
        "valid_error": float(individual.valid_error),
        "classifiers": rules,
    }


def save_model(path, individual: Individual, dx: int, da: int,
               include_linear: bool, metadata: dict) -> None:
    payload = _model_payload(individual, dx, da, include_linear, metadata)
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


def load_model(path) -> tuple[Individual, dict]:
    """Read a model file back; raises ValueError with the parse offset on
    corrupt JSON."""
    with open(path) as fh:
        text = fh.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: parse error at offset {exc.pos}: {exc.msg}") from exc
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"{path}: unsupported format_version {payload.get('format_version')!r}"
        )
    dx, da = payload["dx"], payload["da"]
    include_linear = payload["include_linear"]
    classifiers = []
    for entry in payload["classifiers"]:
        condition = IntervalCondition(
            np.asarray(entry["lower"], dtype=float),
            np.asarray(entry["upper"], dtype=float),
        )
        if "intercept" in entry:
            blocks = [
                np.asarray(entry["w_xx"], dtype=float),
                np.asarray(entry["w_xa"], dtype=float).ravel(),
                np.asarray(entry["w_aa"], dtype=float),
            ]
            if include_linear:
                blocks += [
                    np.asarray(entry["w_x"], dtype=float),
                    np.asarray(entry["w_a"], dtype=float),
                ]
            model = LocalModel(
                entry["intercept"], np.concatenate(blocks), dx, da, include_linear
            )
            classifiers.append(
                Classifier(condition, model, entry["train_error"], entry["experience"])
            )
        else:
            classifiers.append(Classifier(condition))
    individual = Individual(tuple(classifiers), payload["valid_error"])
    return individual, payload["metadata"]


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Metric CSV


def write_metrics_csv(path, rows) -> None:
    """rows: iterable of (run, GenerationMetrics); floats emitted with repr
    so reruns are byte-identical."""
    header = ["run"] + metrics_mod.GenerationMetrics.field_names()
    lines = [",".join(header)]
    for run, row in rows:
        values = [str(run)]
        for name in metrics_mod.GenerationMetrics.field_names():
            value = getattr(row, name)
            values.append(repr(float(value)) if isinstance(value, float) else str(value))
        lines.append(",".join(values))
    _atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Training runs


@dataclass
class RepetitionResult:
    repetition: int
    best: Individual
    metrics: list


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    repetitions: list[RepetitionResult] = field(default_factory=list)

    def final_metrics(self) -> list:
        return [rep.metrics[-1] for rep in self.repetitions if rep.metrics]


def run_experiment(config: ExperimentConfig, log=None) -> ExperimentResult:
    """Run all repetitions of an experiment and write its artifacts.

    Outputs under config.output_dir: holdout.csv, metrics.csv, one
    model_run<r>.json per repetition, and the problem instance file for
    generated landscapes. Returns the in-memory results as well.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(config)
    ga_config = config.ga_config()

    if config.holdout_csv:
        holdout = load_dataset_csv(config.holdout_csv)
    else:
        holdout = problem.dataset(
            config.n_holdout, derive_rng(config.run_seed, _STREAM_HOLDOUT)
        )
    save_dataset_csv(holdout, out / "holdout.csv")
    if isinstance(problem, AmGaussProblem):
        save_instance(problem.instance, out / "instance.txt")

    opt = metrics_mod.optimal_choices(problem, holdout.X)

    result = ExperimentResult(config)
    all_rows = []
    for rep in range(config.n_repetitions):
        if config.train_csv:
            pool = load_dataset_csv(config.train_csv)
        else:
            pool = problem.dataset(
                config.n_train_pool, derive_rng(config.run_seed, _STREAM_POOL, rep)
            )
        train, valid = split_dataset(
            pool, config.validation_fraction,
            derive_rng(config.run_seed, _STREAM_SPLIT, rep),
        )

        rows: list = []

        def observe(report, _train=train, _valid=valid, _rows=rows):
            row = metrics_mod.generation_metrics(
                report.generation, report.elitist, report.step_size,
                _train, _valid, holdout, problem, opt,
            )
            _check_finite(row, rep)
            _rows.append(row)

        best, _ = evolve(
            ga_config, train, valid,
            derive_seed_sequence(config.run_seed, _STREAM_EVOLVE, rep),
            observers=[observe],
        )

        metadata = {
            "config": config.echo(),
            "repetition": rep,
            "generations": config.generations,
            "problem": config.problem,
            "problem_seed": config.problem_seed,
            "run_seed": config.run_seed,
        }
        save_model(
            out / f"model_run{rep}.json", best,
            problem.dx, problem.da, config.include_linear, metadata,
        )
        all_rows.extend((rep, row) for row in rows)
        result.repetitions.append(RepetitionResult(rep, best, rows))
        if log is not None and rows:
            last = rows[-1]
            log(
                f"run {rep}: holdout quality RMSE {last.rmse_quality_holdout:.4g}, "
                f"action MSE {last.mse_action_holdout:.4g}, "
                f"{last.n_classifiers_elitist} classifiers"
            )

    write_metrics_csv(out / "metrics.csv", all_rows)
    return result


def _check_finite(row, rep: int) -> None:
    for name in metrics_mod.GenerationMetrics.field_names():
        value = getattr(row, name)
        if not np.isfinite(value):
            raise RuntimeError(
                f"non-finite metric {name}={value} in repetition {rep}, "
                f"generation {row.generation}; aborting"
            )


# ---------------------------------------------------------------------------
# Evaluation reports


def evaluate_model(individual: Individual, holdout: Dataset, problem) -> dict:
    """Holdout quality/choice metrics for a single model."""
    opt = metrics_mod.optimal_choices(problem, holdout.X)
    report = {
        "rmse_quality_holdout": metrics_mod.quality_rmse(individual, holdout),
        "rmse_choice_gap": metrics_mod.choice_gap(individual, holdout.X, problem, opt),
        "mse_action": metrics_mod.action_mse(individual, holdout.X, problem, opt),
        "unmatched_fraction": metrics_mod.unmatched_count(individual, holdout) / len(holdout),
        "n_classifiers": len(individual),
    }
    return report
