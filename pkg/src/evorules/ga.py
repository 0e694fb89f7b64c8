"""Generational genetic algorithm over variable-length classifier sets.

Individuals are whole candidate models (lists of classifiers); the GA
optimizes their conditions while the classifier module refits local models
to whatever each condition matches. Fitness is the pairwise tournament
relation trading validation error against rule-set length; a total order
for elitism is recovered by round-robin win counting.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import mixing
from .classifier import Classifier, IntervalCondition, build_feature_matrix, fit
from .data import Dataset
from .linalg import DEFAULT_RIDGE


@dataclass
class GaConfig:
    """Run hyperparameters; `k` weighs complexity against error in the
    tournament and has no sensible problem-independent default."""

    k: float
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
    ridge_epsilon: float = DEFAULT_RIDGE

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise ValueError("k must lie in [0, 1]")
        if not 0 <= self.elitists < self.population_size:
            raise ValueError("need 0 <= elitists < population_size")
        if self.initial_individual_size < 1:
            raise ValueError("initial individuals need at least one classifier")
        for name in ("crossover_rate", "random_classifier_prob"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.initial_step_size <= 0 or self.one_fifth_factor <= 0:
            raise ValueError("step size and update factor must be positive")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")


@dataclass(frozen=True)
class StepSizeState:
    """Shared mutation step size plus the success statistics of the
    current generation."""

    s: float
    success_count: int = 0
    trial_count: int = 0

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("step size must stay positive")


@dataclass(frozen=True)
class Individual:
    """One candidate model: an ordered classifier set with its cached
    validation error (mean squared error of the mixed quality prediction
    over the validation set, coverage gaps predicted as 0.0)."""

    classifiers: tuple[Classifier, ...]
    valid_error: float

    def __post_init__(self):
        if len(self.classifiers) < 1:
            raise ValueError("an individual holds at least one classifier")
        object.__setattr__(self, "classifiers", tuple(self.classifiers))

    def __len__(self) -> int:
        return len(self.classifiers)


class FitContext:
    """Training and validation data with feature rows precomputed once.

    All fitting and validation scoring funnels through here so repeated
    classifier refits reuse the same feature matrices.
    """

    def __init__(self, train: Dataset, valid: Dataset, include_linear: bool = False,
                 ridge_epsilon: float = DEFAULT_RIDGE):
        if len(train) == 0 or len(valid) == 0:
            raise ValueError("training and validation sets must be non-empty")
        self.train = train
        self.valid = valid
        self.include_linear = include_linear
        self.ridge_epsilon = ridge_epsilon
        self.train_features = build_feature_matrix(train.X, train.A, include_linear)
        self.valid_features = build_feature_matrix(valid.X, valid.A, include_linear)

    def fit(self, classifier: Classifier) -> Classifier:
        return fit(classifier, self.train, self.include_linear,
                   self.ridge_epsilon, self.train_features)

    def validation_error(self, classifiers) -> float:
        preds, _ = mixing.predict_quality_batch(
            classifiers, self.valid.X, self.valid.A, self.valid_features
        )
        diff = preds - self.valid.q
        return float(diff @ diff / len(diff))

    def make_individual(self, classifiers) -> Individual:
        classifiers = tuple(classifiers)
        return Individual(classifiers, self.validation_error(classifiers))


@dataclass(frozen=True)
class GenerationReport:
    """Per-generation observer payload."""

    generation: int
    elitist: Individual
    step_size: float
    success_ratio: float

    @property
    def valid_error(self) -> float:
        return self.elitist.valid_error

    @property
    def length(self) -> int:
        return len(self.elitist)


def random_classifier(rng: np.random.Generator, dx: int, da: int) -> Classifier:
    """Unfitted classifier with interval bounds sampled uniformly: two
    draws per dimension in [-1, 1], ordered into (lower, upper)."""
    draws = rng.uniform(-1.0, 1.0, size=(dx, 2))
    lower = draws.min(axis=1)
    upper = draws.max(axis=1)
    return Classifier(IntervalCondition(lower, upper))


def init_population(config: GaConfig, rng: np.random.Generator,
                    ctx: FitContext) -> list[Individual]:
    """Fixed-size random individuals, every classifier fitted once."""
    dx, da = ctx.train.dx, ctx.train.da
    population = []
    for _ in range(config.population_size):
        classifiers = [
            ctx.fit(random_classifier(rng, dx, da))
            for _ in range(config.initial_individual_size)
        ]
        population.append(ctx.make_individual(classifiers))
    return population


def mutate(individual: Individual, step: StepSizeState, config: GaConfig,
           rng: np.random.Generator, ctx: FitContext) -> Individual:
    """Perturb every interval bound by s * N(0, 1) and refit.

    Bounds are clipped to [-1, 1] when configured; dimensions whose bounds
    end up inverted are swapped back into order. With probability
    `random_classifier_prob` one freshly random classifier is appended.
    """
    dx, da = ctx.train.dx, ctx.train.da
    mutated = []
    for classifier in individual.classifiers:
        noise = rng.standard_normal((2, dx)) * step.s
        lower = classifier.condition.lower + noise[0]
        upper = classifier.condition.upper + noise[1]
        if config.clip_mutation:
            lower = np.clip(lower, -1.0, 1.0)
            upper = np.clip(upper, -1.0, 1.0)
        condition = IntervalCondition(
            np.minimum(lower, upper), np.maximum(lower, upper)
        )
        mutated.append(ctx.fit(Classifier(condition)))
    if rng.random() < config.random_classifier_prob:
        mutated.append(ctx.fit(random_classifier(rng, dx, da)))
    return ctx.make_individual(mutated)


def adapt_step_size(step: StepSizeState, config: GaConfig) -> StepSizeState:
    """One-fifth rule: grow s when more than a fifth of the mutations
    improved on their parent, shrink it when fewer did."""
    if step.trial_count < 1:
        raise ValueError("cannot adapt without recorded trials")
    ratio = step.success_count / step.trial_count
    s = step.s
    if ratio > 0.2:
        s *= config.one_fifth_factor
    elif ratio < 0.2:
        s /= config.one_fifth_factor
    return StepSizeState(s)


def crossover(parent1: Individual, parent2: Individual, rng: np.random.Generator,
              ctx: FitContext) -> tuple[Individual, Individual]:
    """Shuffle both parents' classifiers together and deal them to two
    children.

    Child sizes come from a normal draw around the mean parent length,
    redrawn until both children keep at least one classifier. Classifiers
    are passed through unmodified, so only validation errors need
    recomputing.
    """
    l1, l2 = len(parent1), len(parent2)
    total = l1 + l2
    while True:
        size1 = int(np.rint(rng.normal((l1 + l2) / 2.0, 1.0)))
        if 1 <= size1 <= total - 1:
            break
    pool = list(parent1.classifiers) + list(parent2.classifiers)
    perm = rng.permutation(total)
    child1 = [pool[i] for i in perm[:size1]]
    child2 = [pool[i] for i in perm[size1:]]
    return ctx.make_individual(child1), ctx.make_individual(child2)


def tournament(i1: Individual, i2: Individual, k: float) -> Individual:
    """Pairwise fitness: lower validation error wins unless the winner's
    length is out of proportion; `k` scales how much extra error a
    shorter rule set may trade away.

    Zero-error guards: a perfect i1 beats any imperfect i2 outright; two
    perfect individuals are judged by length with ties to i1. Equal error
    and equal length also fall to i1 so the relation is deterministic.
    """
    e1, e2 = i1.valid_error, i2.valid_error
    l1, l2 = len(i1), len(i2)
    if e1 == 0.0 and e2 == 0.0:
        return i1 if l1 <= l2 else i2
    if e1 == 0.0:
        return i1
    if e1 == e2 and l1 == l2:
        return i1
    ratio = e2 / e1
    if e1 < e2 and l1 <= ratio * l2:
        return i1
    if e1 >= e2 and l1 <= k * ratio * l2:
        return i1
    return i2


def rank_population(population, k: float) -> list[Individual]:
    """Total order from round-robin tournament wins.

    Ties break by lower validation error, then by shorter length, then by
    original position, so the ordering is deterministic even for
    non-transitive tournament outcomes.
    """
    n = len(population)
    wins = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            winner = tournament(population[i], population[j], k)
            wins[i if winner is population[i] else j] += 1
    order = sorted(
        range(n),
        key=lambda i: (-wins[i], population[i].valid_error, len(population[i]), i),
    )
    return [population[i] for i in order]


def evolve(config: GaConfig, train: Dataset, valid: Dataset, seed,
           observers=()) -> tuple[Individual, list[GenerationReport]]:
    """Run the generational loop and return (final elitist, history).

    `seed` is an int or numpy SeedSequence; every generation draws from
    its own derived stream. Per generation: the top `elitists` carry over
    unchanged; the rest of the population is refilled from pairs of
    size-2-tournament parents, crossed over with probability
    `crossover_rate` (cloned otherwise) and always mutated. Mutations
    count as successes when the child improves on its parent's validation
    error; the shared step size adapts once per generation.
    """
    ctx = FitContext(train, valid, config.include_linear, config.ridge_epsilon)
    master = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = master.spawn(config.generations + 1)
    population = init_population(config, np.random.default_rng(streams[0]), ctx)
    step = StepSizeState(config.initial_step_size)
    ranked = rank_population(population, config.k)
    history: list[GenerationReport] = []

    for generation in range(1, config.generations + 1):
        rng = np.random.default_rng(streams[generation])
        next_population = list(ranked[: config.elitists])
        successes = 0
        trials = 0

        def pick_parent():
            contenders = rng.integers(len(population), size=2)
            return tournament(
                population[contenders[0]], population[contenders[1]], config.k
            )

        while len(next_population) < config.population_size:
            parent1 = pick_parent()
            parent2 = pick_parent()
            if rng.random() < config.crossover_rate:
                child1, child2 = crossover(parent1, parent2, rng, ctx)
            else:
                child1, child2 = parent1, parent2
            for child, parent in ((child1, parent1), (child2, parent2)):
                if len(next_population) >= config.population_size:
                    break
                offspring = mutate(child, step, config, rng, ctx)
                trials += 1
                if offspring.valid_error < parent.valid_error:
                    successes += 1
                next_population.append(offspring)

        population = next_population
        step = adapt_step_size(
            replace(step, success_count=successes, trial_count=trials), config
        )
        ranked = rank_population(population, config.k)
        report = GenerationReport(
            generation, ranked[0], step.s, successes / trials
        )
        history.append(report)
        for observer in observers:
            observer(report)

    return ranked[0], history
