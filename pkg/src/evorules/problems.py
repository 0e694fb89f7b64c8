"""Benchmark problems: the frog jump task and seeded additive-Gaussian
quality landscapes, with ground-truth optimal-choice oracles.

Both problems expose the same surface: native-unit quality evaluation,
normalized dataset sampling, and the true optimal parametrization per
situation, so metrics can compare a learned model against the real optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BoundsSpec, Dataset, normalize
from .linalg import random_psd_2x2

N_COMPONENTS = 11  # five situation plus six parametrization dimensions
AM_GAUSS_DX = 5
AM_GAUSS_DA = 6
EIG_RANGE = (0.0, 30.0)


# ---------------------------------------------------------------------------
# Frog problem: 1 situation dimension, 1 parametrization dimension.
# The payoff is a tent over x + a with its ridge at x + a = 1, so the best
# jump exactly complements the distance.


def frog_quality(x, a):
    """Tent payoff on the native domain x, a in [0, 1]:
    x + a below the ridge, 2 - (x + a) above it."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    s = x + a
    return np.where(s <= 1.0, s, 2.0 - s)


def frog_optimal(x):
    """The payoff-1 choice: a = 1 - x in native units."""
    return 1.0 - np.asarray(x, dtype=float)


def frog_dataset(n: int, rng: np.random.Generator) -> Dataset:
    """Sample n examples uniformly over the native unit square and return
    them normalized (situations and choices in [-1, 1], payoff raw)."""
    if n < 1:
        raise ValueError("need at least one example")
    x = rng.uniform(0.0, 1.0, size=n)
    a = rng.uniform(0.0, 1.0, size=n)
    q = frog_quality(x, a)
    return Dataset((2.0 * x - 1.0)[:, None], (2.0 * a - 1.0)[:, None], q)


class FrogProblem:
    """Problem adapter used by the experiment harness."""

    name = "frog"
    dx = 1
    da = 1

    def __init__(self):
        self.bounds = BoundsSpec([[0.0, 1.0]], [[0.0, 1.0]])

    def quality(self, X_native, A_native):
        return frog_quality(
            np.asarray(X_native)[..., 0], np.asarray(A_native)[..., 0]
        )

    def optimal_parametrization(self, X_native):
        return frog_optimal(np.asarray(X_native)[..., 0])[..., None]

    def dataset(self, n: int, rng: np.random.Generator) -> Dataset:
        return frog_dataset(n, rng)


# ---------------------------------------------------------------------------
# Additive pairwise-Gaussian landscapes over 5 situation and 6
# parametrization dimensions. Every ordered pair (j, k) of distinct
# components contributes one 2-D Gaussian bump with a random PSD shape
# matrix and a random shift, for 110 terms total.


@dataclass(frozen=True)
class AmGaussInstance:
    """One seeded landscape: per ordered component pair a 2x2 PSD shape
    matrix (eigenvalues in [0, 30]) and a shift in [-1, 1]^2."""

    seed: int
    pairs: np.ndarray      # (110, 2) component indices, 0-based (j, k)
    matrices: np.ndarray   # (110, 2, 2)
    shifts: np.ndarray     # (110, 2)

    def __post_init__(self):
        if self.pairs.shape != (110, 2):
            raise ValueError("expected 110 ordered component pairs")

    def scatter_maps(self):
        """One-hot maps (110, 11) sending per-term values onto components;
        cached on first use for gradient assembly."""
        maps = getattr(self, "_scatter", None)
        if maps is None:
            first = np.zeros((110, N_COMPONENTS))
            second = np.zeros((110, N_COMPONENTS))
            first[np.arange(110), self.pairs[:, 0]] = 1.0
            second[np.arange(110), self.pairs[:, 1]] = 1.0
            maps = (first, second)
            object.__setattr__(self, "_scatter", maps)
        return maps


def am_gauss_generate(seed: int) -> AmGaussInstance:
    """Build the landscape for a seed.

    Pairs iterate j-major over j != k; per pair the shape matrix is drawn
    before the shift, so the instance is a pure function of the seed.
    """
    rng = np.random.default_rng(seed)
    pairs = []
    matrices = []
    shifts = []
    for j in range(N_COMPONENTS):
        for k in range(N_COMPONENTS):
            if j == k:
                continue
            pairs.append((j, k))
            matrices.append(random_psd_2x2(rng, *EIG_RANGE))
            shifts.append(rng.uniform(-1.0, 1.0, size=2))
    return AmGaussInstance(
        seed,
        np.asarray(pairs, dtype=int),
        np.asarray(matrices, dtype=float),
        np.asarray(shifts, dtype=float),
    )


def am_gauss_quality_batch(instance: AmGaussInstance, Y) -> np.ndarray:
    """Landscape values for a batch of stacked vectors Y (n, 11)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != N_COMPONENTS:
        raise ValueError(f"expected {N_COMPONENTS} components per vector")
    v = Y[:, instance.pairs]          # (n, 110, 2)
    d = v - instance.shifts
    quad = np.einsum("npi,pij,npj->np", d, instance.matrices, d)
    return np.exp(-quad).sum(axis=1)


def am_gauss_quality(instance: AmGaussInstance, y) -> float:
    """Landscape value for one stacked vector of 11 components."""
    y = np.asarray(y, dtype=float)
    return float(am_gauss_quality_batch(instance, y[None, :])[0])


def am_gauss_gradient_batch(instance: AmGaussInstance, Y) -> np.ndarray:
    """Analytic gradient of the landscape for a batch Y (n, 11)."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    v = Y[:, instance.pairs]
    d = v - instance.shifts
    pd = np.einsum("pij,npj->npi", instance.matrices, d)
    terms = np.exp(-np.einsum("npi,npi->np", d, pd))
    contrib = -2.0 * terms[:, :, None] * pd       # (n, 110, 2)
    first, second = instance.scatter_maps()
    return contrib[:, :, 0] @ first + contrib[:, :, 1] @ second


def am_gauss_gradient(instance: AmGaussInstance, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return am_gauss_gradient_batch(instance, y[None, :])[0]


def am_gauss_dataset(instance: AmGaussInstance, n: int,
                     rng: np.random.Generator) -> Dataset:
    """Sample n stacked vectors uniformly from [-1, 1]^11 and evaluate the
    landscape; the native domain already is the normalized one."""
    if n < 1:
        raise ValueError("need at least one example")
    Y = rng.uniform(-1.0, 1.0, size=(n, N_COMPONENTS))
    q = am_gauss_quality_batch(instance, Y)
    return Dataset(Y[:, :AM_GAUSS_DX], Y[:, AM_GAUSS_DX:], q)


def oracle_argmax(instance: AmGaussInstance, x, restarts: int = 64,
                  tol: float = 1e-8, rng: np.random.Generator | None = None,
                  max_iters: int = 1000):
    """Ground-truth best parametrization for a situation by multi-start
    projected gradient ascent over [-1, 1]^6.

    All restarts march in lockstep with per-restart adaptive step sizes
    (double on improvement, halve otherwise). Iteration stops when every
    restart has either stalled or reached a point whose projected gradient
    is below `tol`. Returns (a_best, q_best).
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    x = np.asarray(x, dtype=float)
    if rng is None:
        rng = np.random.default_rng(0)
    A = rng.uniform(-1.0, 1.0, size=(restarts, AM_GAUSS_DA))
    Y = np.empty((restarts, N_COMPONENTS))
    Y[:, :AM_GAUSS_DX] = x
    Y[:, AM_GAUSS_DX:] = A
    q = am_gauss_quality_batch(instance, Y)
    step = np.full(restarts, 0.25)

    for _ in range(max_iters):
        grad = am_gauss_gradient_batch(instance, Y)[:, AM_GAUSS_DX:]
        proposal = np.clip(A + step[:, None] * grad, -1.0, 1.0)
        trial = Y.copy()
        trial[:, AM_GAUSS_DX:] = proposal
        q_trial = am_gauss_quality_batch(instance, trial)
        improved = q_trial > q
        A = np.where(improved[:, None], proposal, A)
        Y[:, AM_GAUSS_DX:] = A
        q = np.where(improved, q_trial, q)
        step = np.where(improved, step * 2.0, step / 2.0)
        projected = np.clip(A + grad, -1.0, 1.0) - A
        active = (np.abs(projected).max(axis=1) > tol) & (step > 1e-16)
        if not active.any():
            break

    best = int(np.argmax(q))
    return A[best].copy(), float(q[best])


class AmGaussProblem:
    """Problem adapter for one landscape instance; the normalized and
    native domains coincide ([-1, 1] everywhere)."""

    name = "am-gauss"
    dx = AM_GAUSS_DX
    da = AM_GAUSS_DA

    def __init__(self, instance: AmGaussInstance, restarts: int = 64,
                 tol: float = 1e-8):
        self.instance = instance
        self.restarts = restarts
        self.tol = tol
        self.bounds = BoundsSpec(
            [[-1.0, 1.0]] * AM_GAUSS_DX, [[-1.0, 1.0]] * AM_GAUSS_DA
        )

    @classmethod
    def from_seed(cls, seed: int, **kwargs) -> "AmGaussProblem":
        return cls(am_gauss_generate(seed), **kwargs)

    def quality(self, X_native, A_native):
        Y = np.concatenate(
            [np.atleast_2d(X_native), np.atleast_2d(A_native)], axis=1
        )
        return am_gauss_quality_batch(self.instance, Y)

    def optimal_parametrization(self, X_native):
        X_native = np.atleast_2d(np.asarray(X_native, dtype=float))
        out = np.empty((len(X_native), AM_GAUSS_DA))
        for i, x in enumerate(X_native):
            out[i], _ = oracle_argmax(
                self.instance, x, self.restarts, self.tol,
                rng=np.random.default_rng(i),
            )
        return out

    def dataset(self, n: int, rng: np.random.Generator) -> Dataset:
        return am_gauss_dataset(self.instance, n, rng)


def save_instance(instance: AmGaussInstance, path) -> None:
    """Write a landscape to a shareable text file: seed, then one line per
    pair with 1-based indices, the shape matrix row-major, and the shift,
    all floats at 17 significant digits (bit-exact on reload)."""
    with open(path, "w") as fh:
        fh.write("am-gauss-instance v1\n")
        fh.write(f"seed {instance.seed}\n")
        for p in range(len(instance.pairs)):
            j, k = instance.pairs[p] + 1
            nums = list(instance.matrices[p].ravel()) + list(instance.shifts[p])
            formatted = " ".join(f"{v:.17g}" for v in nums)
            fh.write(f"pair {j} {k} {formatted}\n")


def load_instance(path) -> AmGaussInstance:
    """Read a landscape written by :func:`save_instance`."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or lines[0] != "am-gauss-instance v1":
        raise ValueError(f"{path} is not an instance file")
    if not lines[1].startswith("seed "):
        raise ValueError("missing seed line")
    seed = int(lines[1].split()[1])
    pairs, matrices, shifts = [], [], []
    for line in lines[2:]:
        fields = line.split()
        if fields[0] != "pair" or len(fields) != 9:
            raise ValueError(f"malformed pair line: {line!r}")
        j, k = int(fields[1]) - 1, int(fields[2]) - 1
        values = [float(v) for v in fields[3:]]
        pairs.append((j, k))
        matrices.append(np.asarray(values[:4]).reshape(2, 2))
        shifts.append(values[4:])
    return AmGaussInstance(
        seed,
        np.asarray(pairs, dtype=int),
        np.asarray(matrices, dtype=float),
        np.asarray(shifts, dtype=float),
    )
