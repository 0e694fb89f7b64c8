"""Situations, parametrizations, example sets, and unit normalization.

Everything downstream works in normalized units: situation and
parametrization components live in [-1, 1], quality values stay in raw
problem units. `BoundsSpec` carries the affine maps between raw and
normalized coordinates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Example(NamedTuple):
    """One observation: a situation, a parametrization, and its quality."""

    x: np.ndarray
    a: np.ndarray
    q: float


@dataclass(frozen=True)
class Dataset:
    """A fixed collection of examples, stored column-wise.

    X: (n, dx) situations, A: (n, da) parametrizations, both normalized
    to [-1, 1]; q: (n,) qualities in raw problem units.
    """

    X: np.ndarray
    A: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        A = np.asarray(self.A, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if X.ndim != 2 or A.ndim != 2 or q.ndim != 1:
            raise ValueError("expected X (n, dx), A (n, da) and q (n,)")
        if not (len(X) == len(A) == len(q)):
            raise ValueError(
                f"inconsistent example counts: {len(X)}, {len(A)}, {len(q)}"
            )
        if X.size and (np.abs(X) > 1.0).any():
            raise ValueError("situation components must lie in [-1, 1]")
        if A.size and (np.abs(A) > 1.0).any():
            raise ValueError("parametrization components must lie in [-1, 1]")
        if q.size and not np.isfinite(q).all():
            raise ValueError("quality values must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "q", q)

    @property
    def dx(self) -> int:
        return self.X.shape[1]

    @property
    def da(self) -> int:
        return self.A.shape[1]

    def __len__(self) -> int:
        return len(self.q)

    def example(self, i: int) -> Example:
        return Example(self.X[i], self.A[i], float(self.q[i]))

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return Dataset(self.X[indices], self.A[indices], self.q[indices])


@dataclass(frozen=True)
class BoundsSpec:
    """Raw-unit (low, high) bounds per dimension, situations and
    parametrizations kept separate.

    x_bounds: (dx, 2), a_bounds: (da, 2), low strictly below high.
    """

    x_bounds: np.ndarray
    a_bounds: np.ndarray

    def __post_init__(self):
        xb = np.asarray(self.x_bounds, dtype=float).reshape(-1, 2)
        ab = np.asarray(self.a_bounds, dtype=float).reshape(-1, 2)
        for name, b in (("situation", xb), ("parametrization", ab)):
            if (b[:, 0] >= b[:, 1]).any():
                raise ValueError(f"{name} bounds need low < high in every dimension")
        object.__setattr__(self, "x_bounds", xb)
        object.__setattr__(self, "a_bounds", ab)

    @property
    def dx(self) -> int:
        return len(self.x_bounds)

    @property
    def da(self) -> int:
        return len(self.a_bounds)


def normalize(raw, bounds) -> np.ndarray:
    """Map raw-unit components affinely onto [-1, 1].

    `bounds` is a (d, 2) slice of a BoundsSpec. Accepts a single vector
    (d,) or a batch (n, d). Raises ValueError naming the first offending
    dimension when a component lies outside its declared bounds.
    """
    raw = np.asarray(raw, dtype=float)
    bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
    low, high = bounds[:, 0], bounds[:, 1]
    if raw.shape[-1] != len(bounds):
        raise ValueError(
            f"vector has {raw.shape[-1]} components but bounds cover {len(bounds)}"
        )
    below = raw < low
    above = raw > high
    if below.any() or above.any():
        dim = int(np.argmax((below | above).reshape(-1, len(bounds)).any(axis=0)))
        raise ValueError(
            f"component {dim} outside bounds [{low[dim]}, {high[dim]}]"
        )
    return 2.0 * (raw - low) / (high - low) - 1.0


def denormalize(norm, bounds) -> np.ndarray:
    """Inverse of :func:`normalize`; input components must lie in [-1, 1]."""
    norm = np.asarray(norm, dtype=float)
    bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
    low, high = bounds[:, 0], bounds[:, 1]
    if norm.shape[-1] != len(bounds):
        raise ValueError(
            f"vector has {norm.shape[-1]} components but bounds cover {len(bounds)}"
        )
    out = np.abs(norm) > 1.0
    if out.any():
        dim = int(np.argmax(out.reshape(-1, len(bounds)).any(axis=0)))
        raise ValueError(f"component {dim} outside [-1, 1]")
    return low + (norm + 1.0) * (high - low) / 2.0


def split_dataset(data: Dataset, validation_fraction: float, rng: np.random.Generator):
    """Randomly split a dataset into disjoint (train, valid) parts.

    The validation side receives round(fraction * n) examples, drawn
    without replacement by shuffling indices with `rng`; the split is
    fully determined by the generator state.
    """
    n = len(data)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    n_valid = int(np.rint(validation_fraction * n))
    if n_valid == 0 or n_valid == n:
        raise ValueError(
            f"validation fraction {validation_fraction} leaves an empty side "
            f"for {n} examples"
        )
    perm = rng.permutation(n)
    valid_idx = perm[:n_valid]
    train_idx = perm[n_valid:]
    return data.subset(train_idx), data.subset(valid_idx)


def save_dataset_csv(data: Dataset, path) -> None:
    """Write a dataset as CSV with header x1..xDx,a1..aDa,q.

    Values are emitted with repr so reading the file back is lossless.
    """
    header = (
        [f"x{i + 1}" for i in range(data.dx)]
        + [f"a{k + 1}" for k in range(data.da)]
        + ["q"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(len(data)):
            row = [repr(float(v)) for v in data.X[i]]
            row += [repr(float(v)) for v in data.A[i]]
            row.append(repr(float(data.q[i])))
            writer.writerow(row)


def load_dataset_csv(path) -> Dataset:
    """Read a dataset written by :func:`save_dataset_csv`.

    Dx and Da are inferred from the x*/a* header columns.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        dx = sum(1 for h in header if h.startswith("x"))
        da = sum(1 for h in header if h.startswith("a"))
        if header != (
            [f"x{i + 1}" for i in range(dx)]
            + [f"a{k + 1}" for k in range(da)]
            + ["q"]
        ):
            raise ValueError(f"unrecognized dataset header in {path}: {header}")
        rows = [[float(v) for v in row] for row in reader if row]
    arr = np.asarray(rows, dtype=float).reshape(len(rows), dx + da + 1)
    return Dataset(arr[:, :dx], arr[:, dx:dx + da], arr[:, -1])
