"""Column standardization, random half-splitting, and bootstrap subsampling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import Dataset


class DegenerateColumnError(ValueError):
    """A column has zero variance and cannot be standardized."""

    def __init__(self, columns):
        self.columns = tuple(int(c) for c in columns)
        cols = ", ".join(str(c) for c in self.columns)
        super().__init__(f"zero-variance column(s): {cols}")


@dataclass
class SplitPair:
    """Disjoint random halves of a dataset; the two index sets partition the rows."""

    train: Dataset
    valid: Dataset
    train_indices: np.ndarray
    valid_indices: np.ndarray


@dataclass
class SubsampleSet:
    """With-replacement subsamples, the first k for training and the last k' for validation."""

    samples: list[Dataset]
    subsample_size: int
    k: int
    k_prime: int

    def __post_init__(self):
        if len(self.samples) != self.k + self.k_prime:
            raise ValueError(
                f"expected {self.k + self.k_prime} subsamples, got {len(self.samples)}"
            )
        for d in self.samples:
            if d.n != self.subsample_size:
                raise ValueError("every subsample must have exactly subsample_size rows")


def standardize(X: np.ndarray) -> np.ndarray:
    """Center and scale each column to mean 0 and population variance 1.

    Uses the divisor-n variance. Raises :class:`DegenerateColumnError` naming
    the offending column indices when any column is constant.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-dimensional (got ndim={X.ndim})")
    if X.shape[0] < 2:
        raise ValueError(f"standardization needs at least 2 rows (got {X.shape[0]})")
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    dead = np.flatnonzero(sd == 0.0)
    if dead.size:
        raise DegenerateColumnError(dead)
    return (X - mean) / sd


def _take_rows(data: Dataset, idx: np.ndarray) -> Dataset:
    # Row subsetting keeps the feature-level ground truth intact.
    return Dataset(
        X=data.X[idx],
        y=data.y[idx],
        true_support=data.true_support,
        true_w=data.true_w,
    )


def split_half(data: Dataset, seed) -> SplitPair:
    """Uniformly random partition of the rows into two halves.

    The first half receives the extra row when n is odd. Standardization is
    intentionally not applied here; callers standardize each half on its own.
    """
    n = data.n
    if n < 4:
        raise ValueError(f"splitting needs n >= 4 (got {n})")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = math.ceil(n / 2)
    train_idx = np.sort(perm[:n_train])
    valid_idx = np.sort(perm[n_train:])
    return SplitPair(
        train=_take_rows(data, train_idx),
        valid=_take_rows(data, valid_idx),
        train_indices=train_idx,
        valid_indices=valid_idx,
    )


def subsample(data: Dataset, count, size: int, seed) -> SubsampleSet:
    """Draw subsamples of ``size`` rows uniformly with replacement.

    ``count`` is either the total number of subsamples or a ``(k, k_prime)``
    pair recording how many are meant for training versus validation. Draws
    are independent across subsamples and deterministic given the seed.
    """
    if isinstance(count, tuple):
        k, k_prime = (int(count[0]), int(count[1]))
        if k < 1 or k_prime < 0:
            raise ValueError(f"invalid subsample split ({k}, {k_prime})")
    else:
        k, k_prime = int(count), 0
    total = k + k_prime
    if total < 2:
        raise ValueError(f"need at least 2 subsamples (got {total})")
    if size < 2:
        raise ValueError(f"subsample size must be >= 2 (got {size})")
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, data.n, size=(total, size))
    samples = [_take_rows(data, indices[b]) for b in range(total)]
    return SubsampleSet(samples=samples, subsample_size=size, k=k, k_prime=k_prime)
