"""Synthetic linear-model scenarios: AR(1) Gaussian designs, sparse signals, responses.

Every generator is a pure function of its arguments, including the seed, so
replications can be produced in any order (or in parallel) without changing
results.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Seeds are accepted as anything numpy's default_rng takes; ints and
# SeedSequences are value-like, which keeps the generators pure.


@dataclass(frozen=True)
class Scenario:
    """Full parameterization of one synthetic experiment.

    Parameters
    ----------
    n : int
        Number of subjects (rows). Must be at least 4 so the data can be
        split into two nondegenerate halves.
    p : int
        Number of features.
    p1 : int
        Number of true signals, 0 <= p1 <= p.
    rho : float
        AR(1) correlation between features, in [0, 1).
    signal_range : (float, float)
        (r1, r2) with 0 <= r1 < r2; nonzero coefficient magnitudes are drawn
        uniformly from this interval.
    q : float
        Nominal false discovery rate level, in (0, 1).
    seed : int
        64-bit reproducibility seed; all replication randomness derives
        from it.
    noise_sd : float
        Response noise standard deviation (default 1).
    """

    n: int
    p: int
    p1: int
    rho: float
    signal_range: tuple[float, float]
    q: float
    seed: int
    noise_sd: float = 1.0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"n must be >= 4 (got {self.n})")
        if self.p < 1:
            raise ValueError(f"p must be >= 1 (got {self.p})")
        if not 0 <= self.p1 <= self.p:
            raise ValueError(f"p1 must satisfy 0 <= p1 <= p (got p1={self.p1}, p={self.p})")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must be in [0, 1) (got {self.rho})")
        r1, r2 = self.signal_range
        if not 0.0 <= r1 < r2:
            raise ValueError(f"signal_range must satisfy 0 <= r1 < r2 (got {self.signal_range})")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must be in (0, 1) (got {self.q})")
        if self.noise_sd < 0.0:
            raise ValueError(f"noise_sd must be >= 0 (got {self.noise_sd})")


@dataclass
class Dataset:
    """A design matrix with its response and, when synthetic, the ground truth.

    ``true_support`` and ``true_w`` are present for generated data and absent
    for real data loaded from files.
    """

    X: np.ndarray
    y: np.ndarray
    true_support: frozenset[int] | None = None
    true_w: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional (got ndim={self.X.ndim})")
        if self.y.ndim != 1 or self.y.shape[0] != self.X.shape[0]:
            raise ValueError(
                f"y must be 1-dimensional with length {self.X.shape[0]} (got shape {self.y.shape})"
            )
        if not np.isfinite(self.X).all():
            raise ValueError("X contains non-finite entries")
        if not np.isfinite(self.y).all():
            raise ValueError("y contains non-finite entries")
        if self.true_w is not None:
            self.true_w = np.asarray(self.true_w, dtype=np.float64)
            if self.true_w.shape != (self.X.shape[1],):
                raise ValueError("true_w length must equal the number of columns of X")
        if self.true_support is not None:
            self.true_support = frozenset(int(j) for j in self.true_support)
            if self.true_w is not None:
                nnz = int(np.count_nonzero(self.true_w))
                if len(self.true_support) != nnz:
                    raise ValueError(
                        f"true_support size {len(self.true_support)} does not match "
                        f"{nnz} nonzero entries of true_w"
                    )

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def gen_covariance(p: int, rho: float) -> np.ndarray:
    """AR(1) covariance matrix with entries rho**|j - k|.

    Symmetric, positive definite, unit diagonal for any rho in [0, 1).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1 (got {p})")
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must be in [0, 1) (got {rho})")
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)


def cholesky_factor(sigma: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a covariance matrix.

    Raises ``numpy.linalg.LinAlgError`` when the input is not positive
    definite. Exposed so callers sampling many draws from one covariance can
    factor it once.
    """
    return np.linalg.cholesky(np.asarray(sigma, dtype=np.float64))


def sample_design(n: int, sigma: np.ndarray, seed) -> np.ndarray:
    """Draw an n x p matrix with i.i.d. rows from N(0, sigma)."""
    return sample_design_from_factor(n, cholesky_factor(sigma), seed)


def sample_design_from_factor(n: int, chol: np.ndarray, seed) -> np.ndarray:
    """Like :func:`sample_design` but from a precomputed Cholesky factor."""
    if n < 1:
        raise ValueError(f"n must be >= 1 (got {n})")
    rng = np.random.default_rng(seed)
    p = chol.shape[0]
    return rng.standard_normal((n, p)) @ chol.T


def gen_weights(
    p: int,
    p1: int,
    signal_range: tuple[float, float],
    seed,
    random_sign: bool = False,
) -> tuple[np.ndarray, frozenset[int]]:
    """Sparse coefficient vector with exactly p1 nonzero entries.

    The support is placed uniformly at random (without replacement) and the
    nonzero magnitudes are i.i.d. uniform on (r1, r2). With ``random_sign``
    each nonzero entry is independently negated with probability 1/2; the
    default keeps the literal positive-magnitude convention (downstream
    statistics are absolute values either way).

    Returns the coefficient vector and its support as a frozenset.
    """
    if not 0 <= p1 <= p:
        raise ValueError(f"p1 must satisfy 0 <= p1 <= p (got p1={p1}, p={p})")
    r1, r2 = signal_range
    if not r1 < r2:
        raise ValueError(f"signal_range must satisfy r1 < r2 (got {signal_range})")
    rng = np.random.default_rng(seed)
    w = np.zeros(p)
    support = rng.choice(p, size=p1, replace=False)
    magnitudes = rng.uniform(r1, r2, size=p1)
    if random_sign:
        magnitudes = magnitudes * rng.choice([-1.0, 1.0], size=p1)
    w[support] = magnitudes
    return w, frozenset(int(j) for j in support)


def gen_response(X: np.ndarray, w: np.ndarray, noise_sd: float, seed) -> np.ndarray:
    """Linear-Gaussian response y = X w + noise, with noise sd ``noise_sd``."""
    X = np.asarray(X, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (X.shape[1],):
        raise ValueError(f"w has length {w.shape[0]} but X has {X.shape[1]} columns")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be >= 0 (got {noise_sd})")
    rng = np.random.default_rng(seed)
    return X @ w + noise_sd * rng.standard_normal(X.shape[0])


class ReplicationSeeds(NamedTuple):
    """Per-replication seed roots for each randomized stage.

    Derived as ``SeedSequence([scenario_seed, replication]).spawn(6)``; the
    fixed positional assignment means enabling or disabling one stage never
    perturbs the randomness of another.
    """

    design: np.random.SeedSequence
    weights: np.random.SeedSequence
    noise: np.random.SeedSequence
    dss: np.random.SeedSequence
    mss: np.random.SeedSequence
    ss: np.random.SeedSequence


def replication_seeds(scenario_seed: int, replication: int) -> ReplicationSeeds:
    """Deterministic, order-independent seed derivation for one replication."""
    if replication < 0:
        raise ValueError(f"replication must be >= 0 (got {replication})")
    root = np.random.SeedSequence([int(scenario_seed), int(replication)])
    return ReplicationSeeds(*root.spawn(6))


def make_dataset(
    scenario: Scenario,
    replication: int = 0,
    chol: np.ndarray | None = None,
    random_sign: bool = False,
) -> Dataset:
    """Generate one replication's dataset for a scenario.

    The design, the coefficients, and the noise are all redrawn per
    replication from seeds derived via :func:`replication_seeds`. Passing a
    precomputed ``chol`` of the scenario covariance skips refactoring it.
    """
    seeds = replication_seeds(scenario.seed, replication)
    if chol is None:
        chol = cholesky_factor(gen_covariance(scenario.p, scenario.rho))
    X = sample_design_from_factor(scenario.n, chol, seeds.design)
    w, support = gen_weights(
        scenario.p, scenario.p1, scenario.signal_range, seeds.weights, random_sign=random_sign
    )
    y = gen_response(X, w, scenario.noise_sd, seeds.noise)
    return Dataset(X=X, y=y, true_support=support, true_w=w)
