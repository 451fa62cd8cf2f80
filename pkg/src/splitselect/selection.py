"""Feature selection with finite-sample false-discovery control.

The split-based selector (dss) fits an estimator on two disjoint halves of
the data and keeps features that look strong on both; the subsample-based
selector (mss) replaces the halves with averages over bootstrap fits. Both
share the same signed-importance / data-driven-threshold machinery. The
Benjamini-Hochberg step-up rule and stability selection are included as
baselines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .datagen import Dataset
from .estimators import importance, lasso_path, max_penalty, penalty_grid
from .preprocess import split_half, standardize, subsample

# Median of |N(0,1)| = Phi^{-1}(0.75); used to turn a median absolute value
# into a normal-scale estimate.
_HALF_NORMAL_MEDIAN = float(ndtri(0.75))


class EstimatorFailure(RuntimeError):
    """An estimator fit failed inside a selection procedure."""


class DegenerateImportanceError(ValueError):
    """The importance values carry no ranking information (all equal)."""


@dataclass(frozen=True)
class ImportancePair:
    """Nonnegative per-feature importance from the training and validation fits."""

    z_tr: np.ndarray
    z_v: np.ndarray

    def __post_init__(self):
        z_tr = np.asarray(self.z_tr, dtype=np.float64)
        z_v = np.asarray(self.z_v, dtype=np.float64)
        object.__setattr__(self, "z_tr", z_tr)
        object.__setattr__(self, "z_v", z_v)
        if z_tr.ndim != 1 or z_tr.shape != z_v.shape:
            raise ValueError("z_tr and z_v must be 1-d vectors of equal length")
        for name, z in (("z_tr", z_tr), ("z_v", z_v)):
            if not np.isfinite(z).all():
                raise ValueError(f"{name} contains non-finite entries")
            if (z < 0).any():
                raise ValueError(f"{name} must be nonnegative")

    @property
    def p(self) -> int:
        return self.z_tr.shape[0]


@dataclass(frozen=True)
class TauRule:
    """How the validation gate tau is chosen.

    kind is one of "elbow" (knee of the sorted validation importances),
    "oracle" (quantile of a half-normal null with known or robustly
    estimated scale), or "fixed". The elbow can alternatively be computed
    from the training-side statistics for sensitivity studies.
    """

    kind: str
    level: float = 0.75
    value: float | None = None
    null_sd: float | None = None
    elbow_source: str = "valid"

    def __post_init__(self):
        if self.kind not in ("elbow", "oracle", "fixed"):
            raise ValueError(f"unknown tau rule kind {self.kind!r}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must be in (0, 1) (got {self.level})")
        if self.kind == "fixed" and (self.value is None or self.value <= 0):
            raise ValueError("fixed tau requires a positive value")
        if self.elbow_source not in ("valid", "train"):
            raise ValueError(f"elbow_source must be 'valid' or 'train' (got {self.elbow_source!r})")

    @classmethod
    def elbow(cls, source: str = "valid") -> "TauRule":
        return cls(kind="elbow", elbow_source=source)

    @classmethod
    def oracle(cls, level: float = 0.75, null_sd: float | None = None) -> "TauRule":
        return cls(kind="oracle", level=level, null_sd=null_sd)

    @classmethod
    def fixed(cls, value: float) -> "TauRule":
        return cls(kind="fixed", value=float(value))


@dataclass
class SelectionOutcome:
    """Selected index set plus the diagnostics behind it.

    For the split/subsample methods ``selected == {j : fi[j] >= threshold}``
    and an infinite threshold means nothing could be selected at the
    requested level.
    """

    selected: frozenset[int]
    threshold: float
    tau: float
    fi: np.ndarray
    method: str
    z_tr: np.ndarray | None = None
    z_v: np.ndarray | None = None


def compute_fi(pair: ImportancePair, tau: float) -> np.ndarray:
    """Signed importance: +z_tr where z_v passes the gate tau, -z_tr where it fails."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0 (got {tau})")
    return np.where(pair.z_v >= tau, pair.z_tr, -pair.z_tr)


def compute_threshold(z_tr: np.ndarray, fi: np.ndarray, q: float) -> float:
    """Smallest observed importance t with #{fi <= -t} / max(#{fi >= t}, 1) <= q.

    Candidates are the observed positive z_tr values (zero is never a
    candidate); returns infinity when no candidate achieves the ratio. The
    sorted implementation agrees exactly with the quadratic definitional
    scan.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1) (got {q})")
    z_tr = np.asarray(z_tr, dtype=np.float64)
    fi = np.asarray(fi, dtype=np.float64)
    if z_tr.shape != fi.shape or z_tr.ndim != 1:
        raise ValueError("z_tr and fi must be 1-d vectors of equal length")
    if not np.array_equal(np.abs(fi), z_tr):
        raise ValueError("|fi| must equal z_tr elementwise")
    candidates = np.unique(z_tr)
    candidates = candidates[candidates > 0]
    if candidates.size == 0:
        return math.inf
    fi_sorted = np.sort(fi)
    p = fi_sorted.size
    # #{fi <= -t} and #{fi >= t} for every candidate t at once
    num = np.searchsorted(fi_sorted, -candidates, side="right")
    den = p - np.searchsorted(fi_sorted, candidates, side="left")
    ok = num <= q * np.maximum(den, 1)
    hits = np.flatnonzero(ok)
    if hits.size == 0:
        return math.inf
    return float(candidates[hits[0]])


def estimate_tau_elbow(z: np.ndarray) -> float:
    """Knee of the empirical distribution of the importances.

    Sorts the values, forms the points (z_(k), k/p), and returns the value
    whose point lies furthest from the chord joining the first and last
    points. Ties break toward the smallest value; a zero result is clamped
    up to the smallest positive entry so the gate stays strictly positive.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size < 3:
        raise ValueError("elbow estimation needs a 1-d vector with at least 3 entries")
    if not np.isfinite(z).all():
        raise ValueError("z contains non-finite entries")
    zs = np.sort(z)
    if zs[0] == zs[-1]:
        raise DegenerateImportanceError("elbow is undefined when all entries are equal")
    p = zs.size
    frac = np.arange(1, p + 1) / p
    dx = zs[-1] - zs[0]
    dy = frac[-1] - frac[0]
    # perpendicular distance to the chord, up to a constant factor
    dist = np.abs(dy * (zs - zs[0]) - dx * (frac - frac[0]))
    tau = float(zs[np.argmax(dist)])
    if tau <= 0.0:
        positive = zs[zs > 0]
        if positive.size == 0:
            raise ValueError("no positive entries to clamp the elbow to")
        tau = float(positive[0])
    return tau


def estimate_tau_oracle(null_sd: float, level: float) -> float:
    """level-quantile of the half-normal |N(0, null_sd^2)|."""
    if null_sd <= 0:
        raise ValueError(f"null_sd must be > 0 (got {null_sd})")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1) (got {level})")
    return float(null_sd * ndtri((1.0 + level) / 2.0))


def resolve_tau(rule: TauRule, pair: ImportancePair) -> float:
    """Concrete tau for one selection run.

    The elbow reads the side named by ``rule.elbow_source`` (the validation
    statistics by default, since tau gates them). The oracle rule falls back
    to a robust scale estimate (median / half-normal median) from the
    validation side when no null sd is supplied.
    """
    if rule.kind == "fixed":
        return float(rule.value)
    if rule.kind == "elbow":
        z = pair.z_v if rule.elbow_source == "valid" else pair.z_tr
        return estimate_tau_elbow(z)
    sd = rule.null_sd
    if sd is None:
        sd = float(np.median(pair.z_v)) / _HALF_NORMAL_MEDIAN
        if sd <= 0:
            raise DegenerateImportanceError(
                "cannot estimate a null scale: median validation importance is 0"
            )
    return estimate_tau_oracle(sd, rule.level)


def _select_from_pair(pair: ImportancePair, q: float, tau_rule: TauRule, method: str) -> SelectionOutcome:
    try:
        tau = resolve_tau(tau_rule, pair)
    except DegenerateImportanceError:
        # no ranking information on the gated side (typically an all-zero
        # validation fit): nothing can clear a positive gate, select nothing
        tau = float(pair.z_v.max()) + 1.0
    fi = compute_fi(pair, tau)
    threshold = compute_threshold(pair.z_tr, fi, q)
    selected = frozenset(int(j) for j in np.flatnonzero(fi >= threshold))
    return SelectionOutcome(
        selected=selected,
        threshold=threshold,
        tau=tau,
        fi=fi,
        method=method,
        z_tr=pair.z_tr,
        z_v=pair.z_v,
    )


def _fit_importance(estimator, X, y, seed, context: str) -> np.ndarray:
    try:
        fit = estimator(standardize(X), y, seed)
    except Exception as exc:
        raise EstimatorFailure(f"estimator failed on {context}: {exc}") from exc
    return importance(fit)


def dss_select(data: Dataset, q: float, estimator, tau_rule: TauRule, seed) -> SelectionOutcome:
    """Split the data in half, fit both halves, keep features strong on both.

    ``estimator`` is a callable ``(X, y, seed) -> FitResult`` (see
    :func:`splitselect.estimators.get_estimator`); each half is standardized
    on its own before fitting. The selected set equals
    ``{j : z_tr[j] >= threshold and z_v[j] >= tau}``.
    """
    if data.n < 8:
        raise ValueError(f"split selection needs n >= 8 (got {data.n})")
    root = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    split_ss, fit_tr_ss, fit_v_ss = root.spawn(3)
    pair_ds = split_half(data, split_ss)
    z_tr = _fit_importance(estimator, pair_ds.train.X, pair_ds.train.y, fit_tr_ss, "the training half")
    z_v = _fit_importance(estimator, pair_ds.valid.X, pair_ds.valid.y, fit_v_ss, "the validation half")
    return _select_from_pair(ImportancePair(z_tr, z_v), q, tau_rule, "dss")


def mss_select(
    data: Dataset,
    q: float,
    k: int,
    k_prime: int,
    estimator,
    tau_rule: TauRule,
    seed,
    subsample_size: int | None = None,
) -> SelectionOutcome:
    """Bootstrap variant: averages k training and k' validation estimates.

    Draws k + k' with-replacement subsamples (of the original size unless
    ``subsample_size`` is given), fits each after standardizing it, and uses
    the absolute values of the averaged coefficient estimates as the two
    importance vectors. The rest of the pipeline is identical to
    :func:`dss_select`.
    """
    if k < 1 or k_prime < 1:
        raise ValueError(f"k and k_prime must be >= 1 (got k={k}, k_prime={k_prime})")
    size = data.n if subsample_size is None else int(subsample_size)
    root = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    draw_ss, *fit_seeds = root.spawn(1 + k + k_prime)
    samples = subsample(data, (k, k_prime), size, draw_ss)
    coefs = np.empty((k + k_prime, data.p))
    for b, (sample, fit_ss) in enumerate(zip(samples.samples, fit_seeds)):
        try:
            fit = estimator(standardize(sample.X), sample.y, fit_ss)
        except Exception as exc:
            raise EstimatorFailure(f"estimator failed on subsample {b}: {exc}") from exc
        coefs[b] = fit.coefficients
    # absolute value of the averaged estimates, not the average of absolute values
    z_tr = np.abs(coefs[:k].mean(axis=0))
    z_v = np.abs(coefs[k:].mean(axis=0))
    return _select_from_pair(ImportancePair(z_tr, z_v), q, tau_rule, "mss")


def bh_select(pvalues: np.ndarray, q: float) -> frozenset[int]:
    """Benjamini-Hochberg step-up rule at level q.

    Sorts the p-values ascending (stable, so ties resolve by index), finds
    the largest k with p_(k) <= k*q/p, and rejects the k smallest.
    """
    pvalues = np.asarray(pvalues, dtype=np.float64)
    if pvalues.ndim != 1:
        raise ValueError("pvalues must be a 1-d vector")
    if ((pvalues < 0) | (pvalues > 1)).any() or not np.isfinite(pvalues).all():
        raise ValueError("pvalues must lie in [0, 1]")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must be in (0, 1) (got {q})")
    p = pvalues.size
    order = np.argsort(pvalues, kind="stable")
    passed = np.flatnonzero(pvalues[order] <= q * np.arange(1, p + 1) / p)
    if passed.size == 0:
        return frozenset()
    k = int(passed[-1]) + 1
    return frozenset(int(j) for j in order[:k])


def ss_select(
    data: Dataset,
    lambda_grid: np.ndarray,
    n_subsamples: int = 50,
    pi_threshold: float = 0.7,
    seed=0,
    return_probabilities: bool = False,
):
    """Stability selection over half-size subsamples and a penalty grid.

    For every penalty, the selection probability of a feature is the
    fraction of subsamples (drawn without replacement, floor(n/2) rows) in
    which its lasso coefficient is nonzero; features whose maximum
    probability over the grid reaches ``pi_threshold`` are selected.
    """
    if not 0.5 < pi_threshold <= 1.0:
        raise ValueError(f"pi_threshold must be in (0.5, 1] (got {pi_threshold})")
    if n_subsamples < 2:
        raise ValueError(f"n_subsamples must be >= 2 (got {n_subsamples})")
    lambda_grid = np.sort(np.asarray(lambda_grid, dtype=np.float64))[::-1]
    if lambda_grid.size == 0 or (lambda_grid <= 0).any():
        raise ValueError("lambda_grid must be nonempty and positive")
    half = data.n // 2
    if half < 2:
        raise ValueError(f"stability selection needs n >= 4 (got n={data.n})")
    rng = np.random.default_rng(seed)
    active_counts = np.zeros((lambda_grid.size, data.p))
    for _ in range(n_subsamples):
        rows = rng.choice(data.n, size=half, replace=False)
        W, _ = lasso_path(standardize(data.X[rows]), data.y[rows], lambda_grid)
        active_counts += W != 0.0
    pi = active_counts / n_subsamples
    pi_max = pi.max(axis=0)
    selected = frozenset(int(j) for j in np.flatnonzero(pi_max >= pi_threshold))
    if return_probabilities:
        return selected, pi_max
    return selected


def default_ss_grid(data: Dataset, size: int = 20, min_ratio: float = 0.01) -> np.ndarray:
    """Penalty grid for stability selection from the standardized full data."""
    lam_max = max_penalty(standardize(data.X), data.y)
    if lam_max <= 0:
        raise ValueError("response has no linear association with any feature")
    return penalty_grid(lam_max, size, min_ratio)
