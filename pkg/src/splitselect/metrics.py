"""False discovery proportion, power, and replication-level aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import Scenario


class UndefinedPowerError(ValueError):
    """Power is undefined when there are no true signals."""


def fdp(selected, true_support) -> float:
    """False discovery proportion: |selected \\ truth| / max(|selected|, 1)."""
    selected = frozenset(selected)
    true_support = frozenset(true_support)
    return len(selected - true_support) / max(len(selected), 1)


def power(selected, true_support) -> float:
    """Fraction of true signals selected; undefined for an empty truth set."""
    selected = frozenset(selected)
    true_support = frozenset(true_support)
    if not true_support:
        raise UndefinedPowerError("power is undefined when true_support is empty")
    return len(selected & true_support) / len(true_support)


@dataclass(frozen=True)
class ReplicationSummary:
    """Per-replication selection outcome.

    ``power`` is None in global-null scenarios (no true signals), and
    ``threshold`` / ``tau`` are None for methods without those diagnostics.
    """

    replication_id: int
    method: str
    fdp: float
    power: float | None
    n_selected: int
    threshold: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.fdp <= 1.0:
            raise ValueError(f"fdp must be in [0, 1] (got {self.fdp})")
        if self.power is not None and not 0.0 <= self.power <= 1.0:
            raise ValueError(f"power must be in [0, 1] (got {self.power})")
        if self.n_selected == 0 and self.fdp != 0.0:
            raise ValueError("an empty selection forces fdp = 0")


@dataclass(frozen=True)
class ScenarioReport:
    """Aggregate over one scenario's replications for one method.

    ``fdr`` is the arithmetic mean of the per-replication false discovery
    proportions; quantile summaries are (min, q25, median, q75, max) with
    the linear-interpolation quantile convention.
    """

    scenario: Scenario
    method: str
    replications: int
    fdr: float
    fdr_mc_se: float
    mean_power: float | None
    fdp_quantiles: tuple[float, float, float, float, float]
    power_quantiles: tuple[float, float, float, float, float] | None


def _five_numbers(values: np.ndarray) -> tuple[float, float, float, float, float]:
    qs = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return tuple(float(v) for v in qs)


def aggregate(summaries, scenario: Scenario) -> ScenarioReport:
    """Fold replication summaries into a scenario report.

    The input may arrive in any order (replications run concurrently);
    summaries are sorted by replication id first so the result is
    order-independent. All summaries must share one method.
    """
    summaries = sorted(summaries, key=lambda s: s.replication_id)
    if not summaries:
        raise ValueError("cannot aggregate an empty list of summaries")
    methods = {s.method for s in summaries}
    if len(methods) > 1:
        raise ValueError(f"summaries mix methods: {sorted(methods)}")
    m = len(summaries)
    fdps = np.array([s.fdp for s in summaries])
    fdr = float(fdps.mean())
    fdr_mc_se = float(fdps.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    powers = [s.power for s in summaries]
    if any(pw is None for pw in powers):
        mean_power = None
        power_quantiles = None
    else:
        power_arr = np.array(powers, dtype=np.float64)
        mean_power = float(power_arr.mean())
        power_quantiles = _five_numbers(power_arr)
    return ScenarioReport(
        scenario=scenario,
        method=methods.pop(),
        replications=m,
        fdr=fdr,
        fdr_mc_se=fdr_mc_se,
        mean_power=mean_power,
        fdp_quantiles=_five_numbers(fdps),
        power_quantiles=power_quantiles,
    )
