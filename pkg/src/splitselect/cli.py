"""Command-line interface: seeded simulation grids and file-based selection.

Two subcommands:

``simulate --config <path> --out <dir> [--threads N] [--full-scale]``
    Runs every (p1, rho, signal_range) scenario in the config for the
    requested methods and writes ``replications.csv`` (one row per scenario,
    method, and replication), ``summary.csv`` (one row per scenario and
    method), ``summary.txt`` (aligned table), and ``config.resolved.txt``
    (the fully resolved configuration, for provenance).

``select --data <csv> --response <col> --method {dss|mss|bh|ss} --q <level>``
    Runs one selection on a delimited file and writes ``selected.csv``.

Config files are plain ``key = value`` lines; ``#`` starts a comment. Lists
are comma separated and signal ranges are written ``lo:hi``. Unknown keys
are rejected. Keys and defaults::

    n                 (required) sample count
    p                 (required) feature count
    seed              (required) master seed, a nonnegative integer
    p1                signal counts, list of ints          [20]
    rho               AR(1) correlations in [0,1), list    [0.0]
    signal_range      lo:hi pairs with 0 <= lo < hi, list  [1:2]
    noise_sd          response noise sd                    1.0
    q                 nominal FDR level in (0,1)           0.1
    replications      replications per scenario            100
    methods           subset of dss,mss,bh,ss              dss,mss
    estimator         lasso or ols                         lasso
    folds             CV folds for the lasso               5
    grid_size         CV penalty-grid size                 100
    tau               elbow, elbow:train, or fixed:<v>     elbow
    k                 training subsamples (mss)            10
    k_prime           validation subsamples (mss)          10
    subsample_size    rows per mss subsample, 0 = n        0
    ss_subsamples     stability-selection subsamples       50
    ss_grid_size      stability-selection penalty grid     20
    ss_pi_threshold   stability-selection probability bar  0.7

The scenario grid is the Cartesian product of p1 x rho x signal_range,
enumerated lexicographically in that order. Replication randomness derives
from (master seed, scenario index, replication index) only, so results are
byte-identical across reruns and across ``--threads`` settings.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datagen import (
    Dataset,
    Scenario,
    cholesky_factor,
    gen_covariance,
    make_dataset,
    replication_seeds,
)
from .estimators import get_estimator, lasso_fit, ols_pvalues
from .metrics import ReplicationSummary, ScenarioReport, aggregate, fdp, power
from .preprocess import DegenerateColumnError
from .selection import TauRule, bh_select, default_ss_grid, dss_select, mss_select, ss_select

VALID_METHODS = ("dss", "mss", "bh", "ss")

# Configurations larger than this (n * p) are refused unless --full-scale is
# passed; the flag is the explicit opt-in for big runs.
DESK_SCALE_CELLS = 1_000_000


class CliError(Exception):
    """User-facing configuration or input error."""


@dataclass(frozen=True)
class GridConfig:
    """Fully resolved simulation grid configuration."""

    n: int
    p: int
    master_seed: int
    p1_values: tuple[int, ...]
    rho_values: tuple[float, ...]
    signal_ranges: tuple[tuple[float, float], ...]
    noise_sd: float
    q: float
    replications: int
    methods: tuple[str, ...]
    estimator: str
    folds: int
    grid_size: int
    tau_rule: TauRule
    k: int
    k_prime: int
    subsample_size: int  # 0 means "use n"
    ss_subsamples: int
    ss_grid_size: int
    ss_pi_threshold: float

    def scenarios(self) -> list[Scenario]:
        """Grid enumeration, lexicographic in (p1, rho, signal_range).

        Each scenario's seed is derived from the master seed and its index
        via a seed sequence, so scenarios are independent and reproducible.
        """
        out = []
        index = 0
        for p1 in self.p1_values:
            for rho in self.rho_values:
                for rng_pair in self.signal_ranges:
                    seed = int(
                        np.random.SeedSequence([self.master_seed, index]).generate_state(
                            1, np.uint64
                        )[0]
                    )
                    out.append(
                        Scenario(
                            n=self.n,
                            p=self.p,
                            p1=p1,
                            rho=rho,
                            signal_range=rng_pair,
                            q=self.q,
                            seed=seed,
                            noise_sd=self.noise_sd,
                        )
                    )
                    index += 1
        return out


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"config key {key!r}: {raw!r} is not an integer") from None


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise CliError(f"config key {key!r}: {raw!r} is not a number") from None


def _parse_range(key: str, raw: str) -> tuple[float, float]:
    parts = raw.split(":")
    if len(parts) != 2:
        raise CliError(f"config key {key!r}: {raw!r} is not of the form lo:hi")
    lo, hi = (_parse_float(key, s.strip()) for s in parts)
    if not 0.0 <= lo < hi:
        raise CliError(f"config key {key!r}: range {raw!r} must satisfy 0 <= lo < hi")
    return (lo, hi)


def parse_tau(spec: str) -> TauRule:
    """Parse a tau rule: ``elbow``, ``elbow:train``, or ``fixed:<value>``."""
    if spec == "elbow":
        return TauRule.elbow()
    if spec == "elbow:train":
        return TauRule.elbow(source="train")
    if spec.startswith("fixed:"):
        raw = spec[len("fixed:"):]
        try:
            value = float(raw)
        except ValueError:
            raise CliError(f"tau rule {spec!r}: {raw!r} is not a number") from None
        if value <= 0:
            raise CliError(f"tau rule {spec!r}: fixed tau must be > 0")
        return TauRule.fixed(value)
    raise CliError(f"unknown tau rule {spec!r} (expected elbow, elbow:train, or fixed:<v>)")


def _tau_spec(rule: TauRule) -> str:
    if rule.kind == "elbow":
        return "elbow" if rule.elbow_source == "valid" else "elbow:train"
    if rule.kind == "fixed":
        return f"fixed:{rule.value:g}"
    return f"oracle:{rule.level:g}"


_CONFIG_DEFAULTS = {
    "p1": "20",
    "rho": "0.0",
    "signal_range": "1:2",
    "noise_sd": "1.0",
    "q": "0.1",
    "replications": "100",
    "methods": "dss,mss",
    "estimator": "lasso",
    "folds": "5",
    "grid_size": "100",
    "tau": "elbow",
    "k": "10",
    "k_prime": "10",
    "subsample_size": "0",
    "ss_subsamples": "50",
    "ss_grid_size": "20",
    "ss_pi_threshold": "0.7",
}
_REQUIRED_KEYS = ("n", "p", "seed")


def parse_config(path: str) -> GridConfig:
    """Read and validate a simulation config file.

    Unknown keys are fatal (typo safety) and every range violation names
    the offending key.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}") from exc
    raw: dict[str, str] = {}
    known = set(_CONFIG_DEFAULTS) | set(_REQUIRED_KEYS)
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
        key, value = (s.strip() for s in text.split("=", 1))
        if key not in known:
            raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in raw:
            raise CliError(f"{path}:{lineno}: duplicate config key {key!r}")
        raw[key] = value
    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise CliError(f"config is missing required key {key!r}")
    values = dict(_CONFIG_DEFAULTS)
    values.update(raw)

    n = _parse_int("n", values["n"])
    p = _parse_int("p", values["p"])
    seed = _parse_int("seed", values["seed"])
    if n < 4:
        raise CliError(f"config key 'n': {n} is below the minimum of 4")
    if p < 1:
        raise CliError(f"config key 'p': {p} must be positive")
    if seed < 0:
        raise CliError(f"config key 'seed': {seed} must be nonnegative")

    p1_values = tuple(_parse_int("p1", s.strip()) for s in values["p1"].split(","))
    for p1 in p1_values:
        if not 0 <= p1 <= p:
            raise CliError(f"config key 'p1': {p1} outside [0, p={p}]")
    rho_values = tuple(_parse_float("rho", s.strip()) for s in values["rho"].split(","))
    for rho in rho_values:
        if not 0.0 <= rho < 1.0:
            raise CliError(f"config key 'rho': {rho} outside [0, 1)")
    signal_ranges = tuple(
        _parse_range("signal_range", s.strip()) for s in values["signal_range"].split(",")
    )
    noise_sd = _parse_float("noise_sd", values["noise_sd"])
    if noise_sd < 0:
        raise CliError(f"config key 'noise_sd': {noise_sd} must be >= 0")
    q = _parse_float("q", values["q"])
    if not 0.0 < q < 1.0:
        raise CliError(f"config key 'q': {q} outside (0, 1)")
    replications = _parse_int("replications", values["replications"])
    if replications < 1:
        raise CliError(f"config key 'replications': {replications} must be >= 1")

    methods = tuple(s.strip() for s in values["methods"].split(","))
    for m in methods:
        if m not in VALID_METHODS:
            raise CliError(
                f"config key 'methods': {m!r} is not one of {', '.join(VALID_METHODS)}"
            )
    if len(set(methods)) != len(methods):
        raise CliError("config key 'methods': duplicate method names")
    if "bh" in methods and n <= p + 1:
        raise CliError(
            f"method 'bh' needs n > p + 1 for t-test p-values (got n={n}, p={p}); "
            "drop bh from methods or increase n"
        )

    estimator = values["estimator"].strip()
    if estimator not in ("lasso", "ols"):
        raise CliError(f"config key 'estimator': {estimator!r} is not 'lasso' or 'ols'")
    folds = _parse_int("folds", values["folds"])
    if folds < 2:
        raise CliError(f"config key 'folds': {folds} must be >= 2")
    grid_size = _parse_int("grid_size", values["grid_size"])
    if grid_size < 1:
        raise CliError(f"config key 'grid_size': {grid_size} must be >= 1")
    tau_rule = parse_tau(values["tau"].strip())
    k = _parse_int("k", values["k"])
    k_prime = _parse_int("k_prime", values["k_prime"])
    if k < 1 or k_prime < 1:
        raise CliError(f"config keys 'k'/'k_prime': must be >= 1 (got {k}, {k_prime})")
    subsample_size = _parse_int("subsample_size", values["subsample_size"])
    if subsample_size < 0:
        raise CliError(f"config key 'subsample_size': {subsample_size} must be >= 0 (0 = n)")
    ss_subsamples = _parse_int("ss_subsamples", values["ss_subsamples"])
    if ss_subsamples < 2:
        raise CliError(f"config key 'ss_subsamples': {ss_subsamples} must be >= 2")
    ss_grid_size = _parse_int("ss_grid_size", values["ss_grid_size"])
    if ss_grid_size < 1:
        raise CliError(f"config key 'ss_grid_size': {ss_grid_size} must be >= 1")
    ss_pi_threshold = _parse_float("ss_pi_threshold", values["ss_pi_threshold"])
    if not 0.5 < ss_pi_threshold <= 1.0:
        raise CliError(f"config key 'ss_pi_threshold': {ss_pi_threshold} outside (0.5, 1]")

    return GridConfig(
        n=n,
        p=p,
        master_seed=seed,
        p1_values=p1_values,
        rho_values=rho_values,
        signal_ranges=signal_ranges,
        noise_sd=noise_sd,
        q=q,
        replications=replications,
        methods=methods,
        estimator=estimator,
        folds=folds,
        grid_size=grid_size,
        tau_rule=tau_rule,
        k=k,
        k_prime=k_prime,
        subsample_size=subsample_size,
        ss_subsamples=ss_subsamples,
        ss_grid_size=ss_grid_size,
        ss_pi_threshold=ss_pi_threshold,
    )


def _fmt(x) -> str:
    """CSV cell formatting: floats at 17 significant digits, None as empty."""
    if x is None:
        return ""
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


REPLICATION_COLUMNS = [
    "scenario", "n", "p", "p1", "rho", "r1", "r2", "noise_sd", "q", "scenario_seed",
    "method", "replication", "fdp", "power", "n_selected", "threshold", "tau", "error",
]
SUMMARY_COLUMNS = [
    "scenario", "n", "p", "p1", "rho", "r1", "r2", "noise_sd", "q", "scenario_seed",
    "method", "replications", "failures", "fdr", "fdr_mc_se", "mean_power",
    "fdp_min", "fdp_q25", "fdp_median", "fdp_q75", "fdp_max",
    "power_min", "power_q25", "power_median", "power_q75", "power_max",
]


@dataclass(frozen=True)
class _ScenarioContext:
    """Everything one worker needs to run replications of one scenario."""

    index: int
    scenario: Scenario
    chol: np.ndarray
    config: GridConfig


def _scenario_prefix(ctx: _ScenarioContext) -> list:
    s = ctx.scenario
    return [ctx.index, s.n, s.p, s.p1, s.rho, s.signal_range[0], s.signal_range[1],
            s.noise_sd, s.q, s.seed]


def _run_methods(ctx: _ScenarioContext, rep: int) -> list[dict]:
    """All requested methods on one replication's dataset; errors per row."""
    cfg = ctx.config
    scenario = ctx.scenario
    seeds = replication_seeds(scenario.seed, rep)
    data = make_dataset(scenario, rep, chol=ctx.chol)
    estimator = get_estimator(cfg.estimator, folds=cfg.folds, grid_size=cfg.grid_size)
    rows = []
    for method in cfg.methods:
        row = {"method": method, "replication": rep, "error": None,
               "fdp": None, "power": None, "n_selected": None,
               "threshold": None, "tau": None}
        try:
            if method == "dss":
                out = dss_select(data, scenario.q, estimator, cfg.tau_rule, seeds.dss)
                selected, row["threshold"], row["tau"] = out.selected, out.threshold, out.tau
            elif method == "mss":
                size = cfg.subsample_size or scenario.n
                out = mss_select(
                    data, scenario.q, cfg.k, cfg.k_prime, estimator, cfg.tau_rule,
                    seeds.mss, subsample_size=size,
                )
                selected, row["threshold"], row["tau"] = out.selected, out.threshold, out.tau
            elif method == "bh":
                selected = bh_select(ols_pvalues(data.X, data.y), scenario.q)
            else:
                grid = default_ss_grid(data, cfg.ss_grid_size)
                selected = ss_select(
                    data, grid, cfg.ss_subsamples, cfg.ss_pi_threshold, seeds.ss
                )
            row["fdp"] = fdp(selected, data.true_support)
            row["power"] = (
                power(selected, data.true_support) if data.true_support else None
            )
            row["n_selected"] = len(selected)
        except Exception as exc:  # recorded per row; the run continues
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def run_scenario_replications(
    ctx: _ScenarioContext, threads: int = 1
) -> dict[str, list[dict]]:
    """Run all replications of one scenario; returns rows grouped by method."""
    cfg = ctx.config
    reps = range(cfg.replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_rows = list(pool.map(lambda r: _run_methods(ctx, r), reps))
    else:
        all_rows = [_run_methods(ctx, r) for r in reps]
    grouped: dict[str, list[dict]] = {m: [] for m in cfg.methods}
    for rep_rows in all_rows:
        for row in rep_rows:
            grouped[row["method"]].append(row)
    return grouped


def _warm_kernel():
    # one tiny solve so numba compiles before worker threads start
    rng = np.random.default_rng(0)
    X = rng.standard_normal((8, 3))
    lasso_fit(X, X @ np.array([1.0, 0.0, 0.0]), 0.1)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)


def _resolved_config_text(config: GridConfig, threads: int, full_scale: bool) -> str:
    pairs = [
        ("n", config.n),
        ("p", config.p),
        ("seed", config.master_seed),
        ("p1", ", ".join(str(v) for v in config.p1_values)),
        ("rho", ", ".join("%g" % v for v in config.rho_values)),
        ("signal_range", ", ".join("%g:%g" % r for r in config.signal_ranges)),
        ("noise_sd", "%g" % config.noise_sd),
        ("q", "%g" % config.q),
        ("replications", config.replications),
        ("methods", ", ".join(config.methods)),
        ("estimator", config.estimator),
        ("folds", config.folds),
        ("grid_size", config.grid_size),
        ("tau", _tau_spec(config.tau_rule)),
        ("k", config.k),
        ("k_prime", config.k_prime),
        ("subsample_size", config.subsample_size),
        ("ss_subsamples", config.ss_subsamples),
        ("ss_grid_size", config.ss_grid_size),
        ("ss_pi_threshold", "%g" % config.ss_pi_threshold),
    ]
    lines = ["# resolved configuration"]
    lines += [f"{k} = {v}" for k, v in pairs]
    lines += [
        "# run parameters (not part of the config schema)",
        f"# scenarios = {len(config.scenarios())}",
        f"# threads = {threads}",
        f"# full_scale = {full_scale}",
    ]
    return "\n".join(lines) + "\n"


def _summary_text(rows: list[list]) -> str:
    header = ["scenario", "p1", "rho", "r1", "r2", "method",
              "reps", "fails", "fdr", "mean_power"]
    idx = [SUMMARY_COLUMNS.index(c) for c in
           ["scenario", "p1", "rho", "r1", "r2", "method", "replications", "failures"]]
    table = [header]
    for row in rows:
        cells = [str(row[i]) for i in idx]
        fdr = row[SUMMARY_COLUMNS.index("fdr")]
        mp = row[SUMMARY_COLUMNS.index("mean_power")]
        cells.append("" if fdr is None else "%.4f" % fdr)
        cells.append("" if mp is None else "%.4f" % mp)
        table.append(cells)
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in table]
    return "\n".join(lines) + "\n"


def run_simulate(
    config: GridConfig, out_dir: str, threads: int = 1, full_scale: bool = False
) -> list[ScenarioReport]:
    """Execute the whole grid and write the result files.

    Outputs are byte-identical across reruns and across thread counts for a
    fixed config, because all randomness derives from (master seed, scenario
    index, replication index).
    """
    if threads < 1:
        raise CliError(f"--threads must be >= 1 (got {threads})")
    if config.n * config.p > DESK_SCALE_CELLS and not full_scale:
        raise CliError(
            f"n*p = {config.n * config.p} exceeds the desk-scale limit "
            f"({DESK_SCALE_CELLS}); pass --full-scale to run it"
        )
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.resolved.txt"), "w", encoding="utf-8") as fh:
        fh.write(_resolved_config_text(config, threads, full_scale))

    _warm_kernel()
    scenarios = config.scenarios()
    contexts = []
    chol_cache: dict[tuple[int, float], np.ndarray] = {}
    for i, scenario in enumerate(scenarios):
        key = (scenario.p, scenario.rho)
        if key not in chol_cache:
            chol_cache[key] = cholesky_factor(gen_covariance(scenario.p, scenario.rho))
        contexts.append(_ScenarioContext(i, scenario, chol_cache[key], config))

    rep_rows: list[list] = []
    summary_rows: list[list] = []
    reports: list[ScenarioReport] = []
    for ctx in contexts:
        grouped = run_scenario_replications(ctx, threads=threads)
        prefix = _scenario_prefix(ctx)
        for method in config.methods:
            rows = sorted(grouped[method], key=lambda r: r["replication"])
            for row in rows:
                rep_rows.append(prefix + [
                    method, row["replication"], row["fdp"], row["power"],
                    row["n_selected"], row["threshold"], row["tau"], row["error"],
                ])
            good = [r for r in rows if r["error"] is None]
            failures = len(rows) - len(good)
            if good:
                summaries = [
                    ReplicationSummary(
                        replication_id=r["replication"], method=method, fdp=r["fdp"],
                        power=r["power"], n_selected=r["n_selected"],
                        threshold=r["threshold"], tau=r["tau"],
                    )
                    for r in good
                ]
                report = aggregate(summaries, ctx.scenario)
                reports.append(report)
                pq = report.power_quantiles or (None,) * 5
                summary_rows.append(prefix + [
                    method, report.replications, failures, report.fdr, report.fdr_mc_se,
                    report.mean_power, *report.fdp_quantiles, *pq,
                ])
            else:
                summary_rows.append(prefix + [method, 0, failures] + [None] * 13)

    _write_csv(os.path.join(out_dir, "replications.csv"), REPLICATION_COLUMNS, rep_rows)
    _write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_COLUMNS, summary_rows)
    tmp = os.path.join(out_dir, "summary.txt.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(_summary_text(summary_rows))
    os.replace(tmp, os.path.join(out_dir, "summary.txt"))
    return reports


def _read_feature_csv(path: str, response: str) -> tuple[Dataset, list[str]]:
    """Parse a delimited data file into a dataset, with named diagnostics."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CliError(f"{path}: file is empty") from None
            rows = list(reader)
    except OSError as exc:
        raise CliError(f"cannot read data file {path}: {exc}") from exc
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise CliError(f"{path}: duplicate column name(s): {', '.join(dupes)}")
    if response not in header:
        raise CliError(
            f"{path}: response column {response!r} not found; "
            f"columns are: {', '.join(header)}"
        )
    if len(header) < 2:
        raise CliError(f"{path}: need at least one feature column besides {response!r}")
    if not rows:
        raise CliError(f"{path}: no data rows")
    resp_idx = header.index(response)
    feature_names = [h for i, h in enumerate(header) if i != resp_idx]
    n, p = len(rows), len(feature_names)
    X = np.empty((n, p))
    y = np.empty(n)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise CliError(
                f"{path}: line {i + 2} has {len(row)} fields, expected {len(header)}"
            )
        col = 0
        for j, cell in enumerate(row):
            cell = cell.strip()
            name = header[j]
            if cell == "":
                raise CliError(f"{path}: missing value in column {name!r} on line {i + 2}")
            try:
                value = float(cell)
            except ValueError:
                raise CliError(
                    f"{path}: non-numeric value {cell!r} in column {name!r} on line {i + 2}"
                ) from None
            if not math.isfinite(value):
                raise CliError(
                    f"{path}: non-finite value {cell!r} in column {name!r} on line {i + 2}"
                )
            if j == resp_idx:
                y[i] = value
            else:
                X[i, col] = value
                col += 1
    return Dataset(X=X, y=y), feature_names


def run_select(
    data_path: str,
    response: str,
    method: str,
    q: float,
    out_dir: str,
    tau_rule: TauRule | None = None,
    k: int = 10,
    k_prime: int = 10,
    estimator_name: str = "lasso",
    folds: int = 5,
    grid_size: int = 100,
    ss_subsamples: int = 50,
    ss_grid_size: int = 20,
    ss_pi_threshold: float = 0.7,
    seed: int = 0,
) -> int:
    """Select features from a delimited file; returns the selected count."""
    if method not in VALID_METHODS:
        raise CliError(f"unknown method {method!r} (expected one of {', '.join(VALID_METHODS)})")
    if not 0.0 < q < 1.0:
        raise CliError(f"--q must be in (0, 1) (got {q})")
    data, names = _read_feature_csv(data_path, response)
    sd = data.X.std(axis=0)
    dead = np.flatnonzero(sd == 0.0)
    if dead.size:
        listed = ", ".join(names[j] for j in dead)
        raise CliError(f"zero-variance feature column(s): {listed}")
    if tau_rule is None:
        tau_rule = TauRule.elbow()
    if method in ("dss", "mss") and data.n < 8:
        raise CliError(f"method {method!r} needs at least 8 rows (got {data.n})")
    if method == "bh" and data.n <= data.p + 1:
        raise CliError(
            f"method 'bh' needs n > p + 1 for t-test p-values "
            f"(got n={data.n}, p={data.p})"
        )
    estimator = get_estimator(estimator_name, folds=folds, grid_size=grid_size)

    os.makedirs(out_dir, exist_ok=True)
    out_path = os.path.join(out_dir, "selected.csv")
    root = np.random.SeedSequence(seed)
    if method == "dss":
        out = dss_select(data, q, estimator, tau_rule, root)
    elif method == "mss":
        out = mss_select(data, q, k, k_prime, estimator, tau_rule, root)
    elif method == "bh":
        pvals = ols_pvalues(data.X, data.y)
        selected = sorted(bh_select(pvals, q))
        _write_csv(out_path, ["feature", "p_value"],
                   [[names[j], float(pvals[j])] for j in selected])
        print(f"method=bh q={q:g} selected={len(selected)}")
        return len(selected)
    else:
        grid = default_ss_grid(data, ss_grid_size)
        selected_set, pi_max = ss_select(
            data, grid, ss_subsamples, ss_pi_threshold, root, return_probabilities=True
        )
        selected = sorted(selected_set)
        _write_csv(out_path, ["feature", "max_selection_probability"],
                   [[names[j], float(pi_max[j])] for j in selected])
        print(f"method=ss pi_threshold={ss_pi_threshold:g} selected={len(selected)}")
        return len(selected)

    selected = sorted(out.selected)
    _write_csv(out_path, ["feature", "z_tr", "z_v", "fi"],
               [[names[j], float(out.z_tr[j]), float(out.z_v[j]), float(out.fi[j])]
                for j in selected])
    print(
        f"method={method} q={q:g} threshold={out.threshold:g} tau={out.tau:g} "
        f"selected={len(selected)}"
    )
    return len(selected)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitselect",
        description="FDR-controlled feature selection and its simulation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a seeded simulation grid")
    sim.add_argument("--config", required=True, help="path to the key = value config file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    sim.add_argument(
        "--full-scale", action="store_true",
        help="allow configurations beyond the desk-scale size limit",
    )

    sel = sub.add_parser("select", help="select features from a delimited file")
    sel.add_argument("--data", required=True, help="CSV file with a header row")
    sel.add_argument("--response", required=True, help="name of the response column")
    sel.add_argument("--method", required=True, choices=VALID_METHODS)
    sel.add_argument("--q", type=float, required=True, help="nominal FDR level in (0, 1)")
    sel.add_argument("--tau", default="elbow",
                     help="tau rule: elbow, elbow:train, or fixed:<v> (default elbow)")
    sel.add_argument("--k", type=int, default=10, help="training subsamples for mss")
    sel.add_argument("--k-prime", type=int, default=10, help="validation subsamples for mss")
    sel.add_argument("--estimator", default="lasso", choices=("lasso", "ols"))
    sel.add_argument("--folds", type=int, default=5)
    sel.add_argument("--grid-size", type=int, default=100)
    sel.add_argument("--ss-subsamples", type=int, default=50)
    sel.add_argument("--ss-grid-size", type=int, default=20)
    sel.add_argument("--ss-pi-threshold", type=float, default=0.7)
    sel.add_argument("--seed", type=int, default=0)
    sel.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = parse_config(args.config)
            run_simulate(config, args.out, threads=args.threads, full_scale=args.full_scale)
        else:
            run_select(
                data_path=args.data,
                response=args.response,
                method=args.method,
                q=args.q,
                out_dir=args.out,
                tau_rule=parse_tau(args.tau),
                k=args.k,
                k_prime=args.k_prime,
                estimator_name=args.estimator,
                folds=args.folds,
                grid_size=args.grid_size,
                ss_subsamples=args.ss_subsamples,
                ss_grid_size=args.ss_grid_size,
                ss_pi_threshold=args.ss_pi_threshold,
                seed=args.seed,
            )
    except (CliError, DegenerateColumnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
