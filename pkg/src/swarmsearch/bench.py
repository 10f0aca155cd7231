"""Strategy sweeps: run paired trials, aggregate them and export CSV.

Trial ``i`` of every cell uses the same per-trial seed, so all strategies
at one sweep point face the same obstacles, targets and spawn points.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .agent import canonical_strategy, make_strategy
from .engine import SimConfig, TrialResult, run_trial
from .errors import SetupError, StatisticsInputError
from .potential_field import PotentialParams
from .stats import mann_whitney_u
from .stochastic import LevyParams
from .world import load_scenario

log = logging.getLogger(__name__)

RAW_HEADER = ["strategy", "sweep_value", "trial", "seed", "completed", "completion_time",
              "total_distance"]
AGGREGATE_HEADER = ["strategy", "sweep_variable", "sweep_value", "trials", "mean", "std",
                    "median", "min", "max", "censored", "mean_total_distance",
                    "mean_nn_distance"]
SWEEP_VARIABLES = ("robots", "targets")
DEFAULT_FIXED_DURATION = 1.5


@dataclass(frozen=True)
class StrategyOptions:
    """Parameters shared by all strategies of an experiment."""

    levy: LevyParams = field(default_factory=LevyParams)
    fixed_duration: float = DEFAULT_FIXED_DURATION
    potential: PotentialParams = field(default_factory=PotentialParams)
    k: float = 0.6
    sigma_omega: float = math.pi
    turn_duration: float = 1.0

    def build(self, name: str):
        return make_strategy(name, levy=self.levy, fixed_duration=self.fixed_duration,
                             potential=self.potential, k=self.k,
                             sigma_omega=self.sigma_omega, turn_duration=self.turn_duration)


@dataclass(frozen=True)
class ExperimentSpec:
    strategies: tuple
    sweep_variable: str
    sweep_values: tuple
    fixed_value: int
    trials: int = 20
    base: SimConfig = field(default_factory=SimConfig)
    options: StrategyOptions = field(default_factory=StrategyOptions)
    output: Optional[str] = None

    def __post_init__(self):
        if not self.strategies:
            raise SetupError("experiment needs at least one strategy")
        object.__setattr__(self, "strategies",
                           tuple(canonical_strategy(s) for s in self.strategies))
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise SetupError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if not self.sweep_values:
            raise SetupError("sweep values must be non-empty")
        object.__setattr__(self, "sweep_values", tuple(int(v) for v in self.sweep_values))
        if self.trials < 1:
            raise SetupError("trials must be at least 1")

    def config_for(self, strategy: str, value: int, trial: int) -> SimConfig:
        robots, targets = (value, self.fixed_value) if self.sweep_variable == "robots" \
            else (self.fixed_value, value)
        return replace(self.base, strategy=self.options.build(strategy), n_robots=robots,
                       n_targets=targets, trial_index=trial)

    def cells(self) -> list[tuple[str, int]]:
        return [(s, v) for s in self.strategies for v in self.sweep_values]


@dataclass(frozen=True)
class TrialRecord:
    strategy: str
    sweep_value: int
    trial: int
    result: TrialResult


@dataclass
class CellStats:
    trials: int
    mean: float
    std: float
    median: float
    min: float
    max: float
    censored: int
    mean_total_distance: float
    mean_nn_distance: Optional[float]
    completion_times: list
    nn_distances: list

    @classmethod
    def from_results(cls, results: Sequence[TrialResult]) -> "CellStats":
        times = [r.completion_time for r in results]
        nn = [r.mean_nn_distance for r in results]
        nn_ok = [v for v in nn if v is not None]
        return cls(
            trials=len(times),
            mean=statistics.fmean(times),
            std=statistics.stdev(times) if len(times) > 1 else 0.0,
            median=statistics.median(times),
            min=min(times),
            max=max(times),
            censored=sum(not r.completed for r in results),
            mean_total_distance=statistics.fmean(r.distance_sum for r in results),
            mean_nn_distance=statistics.fmean(nn_ok) if nn_ok else None,
            completion_times=times,
            nn_distances=nn,
        )


@dataclass
class AggregateStats:
    spec: ExperimentSpec
    cells: dict
    raw: list

    def cell(self, strategy: str, value: int) -> CellStats:
        return self.cells[(canonical_strategy(strategy), int(value))]


def _execute(configs: list[SimConfig], workers: int) -> list[TrialResult]:
    if workers <= 1 or len(configs) == 1:
        return [run_trial(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, configs, chunksize=1))


def run_experiment(spec: ExperimentSpec, workers: int = 1,
                   event_dir: Optional[Path] = None) -> AggregateStats:
    """Run every (strategy, sweep point, trial) and aggregate per cell.

    Results are ordered by cell then trial index regardless of which worker
    finished first. With ``event_dir`` trials run serially and each writes a
    JSON-lines event log there.
    """
    jobs = []
    for strategy, value in spec.cells():
        for trial in range(spec.trials):
            try:
                cfg = spec.config_for(strategy, value, trial)
            except Exception as exc:
                raise SetupError(f"cell {strategy}@{spec.sweep_variable}={value}: {exc}") from exc
            jobs.append((strategy, value, trial, cfg))

    if event_dir is not None:
        event_dir = Path(event_dir)
        event_dir.mkdir(parents=True, exist_ok=True)
        results = []
        for strategy, value, trial, cfg in jobs:
            safe = strategy.replace("+", "_")
            path = event_dir / f"events_{safe}_{spec.sweep_variable}{value}_trial{trial}.jsonl"
            with open(path, "w") as fh:
                results.append(run_trial(cfg, lambda rec: fh.write(json.dumps(rec) + "\n")))
    else:
        try:
            results = _execute([j[3] for j in jobs], workers)
        except SetupError as exc:
            raise SetupError(f"experiment setup failed: {exc}") from exc

    raw = [TrialRecord(s, v, t, r) for (s, v, t, _), r in zip(jobs, results)]
    cells = {}
    for strategy, value in spec.cells():
        rs = [rec.result for rec in raw if rec.strategy == strategy and rec.sweep_value == value]
        cells[(strategy, value)] = CellStats.from_results(rs)
        log.info("%s %s=%d mean=%.2f censored=%d", strategy, spec.sweep_variable, value,
                 cells[(strategy, value)].mean, cells[(strategy, value)].censored)
    for trial in range(spec.trials):
        hashes = {rec.result.scenario_hash for rec in raw
                  if rec.trial == trial and rec.sweep_value == spec.sweep_values[0]}
        log.debug("trial %d scenario hashes %s", trial, sorted(hashes))
    return AggregateStats(spec, cells, raw)


@dataclass(frozen=True)
class ComparisonReport:
    a: str
    b: str
    point: int
    u: float
    p_value: float
    mean_a: float
    mean_b: float
    mean_difference: float
    ordering: str


def compare_strategies(stats: AggregateStats, a: str, b: str, point: int,
                       level: float = 0.05) -> ComparisonReport:
    """Mann-Whitney comparison of completion times of two cells.

    ``ordering`` is ``"a faster"``/``"b faster"`` when the difference is
    significant at ``level`` and ``"tie"`` otherwise.
    """
    ca, cb = stats.cell(a, point), stats.cell(b, point)
    if ca.trials != cb.trials:
        raise StatisticsInputError(f"trial counts differ: {ca.trials} vs {cb.trials}")
    return compare_samples(ca.completion_times, cb.completion_times, a=canonical_strategy(a),
                           b=canonical_strategy(b), point=int(point), level=level)


def compare_samples(xa: Sequence[float], xb: Sequence[float], a: str = "a", b: str = "b",
                    point: int = 0, level: float = 0.05) -> ComparisonReport:
    if len(xa) != len(xb):
        raise StatisticsInputError(f"trial counts differ: {len(xa)} vs {len(xb)}")
    test = mann_whitney_u(xa, xb)
    mean_a, mean_b = statistics.fmean(xa), statistics.fmean(xb)
    if test.p_value < level and mean_a != mean_b:
        ordering = "a faster" if mean_a < mean_b else "b faster"
    else:
        ordering = "tie"
    return ComparisonReport(a, b, point, test.u, test.p_value, mean_a, mean_b,
                            mean_a - mean_b, ordering)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_results(stats: AggregateStats, path) -> dict:
    """Write ``raw.csv``, ``aggregate.csv`` and ``scenarios.csv`` into ``path``.

    Output is byte-identical for identical inputs.
    """
    if not stats.raw:
        raise SetupError("nothing to export: experiment has no trials")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    spec = stats.spec
    files = {"raw": out / "raw.csv", "aggregate": out / "aggregate.csv",
             "scenarios": out / "scenarios.csv"}
    with open(files["raw"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for rec in stats.raw:
            r = rec.result
            w.writerow([rec.strategy, rec.sweep_value, rec.trial, r.seed, _fmt(r.completed),
                        _fmt(float(r.completion_time)), _fmt(r.distance_sum)])
    with open(files["aggregate"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_HEADER)
        for (strategy, value), c in stats.cells.items():
            w.writerow([strategy, spec.sweep_variable, value, c.trials, _fmt(c.mean), _fmt(c.std),
                        _fmt(float(c.median)), _fmt(float(c.min)), _fmt(float(c.max)), c.censored,
                        _fmt(c.mean_total_distance), _fmt(c.mean_nn_distance)])
    with open(files["scenarios"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "sweep_value", "trial", "seed", "scenario_hash"])
        for rec in stats.raw:
            w.writerow([rec.strategy, rec.sweep_value, rec.trial, rec.result.seed,
                        rec.result.scenario_hash])
    return files


def spec_from_dict(doc: dict, base_dir: Optional[Path] = None) -> ExperimentSpec:
    """Build an ``ExperimentSpec`` from a parsed JSON experiment document.

    Recognised keys: ``strategies``, ``sweep`` ({"variable", "values"}),
    ``fixed``, ``trials``, ``master_seed``, ``scenario`` (path), ``output``,
    ``sim`` (dt, t_max, width, height, n_obstacles, r_v) and ``strategy``
    (alpha, gamma, n, fixed_duration, k_rep, rho0, k, sigma_omega,
    turn_duration).
    """
    try:
        sweep = doc["sweep"]
        sim = dict(doc.get("sim", {}))
        strat = dict(doc.get("strategy", {}))
        scenario = None
        if doc.get("scenario"):
            scen_path = Path(doc["scenario"])
            if base_dir is not None and not scen_path.is_absolute():
                scen_path = base_dir / scen_path
            scenario = load_scenario(scen_path)
        base = SimConfig(master_seed=int(doc.get("master_seed", 0)), scenario=scenario,
                         **{k: sim[k] for k in ("dt", "t_max", "width", "height",
                                                "n_obstacles", "r_v") if k in sim})
        options = StrategyOptions(
            levy=LevyParams(float(strat.get("alpha", 2.0)), float(strat.get("gamma", 1.0)),
                            int(strat.get("n", 100))),
            fixed_duration=float(strat.get("fixed_duration", DEFAULT_FIXED_DURATION)),
            potential=PotentialParams(float(strat.get("k_rep", 1.0)),
                                      float(strat.get("rho0", 1.0))),
            k=float(strat.get("k", 0.6)),
            sigma_omega=float(strat.get("sigma_omega", math.pi)),
            turn_duration=float(strat.get("turn_duration", 1.0)),
        )
        return ExperimentSpec(
            strategies=tuple(doc["strategies"]),
            sweep_variable=sweep["variable"],
            sweep_values=tuple(sweep["values"]),
            fixed_value=int(doc["fixed"]),
            trials=int(doc.get("trials", 20)),
            base=base,
            options=options,
            output=doc.get("output"),
        )
    except (KeyError, TypeError) as exc:
        raise SetupError(f"malformed experiment document: missing or invalid {exc}") from exc


def load_experiment_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SetupError(f"{path}: invalid JSON ({exc})") from exc
    return spec_from_dict(doc, base_dir=path.parent)
