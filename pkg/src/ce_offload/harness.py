"""Scenario generation, experiment sweeps, and CSV persistence.

Three sweep kinds mirror the headline experiments:

* convergence - per-iteration averaged incumbent objective for several
  (samples, elites) choices, fixed-length traces.
* size        - averaged objective of each method while all task-size
  ranges are scaled up and down.
* lambda      - averaged objective across the energy/latency weight ratio
  10^q for q on the fixed grid -1.8..2.0 (step 0.2), per CAP count.

Trials are paired: within a trial every method/config/grid point sees the
same scenario. Each trial draws from its own seed-derived substream, so
results are independent of execution order and may run in parallel
(``CE_OFFLOAD_THREADS`` caps the worker count).
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import NamedTuple

from .ce_solver import SolverConfig, config_from_dict, solve, without_early_stop
from .model import (
    ConfigError,
    PowerProfile,
    Processor,
    Scenario,
    Task,
    Weights,
    validate,
)
from .oracles import bnb_solve, exhaustive_solve, full_mec, lpr_solve, no_mec
from .rng import derive_key, substream_rng

# substream tags so task draws and solver runs never share a stream
_TASK_STREAM = 1
_SOLVER_STREAM = 2

#: the weight-ratio sweep grid: lambda_e/lambda_t = 10**q, 20 points
LAMBDA_Q_GRID = tuple(round(-1.8 + 0.2 * k, 1) for k in range(20))

METHODS = ("asce", "bnb", "exhaustive", "lpr", "nomec", "fullmec")


@dataclass
class ScenarioSpec:
    """Random-instance family: dimensions, uniform task-size ranges, and the
    processor/power constants (defaults follow the reference setup: 200
    Mcycles/s local CPU, CAPs at 2/2.2/2.4 Gcycles/s, 10 Mbps links,
    P0=0.8 W, Ptx=1.258 W, Prx=1.181 W).

    The task-size ranges are this package's own choice of experiment knob;
    they are not part of the reference setup.
    """

    n_tasks: int = 6
    n_caps: int = 3
    alpha_bits: tuple[float, float] = (1e6, 8e6)
    beta_bits: tuple[float, float] = (5e5, 4e6)
    gamma_cycles: tuple[float, float] = (1e8, 1.5e9)
    local_rate_cps: float = 2e8
    cap_rates_cps: tuple[float, ...] = (2e9, 2.2e9, 2.4e9)
    link_rate_bps: float = 1e7
    power: PowerProfile = field(default_factory=lambda: PowerProfile(0.8, 1.258, 1.181))
    weights: Weights = field(default_factory=lambda: Weights(0.5, 0.5))
    trials: int = 100
    seed: int = 0

    def validate(self) -> None:
        if self.n_tasks < 1:
            raise ConfigError(f"n_tasks must be >= 1, got {self.n_tasks}")
        if self.n_caps < 0:
            raise ConfigError(f"n_caps must be >= 0, got {self.n_caps}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        for name in ("alpha_bits", "beta_bits", "gamma_cycles"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise ConfigError(f"{name} range must satisfy 0 < min <= max, got ({lo}, {hi})")
        if self.local_rate_cps <= 0 or self.link_rate_bps <= 0:
            raise ConfigError("processor and link rates must be positive")
        if self.n_caps > 0 and not self.cap_rates_cps:
            raise ConfigError("cap_rates_cps must be non-empty when n_caps > 0")
        if any(r <= 0 for r in self.cap_rates_cps):
            raise ConfigError("cap_rates_cps entries must be positive")


def build_processors(spec: ScenarioSpec, n_caps: int | None = None) -> list[Processor]:
    """Local CPU plus `n_caps` CAPs; CAP rates cycle through the configured
    list when more CAPs are requested than rates given."""
    caps = spec.n_caps if n_caps is None else n_caps
    procs = [Processor(index=0, cycles_per_sec=spec.local_rate_cps)]
    for i in range(1, caps + 1):
        procs.append(Processor(
            index=i,
            cycles_per_sec=spec.cap_rates_cps[(i - 1) % len(spec.cap_rates_cps)],
            uplink_bps=spec.link_rate_bps,
            downlink_bps=spec.link_rate_bps,
        ))
    return procs


def draw_tasks(spec: ScenarioSpec, trial_index: int) -> list[Task]:
    """Uniform draws from the spec ranges; a pure function of
    (spec.seed, trial_index), shared by every method within a trial."""
    rng = substream_rng(spec.seed, _TASK_STREAM, trial_index)
    tasks = []
    for _ in range(spec.n_tasks):
        tasks.append(Task(
            input_bits=rng.uniform(*spec.alpha_bits),
            output_bits=rng.uniform(*spec.beta_bits),
            cycles=rng.uniform(*spec.gamma_cycles),
        ))
    return tasks


def generate_scenario(spec: ScenarioSpec, trial_index: int) -> Scenario:
    spec.validate()
    return Scenario(
        tasks=draw_tasks(spec, trial_index),
        processors=build_processors(spec),
        power=spec.power,
        weights=spec.weights,
    )


def trial_config(config: SolverConfig, trial_index: int) -> SolverConfig:
    """Per-trial solver seed derived from the configured base seed."""
    return replace(config, seed=derive_key(config.seed, _SOLVER_STREAM, trial_index))


def run_method(method: str, scenario: Scenario, config: SolverConfig):
    """Run one solver; returns (assignment, objective, work metric).

    Work is samples*iterations for the learning solver, nodes explored for
    the exact searches, simplex pivots for the relaxation, and 1 for the
    fixed baselines.
    """
    if method == "asce":
        result = solve(scenario, config)
        out = (result.best_assignment, result.best_objective,
               config.samples * result.iterations_run)
    elif method == "bnb":
        r = bnb_solve(scenario)
        out = (r.assignment, r.objective, r.nodes_explored)
    elif method == "exhaustive":
        r = exhaustive_solve(scenario)
        out = (r.assignment, r.objective, r.nodes_explored)
    elif method == "lpr":
        r = lpr_solve(scenario)
        out = (r.assignment, r.objective, r.vertices_visited)
    elif method == "nomec":
        r = no_mec(scenario)
        out = (r.assignment, r.objective, 1)
    elif method == "fullmec":
        r = full_mec(scenario, 1)
        out = (r.assignment, r.objective, 1)
    else:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    problems = validate(out[0], scenario)
    if problems:
        raise AssertionError(f"{method} produced an infeasible assignment: {problems}")
    return out


# ---------------------------------------------------------------------------
# Worker pool
# ---------------------------------------------------------------------------

def worker_count() -> int:
    """Parallel worker budget: CE_OFFLOAD_THREADS if set, else the machine's
    CPU count."""
    env = os.environ.get("CE_OFFLOAD_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"CE_OFFLOAD_THREADS must be a positive integer, got {env!r}")
        if n < 1:
            raise ConfigError(f"CE_OFFLOAD_THREADS must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def _map_trials(fn, trials: int):
    """Apply `fn` to trial indices 0..trials-1, in order; work items are
    seed-isolated, so pooled execution returns identical results."""
    indices = range(trials)
    workers = min(worker_count(), trials)
    if workers <= 1:
        return [fn(i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

class Table(NamedTuple):
    header: tuple[str, ...]
    rows: list[tuple]


def _convergence_trial(trial: int, spec: ScenarioSpec, configs: tuple) -> list[list[float]]:
    scenario = generate_scenario(spec, trial)
    out = []
    for config in configs:
        run = solve(scenario, without_early_stop(trial_config(config, trial)))
        out.append([stats.incumbent_best for stats in run.trace])
    return out


def run_convergence(spec: ScenarioSpec, configs: list[SolverConfig]) -> Table:
    """Fixed-length incumbent traces averaged over trials, one row per
    (config, iteration)."""
    if not configs:
        raise ConfigError("convergence sweep needs at least one solver config")
    spec.validate()
    for config in configs:
        config.validate()
    per_trial = _map_trials(
        partial(_convergence_trial, spec=spec, configs=tuple(configs)), spec.trials)
    rows = []
    for ci, config in enumerate(configs):
        length = config.iterations + 1
        sums = [0.0] * length
        for traces in per_trial:
            for i, value in enumerate(traces[ci]):
                sums[i] += value
        for i in range(length):
            rows.append((config.samples, config.elites, i, sums[i] / spec.trials))
    return Table(("samples", "elites", "iter", "mean_incumbent_best"), rows)


def scale_spec(spec: ScenarioSpec, scale: float) -> ScenarioSpec:
    """Scale all three task-size ranges by a common factor."""
    if scale <= 0:
        raise ConfigError(f"scale must be positive, got {scale}")
    return replace(
        spec,
        alpha_bits=(spec.alpha_bits[0] * scale, spec.alpha_bits[1] * scale),
        beta_bits=(spec.beta_bits[0] * scale, spec.beta_bits[1] * scale),
        gamma_cycles=(spec.gamma_cycles[0] * scale, spec.gamma_cycles[1] * scale),
    )


def _size_trial(trial: int, spec: ScenarioSpec, scales: tuple, methods: tuple,
                config: SolverConfig) -> list[list[float]]:
    cfg = trial_config(config, trial)
    out = []
    for scale in scales:
        scenario = generate_scenario(scale_spec(spec, scale), trial)
        out.append([run_method(method, scenario, cfg)[1] for method in methods])
    return out


def run_size_sweep(spec: ScenarioSpec, methods=("asce", "bnb", "lpr", "nomec", "fullmec"),
                   scales=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
                   config: SolverConfig | None = None) -> Table:
    """Averaged objective per (task-size scale, method); paired trials."""
    if not scales:
        raise ConfigError("size sweep needs a non-empty scale grid")
    if not methods:
        raise ConfigError("size sweep needs at least one method")
    spec.validate()
    config = config or SolverConfig()
    config.validate()
    per_trial = _map_trials(
        partial(_size_trial, spec=spec, scales=tuple(scales), methods=tuple(methods),
                config=config),
        spec.trials)
    rows = []
    for si, scale in enumerate(scales):
        for mi, method in enumerate(methods):
            mean = sum(t[si][mi] for t in per_trial) / spec.trials
            rows.append((float(scale), method, mean))
    return Table(("scale", "method", "mean_objective"), rows)


def weights_for_ratio(q: float) -> Weights:
    """Weights summing to one with lambda_e / lambda_t = 10**q."""
    ratio = 10.0 ** q
    return Weights(latency=1.0 / (1.0 + ratio), energy=ratio / (1.0 + ratio))


def _lambda_trial(trial: int, spec: ScenarioSpec, m_values: tuple,
                  config: SolverConfig) -> list[list[float]]:
    tasks = draw_tasks(spec, trial)
    cfg = trial_config(config, trial)
    out = []
    for m in m_values:
        processors = build_processors(spec, n_caps=m)
        row = []
        for q in LAMBDA_Q_GRID:
            scenario = Scenario(tasks=tasks, processors=processors,
                                power=spec.power, weights=weights_for_ratio(q))
            row.append(run_method("asce", scenario, cfg)[1])
        out.append(row)
    return out


def run_lambda_sweep(spec: ScenarioSpec, m_values=(1, 2, 3),
                     config: SolverConfig | None = None) -> Table:
    """Averaged objective on the fixed q grid for each CAP count; the same
    trial shares its tasks across every (q, m) cell."""
    if not m_values:
        raise ConfigError("lambda sweep needs at least one CAP count")
    if any(m < 1 for m in m_values):
        raise ConfigError("lambda sweep CAP counts must be >= 1")
    spec.validate()
    config = config or SolverConfig()
    config.validate()
    per_trial = _map_trials(
        partial(_lambda_trial, spec=spec, m_values=tuple(m_values), config=config),
        spec.trials)
    rows = []
    for mi, m in enumerate(m_values):
        for qi, q in enumerate(LAMBDA_Q_GRID):
            w = weights_for_ratio(q)
            mean = sum(t[mi][qi] for t in per_trial) / spec.trials
            rows.append((q, int(m), w.latency, w.energy, mean))
    return Table(("q", "m", "lambda_t", "lambda_e", "mean_objective"), rows)


class MethodStats(NamedTuple):
    method: str
    mean_objective: float
    mean_work: float
    mean_seconds: float


def _compare_trial(trial: int, spec: ScenarioSpec, methods: tuple,
                   config: SolverConfig) -> list[tuple[float, float, float]]:
    scenario = generate_scenario(spec, trial)
    cfg = trial_config(config, trial)
    out = []
    for method in methods:
        start = time.perf_counter()
        _, objective, work = run_method(method, scenario, cfg)
        out.append((objective, float(work), time.perf_counter() - start))
    return out


def compare_methods(spec: ScenarioSpec, methods=("asce", "bnb", "lpr", "nomec", "fullmec"),
                    config: SolverConfig | None = None) -> list[MethodStats]:
    """Objective and cost side by side, averaged over paired trials.

    Wall-time means are measurements and vary run to run; keep them out of
    reproducible outputs (the CLI reports them on stderr only).
    """
    if not methods:
        raise ConfigError("comparison needs at least one method")
    spec.validate()
    config = config or SolverConfig()
    config.validate()
    per_trial = _map_trials(
        partial(_compare_trial, spec=spec, methods=tuple(methods), config=config),
        spec.trials)
    stats = []
    for mi, method in enumerate(methods):
        stats.append(MethodStats(
            method=method,
            mean_objective=sum(t[mi][0] for t in per_trial) / spec.trials,
            mean_work=sum(t[mi][1] for t in per_trial) / spec.trials,
            mean_seconds=sum(t[mi][2] for t in per_trial) / spec.trials,
        ))
    return stats


def compare_table(stats: list[MethodStats]) -> Table:
    """The reproducible slice of a comparison (no wall-clock columns)."""
    return Table(
        ("method", "mean_objective", "mean_work"),
        [(s.method, s.mean_objective, s.mean_work) for s in stats],
    )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip form; floats numpy scalars too
    return str(value)


def write_csv(table: Table, path) -> None:
    """UTF-8 CSV, '.' decimal separator, floats in round-trip form."""
    lines = [",".join(table.header)]
    lines.extend(",".join(_cell(c) for c in row) for row in table.rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path) -> Table:
    """Inverse of write_csv for this package's numeric tables."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = tuple(lines[0].split(","))
    rows = []
    for line in lines[1:]:
        row = []
        for cell in line.split(","):
            try:
                row.append(int(cell))
            except ValueError:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
        rows.append(tuple(row))
    return Table(header, rows)


# ---------------------------------------------------------------------------
# Spec JSON
# ---------------------------------------------------------------------------

def _range_from(doc: dict, key: str, default: tuple[float, float]) -> tuple[float, float]:
    if key not in doc:
        return default
    value = doc[key]
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"spec key '{key}' must be a [min, max] pair")
    return float(value[0]), float(value[1])


_SPEC_KEYS = {
    "n_tasks", "n_caps", "alpha_bits", "beta_bits", "gamma_cycles",
    "local_rate_cps", "cap_rates_cps", "link_rate_bps", "power", "weights",
    "trials", "seed",
}


def scenario_spec_from_dict(doc: dict) -> ScenarioSpec:
    if not isinstance(doc, dict):
        raise ConfigError("scenario spec must be a JSON object")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"scenario spec: unknown key(s) {sorted(unknown)}")
    base = ScenarioSpec()
    power = base.power
    if "power" in doc:
        p = doc["power"]
        for k in ("p0_w", "pt_w", "pr_w"):
            if k not in p:
                raise ConfigError(f"spec power: missing key '{k}'")
        power = PowerProfile(local_w=float(p["p0_w"]), tx_w=float(p["pt_w"]),
                             rx_w=float(p["pr_w"]))
    weights = base.weights
    if "weights" in doc:
        w = doc["weights"]
        for k in ("lambda_t", "lambda_e"):
            if k not in w:
                raise ConfigError(f"spec weights: missing key '{k}'")
        weights = Weights(latency=float(w["lambda_t"]), energy=float(w["lambda_e"]))
    spec = ScenarioSpec(
        n_tasks=int(doc.get("n_tasks", base.n_tasks)),
        n_caps=int(doc.get("n_caps", base.n_caps)),
        alpha_bits=_range_from(doc, "alpha_bits", base.alpha_bits),
        beta_bits=_range_from(doc, "beta_bits", base.beta_bits),
        gamma_cycles=_range_from(doc, "gamma_cycles", base.gamma_cycles),
        local_rate_cps=float(doc.get("local_rate_cps", base.local_rate_cps)),
        cap_rates_cps=tuple(float(r) for r in doc.get("cap_rates_cps", base.cap_rates_cps)),
        link_rate_bps=float(doc.get("link_rate_bps", base.link_rate_bps)),
        power=power,
        weights=weights,
        trials=int(doc.get("trials", base.trials)),
        seed=int(doc.get("seed", base.seed)),
    )
    spec.validate()
    return spec


@dataclass
class SweepSpec:
    """Everything a sweep or comparison run needs, minus the kind and the
    output location (those are command-line arguments)."""

    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    configs: tuple[SolverConfig, ...] = ()  # convergence variants
    scales: tuple[float, ...] = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    methods: tuple[str, ...] = ("asce", "bnb", "lpr", "nomec", "fullmec")
    m_values: tuple[int, ...] = (1, 2, 3)

    def convergence_configs(self) -> list[SolverConfig]:
        if self.configs:
            return list(self.configs)
        # default robustness grid: population scaled with the elite count
        return [replace(self.solver, samples=s, elites=e)
                for s, e in ((100, 10), (200, 20), (400, 40))]


_SWEEP_KEYS = {"scenario", "solver", "configs", "scales", "methods", "m_values"}


def sweep_spec_from_dict(doc: dict) -> SweepSpec:
    if not isinstance(doc, dict):
        raise ConfigError("sweep spec must be a JSON object")
    unknown = set(doc) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"sweep spec: unknown key(s) {sorted(unknown)}")
    base = SweepSpec()
    spec = SweepSpec(
        scenario=scenario_spec_from_dict(doc.get("scenario", {})),
        solver=config_from_dict(doc.get("solver", {})),
        configs=tuple(config_from_dict(c) for c in doc.get("configs", [])),
        scales=tuple(float(s) for s in doc.get("scales", base.scales)),
        methods=tuple(doc.get("methods", base.methods)),
        m_values=tuple(int(m) for m in doc.get("m_values", base.m_values)),
    )
    for method in spec.methods:
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    return spec


def sweep_spec_from_json(text: str) -> SweepSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"sweep spec JSON is not parseable: {exc}") from exc
    return sweep_spec_from_dict(doc)
