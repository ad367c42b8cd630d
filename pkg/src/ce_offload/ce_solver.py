"""Cross-entropy offloading solver with adaptive block sampling.

The solver learns a vector of Bernoulli probabilities ("the indicator"), one
per (task, processor) entry. Each iteration draws a population of feasible
assignments from the indicator, keeps the lowest-objective fraction (the
elites), refits the indicator to the elite frequencies, and blends the fit
with the previous indicator through a learning rate.

Feasibility is enforced during sampling, not by rejection: processors are
visited in random order, each task is drawn at most once, and any task still
unassigned when a single processor remains is forced onto it. Every sample
therefore puts each task on exactly one processor.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .model import Assignment, ConfigError, Scenario, ScenarioEvaluator
from .rng import derive_key, uniform_matrix


def init_indicator(n_tasks: int, n_caps: int) -> np.ndarray:
    """Uninformed starting indicator: every entry 0.5; shape (N, M+1)."""
    if n_tasks < 1 or n_caps < 0:
        raise ConfigError(f"need n_tasks >= 1 and n_caps >= 0, got {n_tasks}, {n_caps}")
    return np.full((n_tasks, n_caps + 1), 0.5)


def indicator_vector(indicator: np.ndarray) -> np.ndarray:
    """Flatten to processor-block order: all tasks for processor 0 first."""
    return np.asarray(indicator).T.ravel().copy()


def draws_per_sample(n_tasks: int, n_procs: int) -> int:
    """Uniform variates one sample consumes: one per processor choice plus
    one per task in each of the n_procs - 1 processed blocks."""
    return (n_procs - 1) * (n_tasks + 1)


def _sample_procs(u_rows: list, n_procs: int, uniforms: list) -> list:
    """Draw one feasible processor-index vector from indicator rows.

    Consumes uniforms in a fixed layout (block pick, then one per task,
    repeated), so the same stream always reproduces the same sample.
    Already-assigned tasks skip their slot, which is equivalent to zeroing
    their probability in every block not yet processed.
    """
    n = len(u_rows)
    procs = [-1] * n
    remaining = list(range(n_procs))
    pos = 0
    for _ in range(n_procs - 1):
        k = len(remaining)
        j = int(uniforms[pos] * k)
        if j >= k:  # guard the u == 1.0 edge, unreachable for [0,1) streams
            j = k - 1
        g = remaining.pop(j)
        pos += 1
        for i in range(n):
            if procs[i] < 0 and uniforms[pos + i] < u_rows[i][g]:
                procs[i] = g
        pos += n
    last = remaining[0]
    for i in range(n):
        if procs[i] < 0:
            procs[i] = last
    return procs


def draw_sample(indicator: np.ndarray, scenario: Scenario, rng: random.Random) -> Assignment:
    """One feasible assignment sampled from the indicator."""
    u = np.asarray(indicator)
    n_procs = scenario.n_procs
    if u.shape != (scenario.n_tasks, n_procs):
        raise ConfigError(f"indicator shape {u.shape} does not match scenario "
                          f"({scenario.n_tasks}, {n_procs})")
    uniforms = [rng.random() for _ in range(draws_per_sample(scenario.n_tasks, n_procs))]
    return Assignment(_sample_procs(u.tolist(), n_procs, uniforms), n_procs)


class Sample(NamedTuple):
    assignment: Assignment
    objective: float


def draw_batch(indicator: np.ndarray, scenario: Scenario, samples: int,
               rng: random.Random) -> list[Sample]:
    """`samples` independent draws with their objective values.

    Per-sample substream keys are drawn from `rng` up front, so the samples
    themselves may be generated in any order (or concurrently) without
    changing the result.
    """
    if samples < 1:
        raise ConfigError(f"samples must be >= 1, got {samples}")
    u = np.asarray(indicator)
    n_procs = scenario.n_procs
    ev = ScenarioEvaluator(scenario)
    keys = [rng.getrandbits(64) for _ in range(samples)]
    n_draws = draws_per_sample(scenario.n_tasks, n_procs)
    rows = uniform_matrix(keys, n_draws).tolist() if n_draws else [[]] * samples
    u_rows = u.tolist()
    out = []
    for row in rows:
        procs = _sample_procs(u_rows, n_procs, row)
        out.append(Sample(Assignment(procs, n_procs), ev.objective(procs)))
    return out


def select_elites(batch: list[Sample], elite_count: int) -> list[Sample]:
    """The `elite_count` lowest-objective samples, ascending; ties keep the
    earlier sample first (stable sort on batch position)."""
    if not 1 <= elite_count <= len(batch):
        raise ConfigError(f"elite_count must be in 1..{len(batch)}, got {elite_count}")
    return sorted(batch, key=lambda s: s.objective)[:elite_count]


def elite_indicator(elites: list[Sample]) -> np.ndarray:
    """Entrywise mean of the elite assignments' binary matrices."""
    if not elites:
        raise ConfigError("elite set is empty")
    first = elites[0].assignment
    u = np.zeros((first.n_tasks, first.n_procs))
    for sample in elites:
        for n, m in enumerate(sample.assignment.procs):
            u[n, m] += 1.0
    u /= len(elites)
    return u


def smooth(u_star: np.ndarray, u_prev: np.ndarray, learning_rate: float) -> np.ndarray:
    """Convex blend lr * u_star + (1 - lr) * u_prev, clipped to [0, 1]."""
    if not 0.0 <= learning_rate <= 1.0:
        raise ConfigError(f"learning_rate must be in [0, 1], got {learning_rate}")
    u_star = np.asarray(u_star, dtype=float)
    u_prev = np.asarray(u_prev, dtype=float)
    if u_star.shape != u_prev.shape:
        raise ConfigError(f"indicator shapes differ: {u_star.shape} vs {u_prev.shape}")
    return np.clip(learning_rate * u_star + (1.0 - learning_rate) * u_prev, 0.0, 1.0)


@dataclass
class SolverConfig:
    """Cross-entropy hyperparameters.

    `iterations` is the budget T of the inclusive loop t = 0..T, so a run
    without early stopping draws T + 1 batches. `early_stop_tolerance`
    of None disables early stopping (needed for fixed-length traces).
    """

    samples: int = 200
    elites: int = 20
    learning_rate: float = 0.8
    iterations: int = 30
    seed: int = 0
    early_stop_tolerance: float | None = 1e-6

    def validate(self) -> None:
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if not 1 <= self.elites <= self.samples:
            raise ConfigError(f"elites must be in 1..samples, got {self.elites}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ConfigError(f"learning_rate must be in [0, 1], got {self.learning_rate}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.early_stop_tolerance is not None and not self.early_stop_tolerance > 0:
            raise ConfigError(
                f"early_stop_tolerance must be positive or null, got {self.early_stop_tolerance}"
            )


@dataclass
class IterationStats:
    iteration: int
    batch_min: float
    batch_mean: float
    incumbent_best: float
    indicator: np.ndarray  # block-order snapshot after the update


@dataclass
class SolveResult:
    best_assignment: Assignment
    best_objective: float
    trace: list[IterationStats] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False


# consecutive near-zero indicator updates required before stopping early
_STOP_STREAK = 3


def solve(scenario: Scenario, config: SolverConfig) -> SolveResult:
    """Run the full learning loop and return the incumbent best assignment.

    The incumbent is the lowest-objective sample seen across all iterations,
    not the final iteration's output. Identical (scenario, config) always
    produce an identical result, including the trace.
    """
    config.validate()
    ev = ScenarioEvaluator(scenario)
    n_tasks, n_procs = ev.n_tasks, ev.n_procs
    u = init_indicator(n_tasks, n_procs - 1)
    n_draws = draws_per_sample(n_tasks, n_procs)

    best_psi = math.inf
    best_procs = None
    trace: list[IterationStats] = []
    streak = 0
    converged = False
    iterations_run = 0

    for t in range(config.iterations + 1):
        keys = [derive_key(config.seed, t, s) for s in range(config.samples)]
        rows = uniform_matrix(keys, n_draws).tolist() if n_draws else [[]] * config.samples
        u_rows = u.tolist()

        psis = []
        batch_procs = []
        for row in rows:
            procs = _sample_procs(u_rows, n_procs, row)
            batch_procs.append(procs)
            psis.append(ev.objective(procs))

        order = sorted(range(len(psis)), key=psis.__getitem__)
        leader = order[0]
        if psis[leader] < best_psi:
            best_psi = psis[leader]
            best_procs = batch_procs[leader]

        u_star = np.zeros_like(u)
        for s in order[:config.elites]:
            for n, m in enumerate(batch_procs[s]):
                u_star[n, m] += 1.0
        u_star /= config.elites

        u_next = smooth(u_star, u, config.learning_rate)
        delta = float(np.max(np.abs(u_next - u)))
        u = u_next
        iterations_run = t + 1
        trace.append(IterationStats(
            iteration=t,
            batch_min=psis[leader],
            batch_mean=sum(psis) / len(psis),
            incumbent_best=best_psi,
            indicator=indicator_vector(u),
        ))

        if config.early_stop_tolerance is not None:
            streak = streak + 1 if delta < config.early_stop_tolerance else 0
            if streak >= _STOP_STREAK:
                converged = True
                break

    return SolveResult(
        best_assignment=Assignment(best_procs, n_procs),
        best_objective=best_psi,
        trace=trace,
        iterations_run=iterations_run,
        converged=converged,
    )


def without_early_stop(config: SolverConfig) -> SolverConfig:
    return replace(config, early_stop_tolerance=None)


# ---------------------------------------------------------------------------
# Config JSON and trace CSV (stable external formats)
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {"samples", "elites", "learning_rate", "iterations", "seed",
                "early_stop_tolerance"}


def config_to_dict(config: SolverConfig) -> dict:
    return {
        "samples": config.samples,
        "elites": config.elites,
        "learning_rate": config.learning_rate,
        "iterations": config.iterations,
        "seed": config.seed,
        "early_stop_tolerance": config.early_stop_tolerance,
    }


def config_from_dict(doc: dict) -> SolverConfig:
    if not isinstance(doc, dict):
        raise ConfigError("solver config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"solver config: unknown key(s) {sorted(unknown)}")
    defaults = SolverConfig()
    tol = doc.get("early_stop_tolerance", defaults.early_stop_tolerance)
    config = SolverConfig(
        samples=int(doc.get("samples", defaults.samples)),
        elites=int(doc.get("elites", defaults.elites)),
        learning_rate=float(doc.get("learning_rate", defaults.learning_rate)),
        iterations=int(doc.get("iterations", defaults.iterations)),
        seed=int(doc.get("seed", defaults.seed)),
        early_stop_tolerance=None if tol is None else float(tol),
    )
    config.validate()
    return config


def config_from_json(text: str) -> SolverConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"solver config JSON is not parseable: {exc}") from exc
    return config_from_dict(doc)


def config_to_json(config: SolverConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2) + "\n"


TRACE_HEADER = "iter,batch_min,batch_mean,incumbent_best"


def trace_csv_lines(trace: list[IterationStats]) -> list[str]:
    lines = [TRACE_HEADER]
    for row in trace:
        lines.append(f"{row.iteration},{float(row.batch_min)!r},"
                     f"{float(row.batch_mean)!r},{float(row.incumbent_best)!r}")
    return lines


def write_trace_csv(trace: list[IterationStats], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(trace_csv_lines(trace)) + "\n")
