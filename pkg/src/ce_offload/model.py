"""Problem instance types and the weighted latency/energy objective.

A scenario holds N tasks and M+1 processors (index 0 is the device's own
CPU, indices 1..M are edge servers, "CAPs"). A policy assigns every task to
exactly one processor. The cost of a policy is

    psi(X) = lambda_t * T(X) + lambda_e * E(X)

where T is the makespan (each processor works through its tasks
sequentially, all processors run in parallel, the local CPU included) and E
is the device-side energy: local computation power times local compute time,
plus transmit/receive power times uplink/downlink airtime for offloaded
tasks.

All evaluation goes through :class:`ScenarioEvaluator`, which fixes one
canonical floating-point path (per-task accumulation in task order) so that
every solver and oracle in this package reproduces identical objective
values for identical assignments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

LOCAL = 0  # processor index of the device CPU

# Sentinel link rate for the local processor: offloading steps do not exist
# there, so transmission times are exactly 0 (enforced explicitly, not via
# division).
INFINITE_RATE = math.inf


class FeasibilityError(ValueError):
    """An assignment does not satisfy the one-processor-per-task constraint
    or does not match the scenario dimensions."""


class ConfigError(ValueError):
    """Invalid solver or harness configuration."""


def _require_positive(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass
class Task:
    """One computation job: input payload, result payload, CPU work."""

    input_bits: float
    output_bits: float
    cycles: float

    def __post_init__(self):
        _require_positive(self.input_bits, "input_bits")
        _require_positive(self.output_bits, "output_bits")
        _require_positive(self.cycles, "cycles")


@dataclass
class Processor:
    """A compute resource: the local CPU (index 0) or a CAP (index >= 1).

    Link rates are bits/sec; the local CPU carries the infinite-rate
    sentinel because nothing is transmitted to run there.
    """

    index: int
    cycles_per_sec: float
    uplink_bps: float = INFINITE_RATE
    downlink_bps: float = INFINITE_RATE

    def __post_init__(self):
        _require_positive(self.cycles_per_sec, "cycles_per_sec")
        if self.index < 0:
            raise ValueError(f"processor index must be >= 0, got {self.index}")
        if self.index == LOCAL:
            if not (math.isinf(self.uplink_bps) and math.isinf(self.downlink_bps)):
                raise ValueError("local processor link rates must be the infinite sentinel")
        else:
            _require_positive(self.uplink_bps, "uplink_bps")
            _require_positive(self.downlink_bps, "downlink_bps")

    @property
    def is_local(self) -> bool:
        return self.index == LOCAL


@dataclass
class LinkChannel:
    """Physical link description used to derive a spectral rate."""

    channel_gain: float
    noise_power_w: float
    direction: str = "uplink"

    def __post_init__(self):
        _require_positive(self.channel_gain, "channel_gain")
        _require_positive(self.noise_power_w, "noise_power_w")
        if self.direction not in ("uplink", "downlink"):
            raise ValueError(f"direction must be 'uplink' or 'downlink', got {self.direction!r}")


@dataclass
class PowerProfile:
    """Device power draw (watts) for local compute, transmit, receive."""

    local_w: float
    tx_w: float
    rx_w: float

    def __post_init__(self):
        _require_positive(self.local_w, "local_w")
        _require_positive(self.tx_w, "tx_w")
        _require_positive(self.rx_w, "rx_w")


@dataclass
class Weights:
    """Objective weights: latency_weight on T(X), energy_weight on E(X)."""

    latency: float
    energy: float

    def __post_init__(self):
        for name, v in (("latency", self.latency), ("energy", self.energy)):
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"weights.{name} must be finite and >= 0, got {v!r}")
        if self.latency + self.energy <= 0:
            raise ValueError("at least one objective weight must be positive")


@dataclass
class Scenario:
    """A full problem instance: tasks, processors, power profile, weights."""

    tasks: list[Task]
    processors: list[Processor]
    power: PowerProfile
    weights: Weights

    def __post_init__(self):
        if len(self.tasks) < 1:
            raise ValueError("scenario needs at least one task")
        if len(self.processors) < 1:
            raise ValueError("scenario needs at least the local processor")
        for pos, proc in enumerate(self.processors):
            if proc.index != pos:
                raise ValueError(
                    f"processor indices must be contiguous 0..M in order; "
                    f"position {pos} holds index {proc.index}"
                )

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_caps(self) -> int:
        return len(self.processors) - 1

    @property
    def n_procs(self) -> int:
        return len(self.processors)


class Assignment:
    """A feasible policy: every task on exactly one processor.

    Stored as a tuple of processor indices, one per task, which makes the
    row-sum-to-one constraint true by construction. The equivalent binary
    N x (M+1) matrix is available as :attr:`matrix`.
    """

    __slots__ = ("procs", "n_procs")

    def __init__(self, procs, n_procs: int):
        procs = tuple(int(p) for p in procs)
        if n_procs < 1:
            raise FeasibilityError(f"n_procs must be >= 1, got {n_procs}")
        for n, p in enumerate(procs):
            if not 0 <= p < n_procs:
                raise FeasibilityError(
                    f"task {n}: processor index {p} outside 0..{n_procs - 1}"
                )
        self.procs = procs
        self.n_procs = int(n_procs)

    @classmethod
    def from_matrix(cls, matrix) -> "Assignment":
        """Build from a binary matrix, rejecting any row not summing to 1."""
        arr = np.asarray(matrix)
        if arr.ndim != 2:
            raise FeasibilityError(f"assignment matrix must be 2-D, got shape {arr.shape}")
        bad = [str(n) for n, row in enumerate(arr) if row.sum() != 1]
        if bad:
            raise FeasibilityError(
                "assignment rows must sum to exactly 1; violated for task(s) " + ", ".join(bad)
            )
        if not np.isin(arr, (0, 1)).all():
            raise FeasibilityError("assignment entries must be 0 or 1")
        return cls(np.argmax(arr, axis=1), arr.shape[1])

    @property
    def n_tasks(self) -> int:
        return len(self.procs)

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((len(self.procs), self.n_procs), dtype=np.uint8)
        m[np.arange(len(self.procs)), self.procs] = 1
        return m

    def as_vector(self) -> np.ndarray:
        """Flatten in processor-block order: all tasks for processor 0,
        then all tasks for processor 1, and so on."""
        return self.matrix.T.ravel()

    def __eq__(self, other):
        return (
            isinstance(other, Assignment)
            and self.procs == other.procs
            and self.n_procs == other.n_procs
        )

    def __hash__(self):
        return hash((self.procs, self.n_procs))

    def __repr__(self):
        return f"Assignment(procs={self.procs}, n_procs={self.n_procs})"


def link_rate(channel: LinkChannel, device_power_w: float) -> float:
    """Spectral rate of a link, bits/sec per hertz; scale by bandwidth.

    rate = log2(1 + P * h / N0).
    """
    _require_positive(device_power_w, "device_power_w")
    return math.log2(1.0 + device_power_w * channel.channel_gain / channel.noise_power_w)


def task_times(task: Task, proc: Processor) -> tuple[float, float, float]:
    """(uplink sec, downlink sec, compute sec) for running `task` on `proc`.

    Local execution has zero transmission time by definition.
    """
    t_comp = task.cycles / proc.cycles_per_sec
    if proc.is_local:
        return 0.0, 0.0, t_comp
    return task.input_bits / proc.uplink_bps, task.output_bits / proc.downlink_bps, t_comp


class ScenarioEvaluator:
    """Precomputed per-(task, processor) time/energy tables plus the single
    canonical objective evaluation path.

    Accumulation is always in task-index order; the energy is composed as
    P_local * sum(local compute time) + (P_tx * sum(uplink) + P_rx *
    sum(downlink)). Partial sums over a task prefix are therefore never
    larger than the full sum under IEEE-754 rounding, which the
    branch-and-bound oracle relies on for exact agreement with enumeration.
    """

    __slots__ = (
        "scenario", "n_tasks", "n_procs", "total_time", "uplink_time",
        "downlink_time", "local_compute", "_p0", "_pt", "_pr", "_lt", "_le",
    )

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.n_tasks = scenario.n_tasks
        self.n_procs = scenario.n_procs
        total, ult, dlt = [], [], []
        for task in scenario.tasks:
            trow, urow, drow = [], [], []
            for proc in scenario.processors:
                t_ul, t_dl, t_comp = task_times(task, proc)
                trow.append(t_ul + t_dl + t_comp)
                urow.append(t_ul)
                drow.append(t_dl)
            total.append(trow)
            ult.append(urow)
            dlt.append(drow)
        self.total_time = total          # N x (M+1), seconds end to end
        self.uplink_time = ult
        self.downlink_time = dlt
        self.local_compute = [row[LOCAL] for row in total]
        self._p0 = scenario.power.local_w
        self._pt = scenario.power.tx_w
        self._pr = scenario.power.rx_w
        self._lt = scenario.weights.latency
        self._le = scenario.weights.energy

    def latencies(self, procs) -> list[float]:
        """Per-processor busy time, seconds."""
        lat = [0.0] * self.n_procs
        total = self.total_time
        for n, m in enumerate(procs):
            lat[m] += total[n][m]
        return lat

    def energy_terms(self, procs) -> tuple[float, float, float]:
        """(local compute sec, uplink sec, downlink sec) totals."""
        s_loc = s_ul = s_dl = 0.0
        for n, m in enumerate(procs):
            if m == LOCAL:
                s_loc += self.local_compute[n]
            else:
                s_ul += self.uplink_time[n][m]
                s_dl += self.downlink_time[n][m]
        return s_loc, s_ul, s_dl

    def evaluate(self, procs) -> tuple[float, float, float]:
        """(objective, makespan T, energy E) for a processor-index vector."""
        lat = [0.0] * self.n_procs
        total = self.total_time
        s_loc = s_ul = s_dl = 0.0
        for n, m in enumerate(procs):
            lat[m] += total[n][m]
            if m == LOCAL:
                s_loc += self.local_compute[n]
            else:
                s_ul += self.uplink_time[n][m]
                s_dl += self.downlink_time[n][m]
        t = max(lat)
        e = self._p0 * s_loc + (self._pt * s_ul + self._pr * s_dl)
        return self._lt * t + self._le * e, t, e

    def objective(self, procs) -> float:
        return self.evaluate(procs)[0]


def _procs_for(assignment: Assignment, scenario: Scenario) -> tuple[int, ...]:
    if assignment.n_procs != scenario.n_procs or assignment.n_tasks != scenario.n_tasks:
        raise FeasibilityError(
            f"assignment is {assignment.n_tasks}x{assignment.n_procs}, "
            f"scenario needs {scenario.n_tasks}x{scenario.n_procs}"
        )
    return assignment.procs


def cap_latency(assignment: Assignment, scenario: Scenario, m: int) -> float:
    """Total busy time of processor m under the assignment, seconds."""
    procs = _procs_for(assignment, scenario)
    if not 0 <= m < scenario.n_procs:
        raise ValueError(f"processor index {m} outside 0..{scenario.n_procs - 1}")
    return ScenarioEvaluator(scenario).latencies(procs)[m]


def overall_latency(assignment: Assignment, scenario: Scenario) -> float:
    """Makespan: the maximum busy time over all processors (local included)."""
    procs = _procs_for(assignment, scenario)
    return max(ScenarioEvaluator(scenario).latencies(procs))


def local_energy(assignment: Assignment, scenario: Scenario) -> float:
    """Joules spent computing on the device CPU."""
    procs = _procs_for(assignment, scenario)
    s_loc, _, _ = ScenarioEvaluator(scenario).energy_terms(procs)
    return scenario.power.local_w * s_loc


def offload_energy(assignment: Assignment, scenario: Scenario) -> float:
    """Joules spent transmitting inputs and receiving outputs of offloaded
    tasks; locally run tasks contribute nothing."""
    procs = _procs_for(assignment, scenario)
    _, s_ul, s_dl = ScenarioEvaluator(scenario).energy_terms(procs)
    return scenario.power.tx_w * s_ul + scenario.power.rx_w * s_dl


def total_energy(assignment: Assignment, scenario: Scenario) -> float:
    procs = _procs_for(assignment, scenario)
    ev = ScenarioEvaluator(scenario)
    return ev.evaluate(procs)[2]


def weighted_objective(assignment: Assignment, scenario: Scenario) -> float:
    """lambda_t * T(X) + lambda_e * E(X)."""
    procs = _procs_for(assignment, scenario)
    return ScenarioEvaluator(scenario).objective(procs)


def validate(assignment, scenario: Scenario) -> list[str]:
    """Feasibility report: empty list means the assignment is valid.

    Accepts an :class:`Assignment` or a raw binary matrix; for matrices,
    every row not summing to 1 is reported with its task index.
    """
    problems: list[str] = []
    if isinstance(assignment, Assignment):
        if assignment.n_tasks != scenario.n_tasks or assignment.n_procs != scenario.n_procs:
            problems.append(
                f"dimension mismatch: assignment is {assignment.n_tasks}x{assignment.n_procs}, "
                f"scenario needs {scenario.n_tasks}x{scenario.n_procs}"
            )
        return problems

    arr = np.asarray(assignment)
    if arr.ndim != 2 or arr.shape != (scenario.n_tasks, scenario.n_procs):
        problems.append(
            f"dimension mismatch: matrix shape {arr.shape}, "
            f"scenario needs ({scenario.n_tasks}, {scenario.n_procs})"
        )
        return problems
    for n, row in enumerate(arr):
        s = int(row.sum())
        if s != 1:
            problems.append(f"task {n}: row sums to {s}, must be exactly 1")
        elif not np.isin(row, (0, 1)).all():
            problems.append(f"task {n}: entries must be 0 or 1")
    return problems


# ---------------------------------------------------------------------------
# Scenario JSON (stable external format)
# ---------------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "tasks": [
            {"alpha_bits": t.input_bits, "beta_bits": t.output_bits, "gamma_cycles": t.cycles}
            for t in scenario.tasks
        ],
        "processors": [
            {
                "index": p.index,
                "rate_cps": p.cycles_per_sec,
                "uplink_bps": None if math.isinf(p.uplink_bps) else p.uplink_bps,
                "downlink_bps": None if math.isinf(p.downlink_bps) else p.downlink_bps,
            }
            for p in scenario.processors
        ],
        "power": {
            "p0_w": scenario.power.local_w,
            "pt_w": scenario.power.tx_w,
            "pr_w": scenario.power.rx_w,
        },
        "weights": {
            "lambda_t": scenario.weights.latency,
            "lambda_e": scenario.weights.energy,
        },
    }


def _take(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise ValueError(f"{where} must be a JSON object")
    if key not in obj:
        raise ValueError(f"{where}: missing key '{key}'")
    return obj[key]


def _number(obj: dict, key: str, where: str) -> float:
    value = _take(obj, key, where)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValueError(f"{where}: key '{key}' must be a number, got {value!r}")
    return float(value)


def scenario_from_dict(doc: dict) -> Scenario:
    tasks_doc = _take(doc, "tasks", "scenario")
    procs_doc = _take(doc, "processors", "scenario")
    power_doc = _take(doc, "power", "scenario")
    weights_doc = _take(doc, "weights", "scenario")
    if not isinstance(tasks_doc, list) or not tasks_doc:
        raise ValueError("scenario: key 'tasks' must be a non-empty array")
    if not isinstance(procs_doc, list) or not procs_doc:
        raise ValueError("scenario: key 'processors' must be a non-empty array")

    tasks = [
        Task(
            input_bits=_number(t, "alpha_bits", f"tasks[{i}]"),
            output_bits=_number(t, "beta_bits", f"tasks[{i}]"),
            cycles=_number(t, "gamma_cycles", f"tasks[{i}]"),
        )
        for i, t in enumerate(tasks_doc)
    ]
    processors = []
    for i, p in enumerate(procs_doc):
        where = f"processors[{i}]"
        index = _take(p, "index", where)
        rate = _number(p, "rate_cps", where)
        up = _take(p, "uplink_bps", where)
        down = _take(p, "downlink_bps", where)
        processors.append(
            Processor(
                index=int(index),
                cycles_per_sec=rate,
                uplink_bps=INFINITE_RATE if up is None else float(up),
                downlink_bps=INFINITE_RATE if down is None else float(down),
            )
        )
    power = PowerProfile(
        local_w=_number(power_doc, "p0_w", "power"),
        tx_w=_number(power_doc, "pt_w", "power"),
        rx_w=_number(power_doc, "pr_w", "power"),
    )
    weights = Weights(
        latency=_number(weights_doc, "lambda_t", "weights"),
        energy=_number(weights_doc, "lambda_e", "weights"),
    )
    return Scenario(tasks=tasks, processors=processors, power=power, weights=weights)


def scenario_to_json(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def scenario_from_json(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"scenario JSON is not parseable: {exc}") from exc
    return scenario_from_dict(doc)
