import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ce_offload.model import PowerProfile, Processor, Scenario, Task, Weights

settings.register_profile(
    "ci", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

# reference constants used throughout: 200 Mcycles/s local CPU, CAPs at
# 2/2.2/2.4 Gcycles/s, 10 Mbps links, P0/Ptx/Prx = 0.8/1.258/1.181 W
REF_POWER = PowerProfile(local_w=0.8, tx_w=1.258, rx_w=1.181)
REF_CAP_RATES = (2e9, 2.2e9, 2.4e9)


def reference_processors(n_caps: int = 3) -> list[Processor]:
    procs = [Processor(index=0, cycles_per_sec=2e8)]
    for i in range(1, n_caps + 1):
        procs.append(Processor(index=i, cycles_per_sec=REF_CAP_RATES[(i - 1) % 3],
                               uplink_bps=1e7, downlink_bps=1e7))
    return procs


def random_scenario(rng: random.Random, n_tasks=None, n_caps=None,
                    weights=Weights(0.5, 0.5)) -> Scenario:
    n = n_tasks if n_tasks is not None else rng.randint(2, 6)
    m = n_caps if n_caps is not None else rng.randint(1, 2)
    tasks = [
        Task(
            input_bits=rng.uniform(1e6, 8e6),
            output_bits=rng.uniform(5e5, 4e6),
            cycles=rng.uniform(1e8, 1.5e9),
        )
        for _ in range(n)
    ]
    return Scenario(tasks=tasks, processors=reference_processors(m),
                    power=REF_POWER, weights=weights)


def naive_objective(matrix: np.ndarray, scenario: Scenario) -> tuple[float, float, float]:
    """Straight matrix-form evaluation, independent of ScenarioEvaluator:
    returns (objective, makespan, energy)."""
    n, mp1 = matrix.shape
    t_ul = np.zeros((n, mp1))
    t_dl = np.zeros((n, mp1))
    t_comp = np.zeros((n, mp1))
    for i, task in enumerate(scenario.tasks):
        for j, proc in enumerate(scenario.processors):
            t_comp[i, j] = task.cycles / proc.cycles_per_sec
            if j > 0:
                t_ul[i, j] = task.input_bits / proc.uplink_bps
                t_dl[i, j] = task.output_bits / proc.downlink_bps
    x = matrix.astype(float)
    per_proc = (x * (t_ul + t_dl + t_comp)).sum(axis=0)
    makespan = per_proc.max()
    e_local = scenario.power.local_w * (x[:, 0] * t_comp[:, 0]).sum()
    e_off = (scenario.power.tx_w * (x[:, 1:] * t_ul[:, 1:]).sum()
             + scenario.power.rx_w * (x[:, 1:] * t_dl[:, 1:]).sum())
    energy = e_local + e_off
    objective = scenario.weights.latency * makespan + scenario.weights.energy * energy
    return objective, makespan, energy


@pytest.fixture
def single_task_scenario() -> Scenario:
    """One task (4 Mbit in, 2 Mbit out, 0.4 Gcycles), local CPU + one CAP."""
    return Scenario(
        tasks=[Task(input_bits=4e6, output_bits=2e6, cycles=4e8)],
        processors=reference_processors(1),
        power=REF_POWER,
        weights=Weights(0.5, 0.5),
    )
