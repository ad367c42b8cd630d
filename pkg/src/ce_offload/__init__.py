"""Latency/energy task-offloading: model, cross-entropy solver, oracles,
benchmark harness."""

from .ce_solver import (
    SolveResult,
    SolverConfig,
    draw_batch,
    draw_sample,
    elite_indicator,
    init_indicator,
    select_elites,
    smooth,
    solve,
)
from .harness import (
    ScenarioSpec,
    SweepSpec,
    compare_methods,
    generate_scenario,
    run_convergence,
    run_lambda_sweep,
    run_size_sweep,
    write_csv,
)
from .model import (
    Assignment,
    FeasibilityError,
    LinkChannel,
    PowerProfile,
    Processor,
    Scenario,
    ScenarioEvaluator,
    Task,
    Weights,
    cap_latency,
    link_rate,
    local_energy,
    offload_energy,
    overall_latency,
    scenario_from_json,
    scenario_to_json,
    task_times,
    total_energy,
    validate,
    weighted_objective,
)
from .oracles import OracleResult, bnb_solve, exhaustive_solve, full_mec, lpr_solve, no_mec

__version__ = "0.1.0"
