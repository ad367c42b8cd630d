"""Exact and baseline solvers used to validate the learning solver.

* exhaustive_solve - enumerate every feasible assignment (capped).
* bnb_solve        - depth-first branch and bound; exact, and bit-identical
                     in objective to exhaustive enumeration.
* lpr_solve        - linear-programming relaxation of the binary constraints
                     plus per-task rounding back to feasibility.
* no_mec/full_mec  - everything local / everything on one CAP.

All returned objectives are evaluated through the canonical model path, so
re-evaluating a result's assignment reproduces its stored objective exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import LOCAL, Assignment, Scenario, ScenarioEvaluator
from .simplex import solve_lp


class InstanceTooLarge(ValueError):
    """Enumeration would exceed the configured state cap."""


@dataclass
class OracleResult:
    assignment: Assignment
    objective: float
    nodes_explored: int | None = None    # branch-and-bound / enumeration
    vertices_visited: int | None = None  # simplex pivots
    relaxed_value: float | None = None   # LP optimum before rounding


DEFAULT_ENUMERATION_CAP = 10_000_000


def exhaustive_solve(scenario: Scenario, cap: int = DEFAULT_ENUMERATION_CAP) -> OracleResult:
    """Global optimum by brute force; ties go to the lexicographically
    smallest processor-index vector (the first one enumerated)."""
    ev = ScenarioEvaluator(scenario)
    n, mp1 = ev.n_tasks, ev.n_procs
    count = mp1 ** n
    if count > cap:
        raise InstanceTooLarge(
            f"{mp1}^{n} = {count} assignments exceeds the enumeration cap {cap}"
        )
    best_psi = math.inf
    best = None
    for procs in itertools.product(range(mp1), repeat=n):
        psi = ev.objective(procs)
        if psi < best_psi:
            best_psi = psi
            best = procs
    return OracleResult(Assignment(best, mp1), best_psi, nodes_explored=count)


def bnb_solve(scenario: Scenario) -> OracleResult:
    """Depth-first branch and bound over tasks in index order.

    The lower bound at a partial assignment is the weighted objective of the
    work committed so far. Because every per-task contribution is
    nonnegative and the bound accumulates in exactly the canonical
    evaluation order, the bound never exceeds the final objective of any
    completion, and leaf bounds equal the canonical objective bit for bit.
    """
    ev = ScenarioEvaluator(scenario)
    n, mp1 = ev.n_tasks, ev.n_procs
    total = ev.total_time
    uplink = ev.uplink_time
    downlink = ev.downlink_time
    local_comp = ev.local_compute
    p0, pt, pr = scenario.power.local_w, scenario.power.tx_w, scenario.power.rx_w
    lt, le = scenario.weights.latency, scenario.weights.energy

    best_psi = math.inf
    best_procs: list | None = None
    nodes = 0
    lat = [0.0] * mp1
    procs = [0] * n

    def visit(depth: int, s_loc: float, s_ul: float, s_dl: float) -> None:
        nonlocal best_psi, best_procs, nodes
        nodes += 1
        bound = lt * max(lat) + le * (p0 * s_loc + (pt * s_ul + pr * s_dl))
        if bound >= best_psi:
            return
        if depth == n:
            best_psi = bound
            best_procs = procs.copy()
            return
        for m in range(mp1):
            procs[depth] = m
            saved = lat[m]  # restore exactly; += then -= would round
            lat[m] = saved + total[depth][m]
            if m == LOCAL:
                visit(depth + 1, s_loc + local_comp[depth], s_ul, s_dl)
            else:
                visit(depth + 1, s_loc, s_ul + uplink[depth][m], s_dl + downlink[depth][m])
            lat[m] = saved

    visit(0, 0.0, 0.0, 0.0)
    assignment = Assignment(best_procs, mp1)
    return OracleResult(assignment, ev.objective(assignment.procs), nodes_explored=nodes)


def lpr_solve(scenario: Scenario) -> OracleResult:
    """Relax the binary constraints to [0, 1], solve the epigraph LP, and
    round each task to its highest-probability processor.

    Variables are the N*(M+1) relaxed entries plus the makespan epigraph
    variable t with constraints t >= (busy time of processor m) for all m.
    The reported objective is the rounded assignment's true cost; the LP
    optimum (a lower bound on the exact optimum) is kept as a diagnostic.
    """
    ev = ScenarioEvaluator(scenario)
    n, mp1 = ev.n_tasks, ev.n_procs
    n_x = n * mp1
    col = lambda task, m: task * mp1 + m

    c = np.zeros(n_x + 1)
    c[n_x] = scenario.weights.latency
    for task in range(n):
        c[col(task, LOCAL)] = scenario.weights.energy * (
            scenario.power.local_w * ev.local_compute[task])
        for m in range(1, mp1):
            c[col(task, m)] = scenario.weights.energy * (
                scenario.power.tx_w * ev.uplink_time[task][m]
                + scenario.power.rx_w * ev.downlink_time[task][m])

    a_ub = np.zeros((mp1, n_x + 1))
    for m in range(mp1):
        for task in range(n):
            a_ub[m, col(task, m)] = ev.total_time[task][m]
        a_ub[m, n_x] = -1.0
    b_ub = np.zeros(mp1)

    a_eq = np.zeros((n, n_x + 1))
    for task in range(n):
        a_eq[task, col(task, 0):col(task, mp1)] = 1.0
    b_eq = np.ones(n)

    lp = solve_lp(c, a_ub, b_ub, a_eq, b_eq)
    relaxed = lp.x[:n_x].reshape(n, mp1)
    procs = [int(np.argmax(row)) for row in relaxed]  # argmax ties -> lowest index
    assignment = Assignment(procs, mp1)
    return OracleResult(
        assignment,
        ev.objective(assignment.procs),
        vertices_visited=lp.pivots,
        relaxed_value=lp.value,
    )


def no_mec(scenario: Scenario) -> OracleResult:
    """Everything on the local CPU."""
    ev = ScenarioEvaluator(scenario)
    procs = [LOCAL] * ev.n_tasks
    return OracleResult(Assignment(procs, ev.n_procs), ev.objective(procs))


def full_mec(scenario: Scenario, m: int = 1) -> OracleResult:
    """Everything offloaded to CAP `m`."""
    ev = ScenarioEvaluator(scenario)
    if not 1 <= m < ev.n_procs:
        raise ValueError(f"full_mec needs a CAP index in 1..{ev.n_procs - 1}, got {m}")
    procs = [m] * ev.n_tasks
    return OracleResult(Assignment(procs, ev.n_procs), ev.objective(procs))
