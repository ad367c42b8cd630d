import random

import numpy as np
import pytest
from scipy.optimize import linprog

from ce_offload.model import Assignment, ScenarioEvaluator, Weights, validate, weighted_objective
from ce_offload.oracles import (
    InstanceTooLarge,
    bnb_solve,
    exhaustive_solve,
    full_mec,
    lpr_solve,
    no_mec,
)

from conftest import random_scenario


class TestExhaustive:
    def test_two_point_enumeration(self):
        sc = random_scenario(random.Random(0), n_tasks=1, n_caps=1)
        res = exhaustive_solve(sc)
        a0, a1 = Assignment([0], 2), Assignment([1], 2)
        best = min((weighted_objective(a0, sc), weighted_objective(a1, sc)))
        assert res.objective == best
        assert res.nodes_explored == 2

    def test_all_local_when_local_strictly_cheaper(self):
        # tiny compute, big payloads: offloading can only hurt
        from ce_offload.model import Scenario, Task
        from conftest import REF_POWER, reference_processors
        tasks = [Task(8e6, 4e6, 1e6) for _ in range(4)]
        sc = Scenario(tasks, reference_processors(2), REF_POWER, Weights(0.5, 0.5))
        res = exhaustive_solve(sc)
        assert res.assignment.procs == (0, 0, 0, 0)

    def test_pure_energy_objective_separates_per_task(self):
        # lambda_t = 0 and local energy below offload energy for every task
        from ce_offload.model import Scenario, Task
        from conftest import REF_POWER, reference_processors
        tasks = [Task(4e6, 2e6, 3e7) for _ in range(3)]  # 0.12 J local vs ~0.74 J offloaded
        sc = Scenario(tasks, reference_processors(2), REF_POWER, Weights(0.0, 1.0))
        res = exhaustive_solve(sc)
        assert res.assignment.procs == (0, 0, 0)

    def test_cap_enforced(self):
        sc = random_scenario(random.Random(1), n_tasks=6, n_caps=2)
        with pytest.raises(InstanceTooLarge, match="cap"):
            exhaustive_solve(sc, cap=100)

    def test_tie_break_is_lexicographic(self):
        # two identical CAPs make symmetric optima; the smaller index wins
        from ce_offload.model import Processor, Scenario, Task
        from conftest import REF_POWER
        procs = [Processor(0, 2e8), Processor(1, 2e9, 1e7, 1e7), Processor(2, 2e9, 1e7, 1e7)]
        sc = Scenario([Task(4e6, 2e6, 4e8)], procs, REF_POWER, Weights(0.5, 0.5))
        res = exhaustive_solve(sc)
        psi1 = weighted_objective(Assignment([1], 3), sc)
        psi2 = weighted_objective(Assignment([2], 3), sc)
        assert psi1 == psi2
        if res.assignment.procs[0] != 0:
            assert res.assignment.procs == (1,)


class TestBranchAndBound:
    @pytest.mark.parametrize("seed", range(25))
    def test_matches_exhaustive_exactly(self, seed):
        sc = random_scenario(random.Random(seed))
        exact = exhaustive_solve(sc)
        bnb = bnb_solve(sc)
        assert bnb.objective == exact.objective  # bit-for-bit
        assert weighted_objective(bnb.assignment, sc) == bnb.objective

    def test_single_task_visits_at_most_m_plus_two(self):
        sc = random_scenario(random.Random(2), n_tasks=1, n_caps=2)
        res = bnb_solve(sc)
        assert res.nodes_explored <= 4  # root + 3 children

    def test_prunes_below_full_tree(self):
        sc = random_scenario(random.Random(3), n_tasks=6, n_caps=2)
        res = bnb_solve(sc)
        full_tree = sum(3 ** d for d in range(7))
        assert res.nodes_explored < full_tree

    def test_objective_reevaluates_identically(self):
        sc = random_scenario(random.Random(4))
        res = bnb_solve(sc)
        assert weighted_objective(res.assignment, sc) == res.objective


def _scenario_lp(scenario):
    """Independent construction of the relaxation for scipy: variables are
    the relaxed matrix entries (task-major) plus the epigraph makespan."""
    ev = ScenarioEvaluator(scenario)
    n, mp1 = ev.n_tasks, ev.n_procs
    c = np.zeros(n * mp1 + 1)
    c[-1] = scenario.weights.latency
    for i in range(n):
        c[i * mp1] = scenario.weights.energy * scenario.power.local_w * ev.local_compute[i]
        for m in range(1, mp1):
            c[i * mp1 + m] = scenario.weights.energy * (
                scenario.power.tx_w * ev.uplink_time[i][m]
                + scenario.power.rx_w * ev.downlink_time[i][m])
    a_ub = np.zeros((mp1, n * mp1 + 1))
    for m in range(mp1):
        for i in range(n):
            a_ub[m, i * mp1 + m] = ev.total_time[i][m]
        a_ub[m, -1] = -1.0
    a_eq = np.zeros((n, n * mp1 + 1))
    for i in range(n):
        a_eq[i, i * mp1:(i + 1) * mp1] = 1.0
    return c, a_ub, np.zeros(mp1), a_eq, np.ones(n)


class TestLpRelaxation:
    @pytest.mark.parametrize("seed", range(15))
    def test_sandwich_bounds(self, seed):
        sc = random_scenario(random.Random(seed))
        exact = exhaustive_solve(sc)
        lpr = lpr_solve(sc)
        assert lpr.relaxed_value <= exact.objective + 1e-9
        assert lpr.objective >= exact.objective - 1e-12
        assert validate(lpr.assignment, sc) == []
        assert weighted_objective(lpr.assignment, sc) == lpr.objective

    def test_relaxed_value_matches_scipy(self):
        for seed in range(8):
            sc = random_scenario(random.Random(1000 + seed))
            lpr = lpr_solve(sc)
            c, a_ub, b_ub, a_eq, b_eq = _scenario_lp(sc)
            ref = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                          bounds=[(0, None)] * len(c), method="highs")
            assert ref.status == 0
            assert lpr.relaxed_value == pytest.approx(ref.fun, abs=1e-7)

    def test_integral_lp_optimum_is_exact(self):
        # single task: the relaxation has an integral optimal vertex
        sc = random_scenario(random.Random(7), n_tasks=1, n_caps=1)
        lpr = lpr_solve(sc)
        exact = exhaustive_solve(sc)
        assert lpr.objective == pytest.approx(exact.objective, rel=1e-12)

    def test_rounding_gap_appears_somewhere(self):
        gaps = []
        for seed in range(60):
            sc = random_scenario(random.Random(seed), n_tasks=5, n_caps=2)
            gaps.append(lpr_solve(sc).objective - exhaustive_solve(sc).objective)
        assert all(g >= -1e-12 for g in gaps)
        assert any(g > 1e-9 for g in gaps)  # rounding really does cost on some seeds

    def test_pivot_count_reported(self):
        sc = random_scenario(random.Random(8))
        assert lpr_solve(sc).vertices_visited >= 1


class TestBaselines:
    def test_no_mec_formulas(self):
        sc = random_scenario(random.Random(9), n_tasks=4, n_caps=2)
        res = no_mec(sc)
        total_cycles_time = sum(t.cycles / 2e8 for t in sc.tasks)
        from ce_offload.model import overall_latency, total_energy
        assert overall_latency(res.assignment, sc) == pytest.approx(total_cycles_time, rel=1e-12)
        assert total_energy(res.assignment, sc) == pytest.approx(0.8 * total_cycles_time, rel=1e-12)

    def test_full_mec_latency_formula(self):
        sc = random_scenario(random.Random(10), n_tasks=4, n_caps=2)
        res = full_mec(sc, 1)
        cap = sc.processors[1]
        expected = sum(
            t.input_bits / cap.uplink_bps + t.output_bits / cap.downlink_bps
            + t.cycles / cap.cycles_per_sec
            for t in sc.tasks)
        from ce_offload.model import overall_latency
        assert overall_latency(res.assignment, sc) == pytest.approx(expected, rel=1e-12)

    def test_baselines_feasible(self):
        sc = random_scenario(random.Random(11), n_tasks=3, n_caps=2)
        assert validate(no_mec(sc).assignment, sc) == []
        assert validate(full_mec(sc, 2).assignment, sc) == []

    def test_full_mec_rejects_bad_index(self):
        sc = random_scenario(random.Random(12), n_tasks=2, n_caps=2)
        with pytest.raises(ValueError):
            full_mec(sc, 0)
        with pytest.raises(ValueError):
            full_mec(sc, 3)

    def test_baselines_bound_the_optimum(self):
        for seed in range(10):
            sc = random_scenario(random.Random(seed))
            exact = exhaustive_solve(sc).objective
            assert exact <= no_mec(sc).objective + 1e-12
            assert exact <= full_mec(sc, 1).objective + 1e-12
