import random

import pytest
from hypothesis import given, settings, strategies as st

from logrec import InputError, Problem, check_schedule, feasible_subset
from logrec import ls
from logrec.gen import GenSpec, generate
from logrec.ls import DESCENT, TABU, LsParams, LsState
from logrec.oracle import brute_force

from conftest import problems, random_problem


def survivors_feasible(p, alive):
    return feasible_subset(p, [k in alive for k in range(p.n)])


class TestConstraintError:
    @pytest.mark.parametrize("pi,pj,err", [(1, 2, 0), (3, 3, 1), (5, 2, 4)])
    def test_examples(self, pi, pj, err):
        assert ls.constraint_error(pi, pj) == err

    def test_grid(self):
        for pi in range(1, 15):
            for pj in range(1, 15):
                e = ls.constraint_error(pi, pj)
                assert (e == 0) == (pi < pj)
                if pi >= pj:
                    assert e == 1 + pi - pj


class TestStateFunctions:
    def test_evaluation_examples(self):
        p = Problem(2, precs=[(0, 1), (1, 0)])
        assert ls.evaluation(p, [1, 1]) == 2
        assert ls.evaluation(p, [1, 2]) == 2
        assert ls.evaluation(Problem(3, precs=[(0, 1), (1, 2)]), [1, 2, 3]) == 0

    def test_value_example(self):
        assert ls.value(Problem(3, precs=[(0, 1)]), [2, 1, 3]) == 1

    def test_cost_two_cycle(self):
        assert ls.cost(Problem(2, precs=[(0, 1), (1, 0)]), [1, 1]) == (1, frozenset({1}))

    def test_cost_drops_hub(self):
        # action 0 violates against both 1 and 2; dropping it alone suffices
        p = Problem(3, precs=[(0, 1), (0, 2)])
        assert ls.cost(p, [3, 1, 2]) == (2, frozenset({1, 2}))

    def test_accepts_state_or_list(self):
        p = Problem(3, precs=[(0, 1), (2, 1)])
        s = LsState(p, [2, 2, 3])
        assert ls.evaluation(p, s) == ls.evaluation(p, [2, 2, 3]) == s.evaluation

    @settings(max_examples=300)
    @given(problems(max_n=10, with_deps=False), st.data())
    def test_bounds_and_feasibility(self, p, data):
        pos = data.draw(st.lists(st.integers(1, p.n), min_size=p.n, max_size=p.n))
        c, alive = ls.cost(p, pos)
        assert ls.value(p, pos) <= c <= p.n
        assert survivors_feasible(p, alive)
        if ls.evaluation(p, pos) == 0:
            assert c == p.n

    def test_incremental_matches_recompute(self):
        rng = random.Random(3)
        p = random_problem(rng, 30, 0.0, 0.08, self_loops=True)
        s = ls.initial_state(p)
        for _ in range(2000):
            s.move(rng.randrange(p.n), rng.randint(1, p.n))
            assert s.evaluation == ls.evaluation(p, s.pos)
        fresh = LsState(p, s.pos)
        assert s.errors == fresh.errors and s.action_error == fresh.action_error

    def test_move_out_of_range(self):
        s = ls.initial_state(Problem(3))
        with pytest.raises(InputError):
            s.move(0, 4)


class TestInitialState:
    def test_identity(self):
        assert ls.initial_state(Problem(4)).pos == [1, 2, 3, 4]

    def test_warm_start(self):
        assert ls.initial_state(Problem(3), [3, 1, 1]).pos == [3, 1, 1]

    @pytest.mark.parametrize("warm", [[1, 2], [0, 1, 2], [1, 2, 4], [1.5, 1, 1]])
    def test_bad_warm_start(self, warm):
        with pytest.raises(InputError):
            ls.initial_state(Problem(3), warm)

    def test_from_logs(self):
        p = Problem(4, logs=[[2, 0], [0, 3]])
        assert ls.warm_start_from_logs(p) == [2, 4, 1, 3]
        assert ls.warm_start_from_logs(Problem(2)) is None


class TestDescent:
    def test_single_sweep_fix(self, backend):
        p = Problem(2, precs=[(0, 1)])
        s, stats = ls.descent(p, LsParams(mode=DESCENT, warm_start=[1, 1]), backend=backend)
        assert stats.best_value == 2
        assert stats.nodes_or_iterations == 1
        assert stats.final_evaluation == 0

    def test_no_constraints(self, backend):
        s, stats = ls.descent(Problem(5), backend=backend)
        assert stats.best_value == 5 and stats.nodes_or_iterations == 0

    def test_rejects_dependencies(self):
        with pytest.raises(InputError, match="precedence-only"):
            ls.descent(Problem(2, deps=[(0, 1)]))

    @pytest.mark.parametrize("seed", range(5))
    def test_local_minimum(self, seed, backend):
        p = generate(GenSpec(30, 0.0, 1.5, seed))
        s, stats = ls.descent(p, LsParams(mode=DESCENT, max_iterations=10 ** 6), backend=backend)
        pos = stats.final_positions
        base = ls.evaluation(p, pos)
        for i in range(p.n):
            for d in (-1, 1):
                if 1 <= pos[i] + d <= p.n:
                    alt = list(pos)
                    alt[i] += d
                    assert ls.evaluation(p, alt) >= base


class TestTabu:
    def test_deterministic(self, backend):
        p = generate(GenSpec(25, 0.0, 1.5, 4))
        a = ls.tabu_search(p, LsParams(rng_seed=9), backend=backend)
        b = ls.tabu_search(p, LsParams(rng_seed=9), backend=backend)
        assert a[0] == b[0]
        assert ls.format_trace(a[2], False) == ls.format_trace(b[2], False)

    def test_two_cycle(self, backend):
        s, stats, _ = ls.tabu_search(Problem(2, precs=[(0, 1), (1, 0)]), backend=backend)
        assert stats.best_value == 1

    def test_trace_improves(self):
        p = generate(GenSpec(40, 0.0, 1.5, 1))
        _, stats, trace = ls.tabu_search(p, LsParams(rng_seed=2))
        costs = [r["cost"] for r in trace]
        assert costs == sorted(costs) and costs[-1] == stats.best_value
        assert [r["iter"] for r in trace] == sorted(r["iter"] for r in trace)

    def test_iteration_budget(self):
        p = generate(GenSpec(20, 0.0, 3.0, 1))
        _, stats, _ = ls.tabu_search(p, LsParams(max_iterations=37))
        assert stats.nodes_or_iterations <= 37
        assert LsParams().iteration_budget(20) == 4000
        assert LsParams(mode=DESCENT).iteration_budget(20) == 21

    @settings(max_examples=80, deadline=None)
    @given(problems(max_n=9, with_deps=False), st.integers(0, 2 ** 32))
    def test_never_beats_oracle(self, p, seed):
        s, stats, _ = ls.tabu_search(p, LsParams(rng_seed=seed))
        assert stats.best_value <= brute_force(p)[0]
        assert check_schedule(p, s) == []

    def test_often_optimal_on_small(self):
        rng = random.Random(17)
        hits = 0
        for _ in range(40):
            p = random_problem(rng, 8, 0.0, 0.2)
            hits += ls.tabu_search(p)[1].best_value == brute_force(p)[0]
        assert hits >= 30

    def test_params_validation(self):
        with pytest.raises(InputError):
            LsParams(mode="anneal")
        with pytest.raises(InputError):
            LsParams(tabu_max=0)

    def test_format_trace(self):
        rows = [{"iter": 0, "eval": 4, "value": 1, "cost": 2, "t_ms": 0.5}]
        assert ls.format_trace(rows) == ["iter=0 eval=4 value=1 cost=2 t_ms=0.500"]
        assert ls.format_trace(rows, False) == ["iter=0 eval=4 value=1 cost=2 t_ms=-"]
