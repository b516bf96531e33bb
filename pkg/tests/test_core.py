import json

import pytest
from hypothesis import given, settings, strategies as st

from logrec import InputError, Problem, Schedule, check_schedule, feasible_subset, objective
from logrec.core import load_problem, save_problem

from conftest import has_cycle, problems


def sched(n, positions):
    return Schedule.from_positions(n, positions)


class TestProblem:
    def test_deduplicates_pairs(self):
        p = Problem(3, deps=[(0, 1), (0, 1)], precs=[(1, 2), (1, 2), (2, 2)])
        assert p.deps == ((0, 1),)
        assert p.precs == ((1, 2), (2, 2))

    def test_rejects_self_dependency(self):
        with pytest.raises(InputError, match="self-dependency"):
            Problem(2, deps=[(1, 1)])

    @pytest.mark.parametrize("field", ["deps", "precs"])
    def test_rejects_out_of_range(self, field):
        with pytest.raises(InputError, match="outside"):
            Problem(2, **{field: [(0, 2)]})

    def test_degrees_count_deduplicated_constraints(self):
        p = Problem(3, deps=[(0, 1)], precs=[(0, 1), (1, 2), (1, 2), (2, 2)])
        assert p.degrees() == [2, 3, 2]

    def test_names_must_match_and_be_unique(self):
        with pytest.raises(InputError):
            Problem(2, names=["x"])
        with pytest.raises(InputError):
            Problem(2, names=["x", "x"])

    def test_json_round_trip(self, tmp_path):
        p = Problem(3, deps=[(0, 1)], precs=[(1, 2)], names=["a", "b", "c"], name="demo", logs=[[0, 1], [2]])
        path = tmp_path / "p.json"
        save_problem(p, path)
        assert load_problem(path) == p
        doc = json.loads(path.read_text())
        assert doc["actions"] == ["a", "b", "c"]
        assert doc["logs"] == [[0, 1], [2]]

    def test_load_reports_location(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 2,\n "deps": [}')
        with pytest.raises(InputError, match=r"bad.json:2:"):
            load_problem(path)

    def test_load_requires_fields(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{"n": 2, "deps": []}')
        with pytest.raises(InputError, match="precs"):
            load_problem(path)


class TestCheckSchedule:
    def test_no_constraints_all_accepted(self):
        p = Problem(4)
        assert check_schedule(p, sched(4, {0: 1, 1: 2, 2: 3, 3: 4})) == []

    def test_precedence_violation(self):
        p = Problem(2, precs=[(0, 1)])
        (v,) = check_schedule(p, sched(2, {0: 2, 1: 1}))
        assert v.kind == "precedence" and v.actions == (0, 1)

    def test_dependency_violation(self):
        p = Problem(2, deps=[(0, 1)])
        (v,) = check_schedule(p, sched(2, {0: 1}))
        assert v.kind == "dependency" and v.actions == (0, 1)

    def test_range_and_missing_position(self):
        p = Problem(2)
        bad = Schedule(accepted=(True, True), positions=(0, None))
        kinds = sorted(v.kind for v in check_schedule(p, bad))
        assert kinds == ["missing-position", "range"]

    def test_size_mismatch_is_input_error(self):
        with pytest.raises(InputError):
            check_schedule(Problem(3), sched(2, {}))


class TestObjective:
    def test_counts(self):
        assert objective(sched(5, {})) == 0
        assert objective(sched(5, {0: 1, 2: 1, 4: 2})) == 3

    @given(st.lists(st.booleans(), min_size=1, max_size=20), st.data())
    def test_removing_acceptance_never_increases(self, flags, data):
        s = Schedule(tuple(flags), tuple(1 if f else None for f in flags))
        k = data.draw(st.integers(0, len(flags) - 1))
        fewer = list(flags)
        fewer[k] = False
        s2 = Schedule(tuple(fewer), tuple(1 if f else None for f in fewer))
        assert objective(s2) <= objective(s)


class TestFeasibleSubset:
    def test_examples(self):
        two_cycle = Problem(2, precs=[(0, 1), (1, 0)])
        assert feasible_subset(two_cycle, [False, False])
        assert not feasible_subset(two_cycle, [True, True])
        assert feasible_subset(two_cycle, [True, False])

    def test_dependency_closure(self):
        p = Problem(2, deps=[(0, 1)])
        assert not feasible_subset(p, [True, False])
        assert feasible_subset(p, [False, True])

    def test_self_precedence(self):
        p = Problem(1, precs=[(0, 0)])
        assert not feasible_subset(p, [True])

    @settings(max_examples=200)
    @given(problems(max_n=7), st.data())
    def test_matches_closure_oracle(self, p, data):
        acc = data.draw(st.lists(st.booleans(), min_size=p.n, max_size=p.n))
        closed = all(acc[j] for i, j in p.deps if acc[i])
        sub = [(i, j) for i, j in p.precs if acc[i] and acc[j]]
        assert feasible_subset(p, acc) == (closed and not has_cycle(p.n, sub))
