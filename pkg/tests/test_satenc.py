import itertools
import random

import pytest

from logrec import InputError, InternalError, Schedule
from logrec.cp import branch_and_bound
from logrec.satenc import (CnfFormula, ReductionMap, decode, encode, load_map,
                           parse_dimacs, save_map, to_dimacs)


def truth_table_sat(cnf):
    return any(cnf.satisfied_by(v) for v in itertools.product([False, True], repeat=cnf.num_vars))


def random_cnf(rng, max_vars=4, max_clauses=5):
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        vs = rng.sample(range(n), rng.randint(1, min(3, n)))
        clauses.append([(v + 1) * rng.choice((1, -1)) for v in vs])
    return CnfFormula.from_ints(n, clauses)


class TestEncode:
    def test_unit_clause(self):
        p, m = encode(CnfFormula.from_ints(1, [[1]]))
        assert p.n == 2 and m.n == 2
        # mutex pair plus the self-loop on the falsifying copy
        assert set(p.precs) == {(0, 1), (1, 0), (0, 0)}
        assert p.action_names == ("x1_0^1", "x1_1^1")
        assert p.name == "sat_N1_C1"

    def test_two_vars_one_clause(self):
        p, m = encode(CnfFormula.from_ints(2, [[1, -2]]))
        assert p.n == 4
        ring = {(m.action(0, 0, False), m.action(1, 0, True)), (m.action(1, 0, True), m.action(0, 0, False))}
        assert ring <= set(p.precs)

    @pytest.mark.parametrize("seed", range(20))
    def test_constraint_count(self, seed):
        cnf = random_cnf(random.Random(seed))
        p, _ = encode(cnf)
        N, C = cnf.num_vars, len(cnf.clauses)
        # clause rings never repeat a mutex arc: a clause uses each variable once
        assert len(p.precs) == 2 * N * C * C + sum(len(cl) for cl in cnf.clauses)
        assert not p.deps

    def test_map_layout(self):
        m = ReductionMap(3, 4)
        seen = set()
        for v in range(3):
            for c in range(4):
                for pol in (False, True):
                    a = m.action(v, c, pol)
                    assert m.triple(a) == (v, c, pol)
                    seen.add(a)
        assert seen == set(range(m.n))


class TestDecode:
    def test_satisfiable_unit(self):
        cnf = CnfFormula.from_ints(1, [[1]])
        p, m = encode(cnf)
        s, stats = branch_and_bound(p)
        assert stats.best_value == 1 and decode(m, s) == [True]

    def test_contradiction(self):
        cnf = CnfFormula.from_ints(1, [[1], [-1]])
        p, m = encode(cnf)
        s, stats = branch_and_bound(p)
        assert stats.proved_optimal and stats.best_value < 2
        assert decode(m, s) is None

    def test_size_mismatch(self):
        with pytest.raises(InputError):
            decode(ReductionMap(1, 1), Schedule((True,), (1,)))

    def test_mixed_copies_are_internal_error(self):
        m = ReductionMap(1, 2)
        s = Schedule.from_positions(4, {m.action(0, 0, True): 1, m.action(0, 1, False): 2})
        with pytest.raises(InternalError):
            decode(m, s)

    @pytest.mark.parametrize("seed", range(40))
    def test_round_trip_against_truth_table(self, seed):
        cnf = random_cnf(random.Random(1000 + seed))
        p, m = encode(cnf)
        s, stats = branch_and_bound(p)
        assert stats.proved_optimal
        full = stats.best_value == m.num_vars * m.num_clauses
        assert full == truth_table_sat(cnf)
        val = decode(m, s)
        assert (val is not None) == full
        if val is not None:
            assert cnf.satisfied_by(val)


class TestDimacs:
    def test_parse(self):
        cnf = parse_dimacs("c hi\np cnf 3 2\n1 -3 0\n2 3 -1 0\n")
        assert cnf.clauses == (((0, True), (2, False)), ((1, True), (2, True), (0, False)))

    def test_multi_line_clause_and_trailer(self):
        cnf = parse_dimacs("p cnf 2 1\n1\n-2 0\n%\n0\n")
        assert cnf.clauses == (((0, True), (1, False)),)

    def test_round_trip(self):
        cnf = random_cnf(random.Random(5))
        assert parse_dimacs(to_dimacs(cnf)) == cnf

    @pytest.mark.parametrize("text,msg", [
        ("1 2 0\n", "before"),
        ("p cnf x 1\n1 0\n", "header"),
        ("p cnf 2 1\n1 3 0\n", "line 2"),
        ("p cnf 2 1\n1 a 0\n", "line 2"),
        ("p cnf 2 2\n1 0\n", "announces"),
        ("c nothing\n", "missing"),
        ("p cnf 2 1\n1 1 0\n", "twice"),
        ("p cnf 2 1\n0\n", "empty"),
    ])
    def test_errors(self, text, msg):
        with pytest.raises(InputError, match=msg):
            parse_dimacs(text)


def test_map_file_round_trip(tmp_path):
    m = ReductionMap(2, 3)
    save_map(m, tmp_path / "m.json")
    assert load_map(tmp_path / "m.json") == m


def test_map_file_rejects_bad_layout(tmp_path):
    doc = ReductionMap(1, 1).to_json()
    doc["actions"][0]["id"] = 1
    (tmp_path / "m.json").write_text(__import__("json").dumps(doc))
    with pytest.raises(InputError):
        load_map(tmp_path / "m.json")
