import pytest
from hypothesis import given, settings

from logrec import InputError, Problem, check_schedule, feasible_subset
from logrec.cp import schedule_for
from logrec.oracle import brute_force

from conftest import problems


def test_no_constraints():
    assert brute_force(Problem(8)) == (8, (True,) * 8)


def test_three_cycle_smallest_vector():
    # any two of three are feasible; (F,T,T) is the smallest acceptance vector
    assert brute_force(Problem(3, precs=[(0, 1), (1, 2), (2, 0)])) == (2, (False, True, True))


def test_dependency_plus_one_way_precedence():
    # a single precedence is no cycle, so both actions fit (enumeration confirms)
    assert brute_force(Problem(2, deps=[(0, 1)], precs=[(1, 0)])) == (2, (True, True))


def test_dependency_into_rejected_action():
    p = Problem(3, deps=[(0, 2)], precs=[(2, 2)])
    assert brute_force(p) == (1, (False, True, False))


def test_cap():
    with pytest.raises(InputError, match="cap"):
        brute_force(Problem(21))
    assert brute_force(Problem(3), cap=3)[0] == 3


@settings(max_examples=150)
@given(problems(max_n=7))
def test_witness_is_feasible_and_schedulable(p):
    value, acc = brute_force(p)
    assert sum(acc) == value
    assert feasible_subset(p, acc)
    assert check_schedule(p, schedule_for(p, acc)) == []


@settings(max_examples=100)
@given(problems(max_n=6))
def test_upper_bounds_every_feasible_set(p):
    value, acc = brute_force(p)
    for mask in range(1 << p.n):
        cand = [bool(mask >> i & 1) for i in range(p.n)]
        if feasible_subset(p, cand):
            assert sum(cand) <= value
            if sum(cand) == value:
                # witness is the smallest vector (False < True, action 0 first)
                assert tuple(acc) <= tuple(cand)
