import random

import pytest
from hypothesis import strategies as st

from logrec import Problem
from logrec.kernels import BACKENDS

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for ok, name, detail in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def report():
    def _report(ok, name, detail):
        ACCEPTANCE_RESULTS.append((bool(ok), name, detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        return ok
    return _report


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return request.param


def random_problem(rng, n, p_dep, p_prec, self_loops=False):
    deps = [(i, j) for i in range(n) for j in range(n) if i != j and rng.random() < p_dep]
    precs = [(i, j) for i in range(n) for j in range(n)
             if (i != j or self_loops) and rng.random() < p_prec]
    return Problem(n=n, deps=deps, precs=precs)


@st.composite
def problems(draw, max_n=8, with_deps=True):
    n = draw(st.integers(1, max_n))
    pair = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
    precs = draw(st.lists(pair, max_size=3 * n))
    deps = []
    if with_deps:
        deps = [p for p in draw(st.lists(pair, max_size=2 * n)) if p[0] != p[1]]
    return Problem(n=n, deps=deps, precs=precs)


# -- independent reference computations used by several test modules --------------

def reaches(n, edges):
    """Transitive closure by repeated squaring-free Warshall."""
    r = [[False] * n for _ in range(n)]
    for i, j in edges:
        r[i][j] = True
    for k in range(n):
        for i in range(n):
            if r[i][k]:
                for j in range(n):
                    if r[k][j]:
                        r[i][j] = True
    return r


def has_cycle(n, edges):
    r = reaches(n, edges)
    return any(r[i][i] for i in range(n))


def longest_path_positions(n, edges, members):
    """Bellman-Ford style relaxation to the longest-path layering."""
    active = [(i, j) for i, j in edges if members[i] and members[j]]
    pos = {k: 1 for k in range(n) if members[k]}
    for _ in range(n + 1):
        changed = False
        for i, j in active:
            if pos[j] < pos[i] + 1:
                pos[j] = pos[i] + 1
                changed = True
        if not changed:
            return pos
    raise AssertionError("cyclic")


@pytest.fixture
def rng():
    return random.Random(12345)
