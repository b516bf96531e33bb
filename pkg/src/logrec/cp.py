"""Exact solver: propagation plus branch-and-bound on acceptance booleans.

Each action has an acceptance boolean and a position interval ``[lb, ub]``
within ``[1, n]``.  The interval of an action that is not yet rejected is
read as "where it could go if accepted"; it is only tightened from
neighbours that are already accepted.  Search branches on booleans only,
most-constrained first, trying acceptance before rejection.  Positions are
never enumerated: once the accepted set is fixed the earliest consistent
dates are computed directly.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from time import perf_counter
from typing import Sequence

from . import _fallback, kernels
from .core import ContractError, InputError, Problem, Schedule, SolveStats, find_cycle_free_order

UNKNOWN = _fallback.UNK
FALSE = _fallback.FALSE
TRUE = _fallback.TRUE

CONSISTENT = "CONSISTENT"
FAILED = "FAILED"


@dataclass
class CpState:
    """Boolean and interval domains for every action.

    Booleans use ``UNKNOWN`` / ``FALSE`` / ``TRUE``.  ``trail`` records
    ``(kind, action, old_value)`` for undo, with kind 0 = boolean,
    1 = lower bound, 2 = upper bound.
    """

    bool_dom: list[int]
    pos_lb: list[int]
    pos_ub: list[int]
    trail: list[tuple[int, int, int]] = field(default_factory=list)

    @classmethod
    def initial(cls, problem: Problem) -> "CpState":
        n = problem.n
        return cls([UNKNOWN] * n, [1] * n, [n] * n)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            kind, k, old = self.trail.pop()
            if kind == 0:
                self.bool_dom[k] = old
            elif kind == 1:
                self.pos_lb[k] = old
            else:
                self.pos_ub[k] = old


@dataclass(frozen=True)
class CpConfig:
    time_limit: float | None = None  # seconds
    node_limit: int | None = None
    prove_optimality: bool = True
    cancel: threading.Event | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit <= 0:
            raise InputError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise InputError("node_limit must be positive")


def _split(problem: Problem):
    deps, precs = problem.deps, problem.precs
    return ([i for i, _ in deps], [j for _, j in deps],
            [i for i, _ in precs], [j for _, j in precs])


def propagate(problem: Problem, state: CpState) -> str:
    """Run all propagation rules to a fixpoint, narrowing ``state`` in place."""
    n = problem.n
    if not (len(state.bool_dom) == len(state.pos_lb) == len(state.pos_ub) == n):
        raise InputError("state does not match the instance size")
    eng = _fallback.Engine(n, *_split(problem))
    eng.b = list(state.bool_dom)
    eng.lb = list(state.pos_lb)
    eng.ub = list(state.pos_ub)
    eng.n_true = eng.b.count(TRUE)
    eng.n_unk = eng.b.count(UNKNOWN)
    eng.enqueue_all()
    ok = eng.propagate()
    for kind, k, _ in eng.trail:
        old = (state.bool_dom, state.pos_lb, state.pos_ub)[kind][k]
        state.trail.append((kind, k, old))
        (state.bool_dom, state.pos_lb, state.pos_ub)[kind][k] = (eng.b, eng.lb, eng.ub)[kind][k]
    return CONSISTENT if ok else FAILED


def variable_order(problem: Problem) -> list[int]:
    """Actions sorted by decreasing constraint degree, ties by index."""
    deg = problem.degrees()
    return sorted(range(problem.n), key=lambda k: (-deg[k], k))


def select_variable(problem: Problem, state: CpState) -> int | None:
    """Most-constrained unbound action (smallest index on ties), or None."""
    for k in variable_order(problem):
        if state.bool_dom[k] == UNKNOWN:
            return k
    return None


def earliest_positions(problem: Problem, accepted: Sequence[bool]) -> dict[int, int]:
    """Componentwise-minimal positions for an acyclic accepted set."""
    order = find_cycle_free_order(problem.n, problem.precs, accepted)
    if order is None:
        raise ContractError("accepted actions contain a precedence cycle")
    preds = [[] for _ in range(problem.n)]
    for i, j in problem.precs:
        if accepted[i] and accepted[j]:
            preds[j].append(i)
    pos = {}
    for k in order:
        pos[k] = 1 + max((pos[j] for j in preds[k]), default=0)
    return pos


def extract_schedule(problem: Problem, accepted: Sequence[bool], positions) -> list[tuple[int, int]]:
    """Accepted actions as (position, action) pairs in schedule order."""
    if isinstance(positions, dict):
        get = positions.get
    else:
        get = positions.__getitem__
    return sorted((get(i), i) for i in range(problem.n) if accepted[i])


def schedule_for(problem: Problem, accepted: Sequence[bool]) -> Schedule:
    accepted = [bool(a) for a in accepted]
    return Schedule.from_positions(problem.n, earliest_positions(problem, accepted))


def branch_and_bound(problem: Problem, config: CpConfig = CpConfig(), backend=None):
    """Maximise the number of accepted actions.

    Returns ``(schedule, stats)``.  ``stats.trace`` lists every improving
    incumbent as ``(value, elapsed_ms, nodes)``.  Without
    ``prove_optimality`` the search stops at the first solution.
    """
    impl = kernels if backend is None else kernels.BACKENDS[backend]
    t0 = perf_counter()
    cancel = config.cancel.is_set if config.cancel is not None else None
    best, incumbents, nodes, reason, root_bound = impl.bb_search(
        problem.n, *_split(problem), variable_order(problem),
        not config.prove_optimality,
        -1 if config.node_limit is None else config.node_limit,
        -1.0 if config.time_limit is None else config.time_limit,
        cancel,
    )
    total_ms = (perf_counter() - t0) * 1e3
    if best is None:
        # interrupted before any leaf; rejecting everything is always valid
        best = [0] * problem.n
        incumbents = [(0, total_ms / 1e3, nodes)]
    value = sum(best)
    trace = [(v, s * 1e3, k) for v, s, k in incumbents]
    stats = SolveStats(
        first_value=trace[0][0],
        first_ms=trace[0][1],
        best_value=value,
        best_ms=trace[-1][1],
        proved_optimal=reason == "exhausted" or value >= root_bound,
        total_ms=total_ms,
        nodes_or_iterations=nodes,
        trace=trace,
    )
    stats.stop_reason = reason
    return schedule_for(problem, best), stats
