"""Local search over full position vectors (precedence-only instances).

Every action always has a position in ``[1, n]``.  A violated precedence
``p_i >= p_j`` costs ``1 + p_i - p_j``; the search moves one action by
+-1 at a time to reduce the summed error.  The *value* of a state counts
error-free actions; its *cost* is what survives after greedily dropping
the actions with the most violated constraints, and is what the search
reports as the solution quality.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from time import perf_counter
from typing import Sequence

from . import kernels
from .core import InputError, Problem, Schedule, SolveStats
from .cp import schedule_for

DESCENT = "descent"
TABU = "tabu"


def constraint_error(pi: int, pj: int) -> int:
    return 0 if pi < pj else 1 + (pi - pj)


@dataclass
class LsParams:
    mode: str = TABU
    max_iterations: int | None = None  # sweeps for descent, moves for tabu
    tabu_max: int = 10
    rng_seed: int = 0
    warm_start: Sequence[int] | None = None
    time_limit: float | None = None  # seconds
    cancel: threading.Event | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.mode not in (DESCENT, TABU):
            raise InputError(f"unknown local search mode {self.mode!r}")
        if self.tabu_max < 1:
            raise InputError("tabu_max must be at least 1")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise InputError("max_iterations must be non-negative")

    def iteration_budget(self, n: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return n + 1 if self.mode == DESCENT else 10 * n * n


class LsState:
    """Positions plus incrementally maintained per-constraint errors."""

    def __init__(self, problem: Problem, pos: Sequence[int]):
        self.problem = problem
        self.pos = list(pos)
        n = problem.n
        self.incident = [[] for _ in range(n)]
        for c, (i, j) in enumerate(problem.precs):
            self.incident[i].append(c)
            if j != i:
                self.incident[j].append(c)
        self.errors = [constraint_error(self.pos[i], self.pos[j]) for i, j in problem.precs]
        self.action_error = [0] * n
        for c, (i, j) in enumerate(problem.precs):
            self.action_error[i] += self.errors[c]
            if j != i:
                self.action_error[j] += self.errors[c]
        self.evaluation = sum(self.errors)
        self.tabu_until = [0] * n
        self.iteration = 0
        self.best_cost_seen = 0

    def move(self, i: int, p: int) -> None:
        n = self.problem.n
        if not 1 <= p <= n:
            raise InputError(f"position {p} outside [1, {n}]")
        self.pos[i] = p
        precs = self.problem.precs
        for c in self.incident[i]:
            a, b = precs[c]
            new = constraint_error(self.pos[a], self.pos[b])
            d = new - self.errors[c]
            if d:
                self.errors[c] = new
                self.evaluation += d
                self.action_error[a] += d
                if b != a:
                    self.action_error[b] += d


def initial_state(problem: Problem, warm_start: Sequence[int] | None = None) -> LsState:
    n = problem.n
    if warm_start is None:
        return LsState(problem, range(1, n + 1))
    warm_start = list(warm_start)
    if len(warm_start) != n:
        raise InputError(f"warm start has {len(warm_start)} positions, expected {n}")
    for p in warm_start:
        if isinstance(p, bool) or not isinstance(p, int) or not 1 <= p <= n:
            raise InputError(f"warm start position {p!r} outside [1, {n}]")
    return LsState(problem, warm_start)


def warm_start_from_logs(problem: Problem) -> list[int] | None:
    """Positions that replay the instance's logs one after another."""
    if not problem.logs:
        return None
    pos = [0] * problem.n
    k = 0
    for log in problem.logs:
        for a in log:
            if pos[a] == 0:
                k += 1
                pos[a] = k
    for a in range(problem.n):
        if pos[a] == 0:
            k += 1
            pos[a] = k
    return pos


def _positions(state) -> list[int]:
    return state.pos if isinstance(state, LsState) else list(state)


def evaluation(problem: Problem, state) -> int:
    pos = _positions(state)
    return sum(constraint_error(pos[i], pos[j]) for i, j in problem.precs)


def value(problem: Problem, state) -> int:
    """Number of actions none of whose precedences is violated."""
    pos = _positions(state)
    dirty = set()
    for i, j in problem.precs:
        if constraint_error(pos[i], pos[j]):
            dirty.add(i)
            dirty.add(j)
    return problem.n - len(dirty)


def cost(problem: Problem, state) -> tuple[int, frozenset]:
    """Survivors after repeatedly dropping the most-violating action.

    Counts only violations whose other endpoint is still present; ties go
    to the smallest index.  The survivors violate nothing among
    themselves, so they form a feasible acceptance set.
    """
    pos = _positions(state)
    violated = [(i, j) for i, j in problem.precs if constraint_error(pos[i], pos[j])]
    alive = set(range(problem.n))
    while True:
        counts = {}
        for i, j in violated:
            if i in alive and j in alive:
                counts[i] = counts.get(i, 0) + 1
                if j != i:
                    counts[j] = counts.get(j, 0) + 1
        if not counts:
            return len(alive), frozenset(alive)
        top = max(counts.values())
        alive.remove(min(k for k, c in counts.items() if c == top))


def _require_precedence_only(problem: Problem) -> None:
    if problem.deps:
        raise InputError(
            "local search handles precedence-only instances; "
            f"this one has {len(problem.deps)} dependency constraints (use the CP solver)"
        )


def _run(problem: Problem, params: LsParams, tabu: bool, backend=None):
    _require_precedence_only(problem)
    impl = kernels if backend is None else kernels.BACKENDS[backend]
    start = initial_state(problem, params.warm_start)
    t0 = perf_counter()
    cancel = params.cancel.is_set if params.cancel is not None else None
    best_pos, raw_trace, iters, sweeps, final_pos, final_eval, reason = impl.ls_run(
        problem.n,
        [i for i, _ in problem.precs],
        [j for _, j in problem.precs],
        start.pos,
        tabu,
        params.iteration_budget(problem.n),
        params.tabu_max,
        params.rng_seed,
        -1.0 if params.time_limit is None else params.time_limit,
        cancel,
    )
    total_ms = (perf_counter() - t0) * 1e3
    best, survivors = cost(problem, best_pos)
    schedule = schedule_for(problem, [k in survivors for k in range(problem.n)])
    trace = [
        {"iter": it, "eval": e, "value": v, "cost": c, "t_ms": s * 1e3}
        for it, e, v, c, s in raw_trace
    ]
    stats = SolveStats(
        first_value=trace[0]["cost"],
        first_ms=trace[0]["t_ms"],
        best_value=best,
        best_ms=trace[-1]["t_ms"],
        # a zero-error state accepts everything, which no schedule can beat
        proved_optimal=best == problem.n,
        total_ms=total_ms,
        nodes_or_iterations=iters if tabu else sweeps,
        trace=trace,
    )
    stats.stop_reason = reason
    stats.final_positions = final_pos
    stats.final_evaluation = final_eval
    stats.best_positions = best_pos
    return schedule, stats


def descent(problem: Problem, params: LsParams | None = None, backend=None):
    """Sweep-order descent to a local optimum; returns ``(schedule, stats)``.

    ``stats.nodes_or_iterations`` counts sweeps that moved something.
    """
    params = params or LsParams(mode=DESCENT)
    return _run(problem, params, tabu=False, backend=backend)


def tabu_search(problem: Problem, params: LsParams | None = None, backend=None):
    """Descent followed by randomized Tabu moves; returns ``(schedule, stats, trace)``.

    Each Tabu iteration takes the best improving move over all actions
    that are not Tabu (or that are Tabu but would beat the best cost seen).
    An action with no improving move becomes Tabu for a random tenure in
    ``[1, tabu_max]`` iterations.  When nothing can move, a random action
    takes a random step.  Deterministic for a given ``rng_seed``.
    """
    params = params or LsParams()
    schedule, stats = _run(problem, params, tabu=True, backend=backend)
    return schedule, stats, stats.trace


def format_trace(trace, with_times: bool = True) -> list[str]:
    lines = []
    for row in trace:
        t = f"{row['t_ms']:.3f}" if with_times else "-"
        lines.append(f"iter={row['iter']} eval={row['eval']} value={row['value']} cost={row['cost']} t_ms={t}")
    return lines
