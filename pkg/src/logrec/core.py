"""Problem instances, schedules, validation and the objective.

Actions are dense integer ids ``0..n-1``.  Positions in a schedule are
1-based and live in ``[1, n]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class InputError(ValueError):
    """Malformed instance, schedule or argument supplied by the caller."""


class ContractError(RuntimeError):
    """A precondition of an operation was violated by the caller."""


class InternalError(RuntimeError):
    """An invariant that should hold by construction was found broken."""


def _dedup_pairs(pairs: Iterable[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    seen = set()
    out = []
    for p in pairs:
        if len(p) != 2:
            raise InputError(f"constraint {list(p)!r} is not a pair")
        i, j = p
        if isinstance(i, bool) or isinstance(j, bool) or not isinstance(i, int) or not isinstance(j, int):
            raise InputError(f"constraint {list(p)!r} must hold two integers")
        key = (i, j)
        if key not in seen:
            seen.add(key)
            out.append(key)
    return tuple(out)


@dataclass(frozen=True)
class Problem:
    """An immutable reconciliation instance.

    ``deps`` holds pairs ``(i, j)``: accepting ``i`` forces accepting ``j``.
    ``precs`` holds pairs ``(i, j)``: if both are accepted, ``i`` runs
    strictly before ``j``.  Duplicate pairs are dropped on construction;
    a self-precedence ``(i, i)`` is kept and forces ``i`` to be rejected.
    """

    n: int
    deps: tuple[tuple[int, int], ...] = ()
    precs: tuple[tuple[int, int], ...] = ()
    names: tuple[str, ...] | None = None
    name: str = "instance"
    logs: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 0:
            raise InputError(f"n must be a non-negative integer, got {self.n!r}")
        deps = _dedup_pairs(self.deps)
        precs = _dedup_pairs(self.precs)
        for kind, pairs in (("dependency", deps), ("precedence", precs)):
            for i, j in pairs:
                if not (0 <= i < self.n and 0 <= j < self.n):
                    raise InputError(f"{kind} ({i}, {j}) references an action outside [0, {self.n})")
        for i, j in deps:
            if i == j:
                raise InputError(f"self-dependency ({i}, {i}) is not allowed")
        object.__setattr__(self, "deps", deps)
        object.__setattr__(self, "precs", precs)
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != self.n:
                raise InputError(f"expected {self.n} action names, got {len(names)}")
            if len(set(names)) != len(names):
                raise InputError("action names must be unique")
            object.__setattr__(self, "names", names)
        if self.logs is not None:
            logs = tuple(tuple(log) for log in self.logs)
            for log in logs:
                for a in log:
                    if not isinstance(a, int) or not 0 <= a < self.n:
                        raise InputError(f"log entry {a!r} is not an action id")
            object.__setattr__(self, "logs", logs)

    @property
    def action_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        return tuple(f"a{i}" for i in range(self.n))

    def degrees(self) -> list[int]:
        """Number of (deduplicated) constraints touching each action."""
        deg = [0] * self.n
        for pairs in (self.deps, self.precs):
            for i, j in pairs:
                deg[i] += 1
                if j != i:
                    deg[j] += 1
        return deg

    def to_json(self) -> dict:
        doc = {"name": self.name, "n": self.n}
        if self.names is not None:
            doc["actions"] = list(self.names)
        doc["deps"] = [list(p) for p in self.deps]
        doc["precs"] = [list(p) for p in self.precs]
        if self.logs is not None:
            doc["logs"] = [list(log) for log in self.logs]
        return doc

    @classmethod
    def from_json(cls, doc) -> "Problem":
        if not isinstance(doc, dict):
            raise InputError("instance document must be a JSON object")
        for key in ("n", "deps", "precs"):
            if key not in doc:
                raise InputError(f"instance is missing field {key!r}")
        for key in ("deps", "precs"):
            if not isinstance(doc[key], list):
                raise InputError(f"field {key!r} must be an array of pairs")
        return cls(
            n=doc["n"],
            deps=doc["deps"],
            precs=doc["precs"],
            names=doc.get("actions"),
            name=str(doc.get("name", "instance")),
            logs=doc.get("logs"),
        )


def dumps_problem(problem: Problem) -> str:
    return json.dumps(problem.to_json(), separators=(",", ":")) + "\n"


def load_problem(path) -> Problem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return Problem.from_json(doc)


def save_problem(problem: Problem, path) -> None:
    Path(path).write_text(dumps_problem(problem))


@dataclass(frozen=True)
class Schedule:
    """Acceptance flags plus 1-based positions (``None`` for rejected actions)."""

    accepted: tuple[bool, ...]
    positions: tuple[int | None, ...]

    @classmethod
    def from_positions(cls, n: int, positions: dict[int, int]) -> "Schedule":
        return cls(
            accepted=tuple(i in positions for i in range(n)),
            positions=tuple(positions.get(i) for i in range(n)),
        )

    @property
    def n(self) -> int:
        return len(self.accepted)

    def ordered(self) -> list[tuple[int, int]]:
        """(position, action) pairs sorted by position then action id."""
        return sorted((p, i) for i, (a, p) in enumerate(zip(self.accepted, self.positions)) if a)


@dataclass
class SolveStats:
    first_value: int = 0
    first_ms: float = 0.0
    best_value: int = 0
    best_ms: float = 0.0
    proved_optimal: bool = False
    total_ms: float = 0.0
    nodes_or_iterations: int = 0
    trace: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "first_value": self.first_value,
            "first_ms": self.first_ms,
            "best_value": self.best_value,
            "best_ms": self.best_ms,
            "proved_optimal": self.proved_optimal,
            "total_ms": self.total_ms,
            "nodes_or_iterations": self.nodes_or_iterations,
        }


@dataclass(frozen=True)
class Violation:
    kind: str  # "dependency", "precedence", "range", "missing-position"
    actions: tuple[int, ...]
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def check_schedule(problem: Problem, schedule: Schedule) -> list[Violation]:
    """List every constraint the schedule breaks; an empty list means valid."""
    n = problem.n
    if len(schedule.accepted) != n or len(schedule.positions) != n:
        raise InputError(
            f"schedule covers {len(schedule.accepted)} actions, instance has {n}"
        )
    acc = schedule.accepted
    pos = schedule.positions
    out = []
    for i in range(n):
        if not acc[i]:
            continue
        p = pos[i]
        if p is None:
            out.append(Violation("missing-position", (i,), f"accepted action {i} has no position"))
        elif not 1 <= p <= n:
            out.append(Violation("range", (i,), f"position {p} of action {i} outside [1, {n}]"))
    for i, j in problem.deps:
        if acc[i] and not acc[j]:
            out.append(Violation("dependency", (i, j), f"{i} accepted but its dependency {j} rejected"))
    for i, j in problem.precs:
        if acc[i] and acc[j] and pos[i] is not None and pos[j] is not None and not pos[i] < pos[j]:
            out.append(Violation("precedence", (i, j), f"p[{i}]={pos[i]} is not before p[{j}]={pos[j]}"))
    return out


def objective(schedule: Schedule) -> int:
    return sum(1 for a in schedule.accepted if a)


def find_cycle_free_order(n: int, edges: Iterable[tuple[int, int]], members: Sequence[bool]) -> list[int] | None:
    """Topological order of ``members`` under ``edges``, or None if cyclic."""
    succ = [[] for _ in range(n)]
    indeg = [0] * n
    for i, j in edges:
        if members[i] and members[j]:
            succ[i].append(j)
            indeg[j] += 1
    stack = [i for i in range(n) if members[i] and indeg[i] == 0]
    order = []
    while stack:
        u = stack.pop()
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                stack.append(v)
    if len(order) != sum(1 for m in members if m):
        return None
    return order


def feasible_subset(problem: Problem, accepted: Sequence[bool]) -> bool:
    """True iff ``accepted`` is dependency-closed and its precedence graph is acyclic."""
    if len(accepted) != problem.n:
        raise InputError(f"acceptance vector has length {len(accepted)}, expected {problem.n}")
    for i, j in problem.deps:
        if accepted[i] and not accepted[j]:
            return False
    return find_cycle_free_order(problem.n, problem.precs, accepted) is not None
