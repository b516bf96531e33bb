"""Encoding CNF satisfiability as a precedence-only reconciliation problem.

Each variable ``p`` gets ``2*C`` actions, one "false" copy and one "true"
copy per clause index.  A two-cycle between every false copy and every
true copy of the same variable makes the two polarities mutually
exclusive.  Each clause adds a cycle through the copies that would
falsify its literals, so a schedule may not take all of them.  The
formula is satisfiable iff some schedule accepts ``N*C`` actions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .core import InputError, InternalError, Problem, Schedule, objective

Literal = tuple[int, bool]  # (variable index, polarity); polarity True means positive


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[Literal, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise InputError("a formula needs at least one variable")
        clauses = tuple(tuple((int(v), bool(s)) for v, s in cl) for cl in self.clauses)
        for k, cl in enumerate(clauses):
            if not cl:
                raise InputError(f"clause {k + 1} is empty")
            seen = set()
            for v, _ in cl:
                if not 0 <= v < self.num_vars:
                    raise InputError(f"clause {k + 1} uses variable {v + 1} outside 1..{self.num_vars}")
                if v in seen:
                    raise InputError(f"clause {k + 1} mentions variable {v + 1} twice")
                seen.add(v)
        object.__setattr__(self, "clauses", clauses)

    def satisfied_by(self, valuation: Sequence[bool]) -> bool:
        return all(any(valuation[v] == s for v, s in cl) for cl in self.clauses)

    @classmethod
    def from_ints(cls, num_vars: int, clauses) -> "CnfFormula":
        """Build from DIMACS-style signed, 1-based integers."""
        return cls(num_vars, tuple(tuple((abs(x) - 1, x > 0) for x in cl) for cl in clauses))


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = num_clauses = None
    clauses = []
    current = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line[0] in "c%":
            if line.startswith("%"):
                break
            continue
        if line[0] == "p":
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise InputError(f"line {lineno}: bad header {line!r}")
            try:
                num_vars, num_clauses = int(fields[2]), int(fields[3])
            except ValueError:
                raise InputError(f"line {lineno}: bad header {line!r}") from None
            continue
        if num_vars is None:
            raise InputError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                x = int(tok)
            except ValueError:
                raise InputError(f"line {lineno}: {tok!r} is not a literal") from None
            if x == 0:
                clauses.append(current)
                current = []
            elif abs(x) > num_vars:
                raise InputError(f"line {lineno}: literal {x} exceeds {num_vars} variables")
            else:
                current.append(x)
    if num_vars is None:
        raise InputError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != num_clauses:
        raise InputError(f"header announces {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula.from_ints(num_vars, clauses)


def to_dimacs(cnf: CnfFormula) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for cl in cnf.clauses:
        lines.append(" ".join(str(v + 1 if s else -(v + 1)) for v, s in cl) + " 0")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReductionMap:
    num_vars: int
    num_clauses: int

    def action(self, var: int, clause: int, polarity: bool) -> int:
        """Id of ``var``'s copy for clause index ``clause`` (0-based)."""
        return (var * self.num_clauses + clause) * 2 + (1 if polarity else 0)

    def triple(self, action: int) -> tuple[int, int, bool]:
        rest, pol = divmod(action, 2)
        var, clause = divmod(rest, self.num_clauses)
        return var, clause, bool(pol)

    @property
    def n(self) -> int:
        return 2 * self.num_vars * self.num_clauses

    def to_json(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "num_clauses": self.num_clauses,
            "actions": [
                {"id": a, "var": v + 1, "clause": c + 1, "value": pol}
                for a, (v, c, pol) in ((a, self.triple(a)) for a in range(self.n))
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "ReductionMap":
        try:
            m = cls(int(doc["num_vars"]), int(doc["num_clauses"]))
        except (KeyError, TypeError, ValueError):
            raise InputError("mapping file needs integer num_vars and num_clauses") from None
        for entry in doc.get("actions", []):
            if m.action(entry["var"] - 1, entry["clause"] - 1, entry["value"]) != entry["id"]:
                raise InputError(f"mapping entry {entry} does not match the encoding layout")
        return m


def encode(cnf: CnfFormula) -> tuple[Problem, ReductionMap]:
    N = cnf.num_vars
    C = len(cnf.clauses)
    rmap = ReductionMap(N, C)
    precs = []
    for v in range(N):
        for i in range(C):
            f = rmap.action(v, i, False)
            for j in range(C):
                t = rmap.action(v, j, True)
                precs.append((f, t))
                precs.append((t, f))
    for i, cl in enumerate(cnf.clauses):
        # a positive literal is falsified by the "false" copy, a negative one by the "true" copy
        ring = [rmap.action(v, i, not s) for v, s in cl]
        for k in range(len(ring)):
            precs.append((ring[k], ring[(k + 1) % len(ring)]))
    names = []
    for a in range(rmap.n):
        v, c, pol = rmap.triple(a)
        names.append(f"x{v + 1}_{int(pol)}^{c + 1}")
    problem = Problem(n=rmap.n, precs=precs, names=names, name=f"sat_N{N}_C{C}")
    return problem, rmap


def decode(rmap: ReductionMap, schedule: Schedule) -> list[bool] | None:
    """The valuation a full-size schedule represents, or None if it is smaller."""
    if schedule.n != rmap.n:
        raise InputError(f"schedule has {schedule.n} actions, mapping expects {rmap.n}")
    if objective(schedule) != rmap.num_vars * rmap.num_clauses:
        return None
    valuation = []
    for v in range(rmap.num_vars):
        copies = {
            pol: sum(schedule.accepted[rmap.action(v, c, pol)] for c in range(rmap.num_clauses))
            for pol in (False, True)
        }
        if copies[True] == rmap.num_clauses and copies[False] == 0:
            valuation.append(True)
        elif copies[False] == rmap.num_clauses and copies[True] == 0:
            valuation.append(False)
        else:
            raise InternalError(
                f"variable {v + 1} has {copies[False]} false and {copies[True]} true copies "
                "accepted in a full-size schedule"
            )
    return valuation


def save_map(rmap: ReductionMap, path) -> None:
    Path(path).write_text(json.dumps(rmap.to_json(), separators=(",", ":")) + "\n")


def load_map(path) -> ReductionMap:
    try:
        return ReductionMap.from_json(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
