"""Seeded random instances in the style of the r*/t* benchmark families.

Every ordered pair ``(i, j)`` with ``i != j`` is visited in row-major
order.  For each pair two uniform draws are taken from ``random.Random(seed)``
(Mersenne Twister, whose ``random()`` stream is stable across Python
versions): the first decides the dependency, the second the precedence.
Each is kept with probability ``density / size``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import InputError, Problem


@dataclass(frozen=True)
class GenSpec:
    size: int
    dep_density: float = 1.5
    prec_density: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.size < 1:
            raise InputError("size must be at least 1")
        for d in (self.dep_density, self.prec_density):
            if d < 0 or d > self.size:
                raise InputError(f"density {d} gives a probability outside [0, 1] for size {self.size}")

    @property
    def family(self) -> str:
        return "r" if self.dep_density > 0 else "t"

    @property
    def label(self) -> str:
        return f"{self.family}{self.size}v{self.seed}"

    @property
    def name(self) -> str:
        return f"{self.label}_dep{self.dep_density:g}_prec{self.prec_density:g}"


def generate(spec: GenSpec) -> Problem:
    n = spec.size
    p_dep = spec.dep_density / n
    p_prec = spec.prec_density / n
    draw = random.Random(spec.seed).random
    deps = []
    precs = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if draw() < p_dep:
                deps.append((i, j))
            if draw() < p_prec:
                precs.append((i, j))
    return Problem(n=n, deps=deps, precs=precs, name=spec.name)
