"""Exhaustive reference solver for small instances."""

from __future__ import annotations

from .core import InputError, Problem, feasible_subset

DEFAULT_CAP = 20


def _masks_with_popcount(n: int, k: int):
    """All ``n``-bit masks with ``k`` bits set, ascending (Gosper's hack)."""
    if k == 0:
        yield 0
        return
    mask = (1 << k) - 1
    limit = 1 << n
    while mask < limit:
        yield mask
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple


def brute_force(problem: Problem, cap: int = DEFAULT_CAP) -> tuple[int, tuple[bool, ...]]:
    """Optimum value and its lexicographically smallest acceptance vector.

    Vectors compare with ``False < True`` and action 0 most significant, so
    among optimal sets the one that rejects the lowest ids wins.
    """
    n = problem.n
    if n > cap:
        raise InputError(f"brute force refused: n={n} exceeds the cap of {cap}")
    for k in range(n, -1, -1):
        for mask in _masks_with_popcount(n, k):
            # bit b stands for action n-1-b, so ascending masks are ascending vectors
            accepted = tuple(bool(mask >> (n - 1 - i) & 1) for i in range(n))
            if feasible_subset(problem, accepted):
                return k, accepted
    raise AssertionError("the empty set is always feasible")
