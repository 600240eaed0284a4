"""Pure-Python search kernels.

This module is the reference implementation of the hot inner loops shared by
the whole toolkit: legal-operation enumeration over a Countdown state, the
exhaustive solver, and no-trace strategy simulations used for difficulty
classification.  A compiled twin (``ckernel``) implements the same functions
with identical semantics; ``searchtrace._kernel`` selects one at import time.

States are plain tuples of non-negative ints, kept in their visit order
(operand removal is stable, results are appended at the end).  Operations are
``(lhs, rhs, op, result)`` tuples with ``op`` one of ``+ - * /`` and the
operands already in rendering order.
"""

from __future__ import annotations

HEURISTIC_SUM = 0
HEURISTIC_MULTIPLY = 1


def enum_ops(nums: tuple[int, ...]) -> list[tuple[int, int, str, int]]:
    """All legal operations over pairs of ``nums``, in canonical order.

    Pairs are scanned by position (i < j); for each pair the operators are
    tried in the fixed order +, -, *, /.  Addition and multiplication render
    in positional order; subtraction and division put the larger operand
    first so results stay non-negative integers, except ``0/x`` which is the
    one legal small-over-large division.  Division requires an exact
    quotient and a non-zero divisor.  Repeated values can produce the same
    (operands, operator) combination from different positions; only the
    first occurrence is kept.
    """
    k = len(nums)
    out: list[tuple[int, int, str, int]] = []
    seen: set[tuple[int, int, str]] = set()
    for i in range(k - 1):
        a = nums[i]
        for j in range(i + 1, k):
            b = nums[j]
            lo, hi = (a, b) if a <= b else (b, a)
            key = (lo, hi, "+")
            if key not in seen:
                seen.add(key)
                out.append((a, b, "+", a + b))
            key = (lo, hi, "-")
            if key not in seen:
                seen.add(key)
                out.append((hi, lo, "-", hi - lo))
            key = (lo, hi, "*")
            if key not in seen:
                seen.add(key)
                out.append((a, b, "*", a * b))
            if lo >= 1:
                if hi % lo == 0:
                    key = (lo, hi, "/")
                    if key not in seen:
                        seen.add(key)
                        out.append((hi, lo, "/", hi // lo))
            elif hi >= 1:  # lo == 0: zero divided by anything positive
                key = (lo, hi, "/")
                if key not in seen:
                    seen.add(key)
                    out.append((0, hi, "/", 0))
    return out


def child_state(nums: tuple[int, ...], lhs: int, rhs: int, result: int) -> tuple[int, ...]:
    """Remaining numbers after consuming ``lhs`` and ``rhs``: stable removal,
    result appended at the end."""
    out = list(nums)
    out.remove(lhs)
    out.remove(rhs)
    out.append(result)
    return tuple(out)


def divisors(n: int) -> tuple[int, ...]:
    """Positive divisors of ``n`` in ascending order (1 and n included)."""
    if n < 1:
        raise ValueError(f"divisors requires a positive int, got {n}")
    small = []
    large = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
        d += 1
    return tuple(small + large[::-1])


def h_sum(nums: tuple[int, ...], target: int) -> int:
    """Distance of the remaining-numbers sum from the target."""
    return abs(target - sum(nums))


def h_multiply(nums: tuple[int, ...], target: int) -> int:
    """Smallest distance of the remaining-numbers sum from any divisor of
    the target (1 and the target itself count as divisors)."""
    s = sum(nums)
    return min(abs(f - s) for f in divisors(target))


def _heuristic(kind: int, nums: tuple[int, ...], target: int) -> int:
    if kind == HEURISTIC_SUM:
        return h_sum(nums, target)
    return h_multiply(nums, target)


def solve_exhaustive(
    nums: tuple[int, ...],
    target: int,
    require_all_used: bool = False,
) -> tuple[int, list[tuple[int, int, str, int]] | None]:
    """Count all goal-reaching op sequences and return the first one found.

    The tree is walked depth-first in canonical enumeration order.  A branch
    ends (and counts) when an operation's result equals the target; with
    ``require_all_used`` the hit must also leave a single number, and
    early hits keep being explored since the produced value may still be
    consumed.
    """
    count = 0
    first: list[tuple[int, int, str, int]] | None = None
    path: list[tuple[int, int, str, int]] = []

    def rec(state: tuple[int, ...]) -> None:
        nonlocal count, first
        for op in enum_ops(state):
            lhs, rhs, _, result = op
            child = child_state(state, lhs, rhs, result)
            if result == target and (not require_all_used or len(child) == 1):
                count += 1
                if first is None:
                    first = path + [op]
                continue
            if len(child) >= 2:
                path.append(op)
                rec(child)
                path.pop()

    rec(tuple(nums))
    return count, first


def solvable(nums: tuple[int, ...], target: int, require_all_used: bool = False) -> bool:
    """Whether any op sequence reaches the target (early-exit search)."""

    def rec(state: tuple[int, ...]) -> bool:
        for lhs, rhs, _, result in enum_ops(state):
            child = child_state(state, lhs, rhs, result)
            if result == target and (not require_all_used or len(child) == 1):
                return True
            if len(child) >= 2 and rec(child):
                return True
        return False

    return rec(tuple(nums))


def shortest_path(
    nums: tuple[int, ...],
    target: int,
    require_all_used: bool = False,
) -> list[tuple[int, int, str, int]] | None:
    """Shortest goal-reaching op sequence; ties broken by enumeration order.

    Iterative deepening: all depth-1 sequences are tried before any depth-2
    sequence, and within a depth sequences are ordered lexicographically by
    canonical enumeration order.
    """
    state = tuple(nums)

    def rec(state: tuple[int, ...], depth: int, path: list) -> list | None:
        for op in enum_ops(state):
            lhs, rhs, _, result = op
            child = child_state(state, lhs, rhs, result)
            if depth == 1:
                if result == target and (not require_all_used or len(child) == 1):
                    return path + [op]
                continue
            if result == target and not require_all_used:
                continue  # deeper hits on this branch would pass through a goal
            if len(child) >= 2:
                found = rec(child, depth - 1, path + [op])
                if found is not None:
                    return found
        return None

    for depth in range(1, len(state)):
        found = rec(state, depth, [])
        if found is not None:
            return found
    return None


def dfs_solves(
    nums: tuple[int, ...],
    target: int,
    heuristic: int,
    threshold: int,
    keep_le: bool,
    prune: bool = True,
    require_all_used: bool = False,
) -> bool:
    """No-trace mirror of the depth-first trace strategy: same pruning and
    kept-child goal semantics, answering only found-or-not.

    Only children that survive the prune filter are goal-checked; a
    goal-producing op whose child scores past the threshold is missed,
    exactly as in the trace."""

    def rec(state: tuple[int, ...]) -> bool:
        if len(state) < 2:
            return False
        kept = []
        for lhs, rhs, _, result in enum_ops(state):
            child = child_state(state, lhs, rhs, result)
            if prune:
                h = _heuristic(heuristic, child, target)
                if keep_le:
                    if h > threshold:
                        continue
                elif h <= threshold:
                    continue
            if result == target and (not require_all_used or len(child) == 1):
                return True
            kept.append(child)
        for child in kept:
            if rec(child):
                return True
        return False

    return rec(tuple(nums))


def bfs_solves(
    nums: tuple[int, ...],
    target: int,
    heuristic: int,
    breadth: int,
    select_min: bool = True,
    require_all_used: bool = False,
) -> bool:
    """No-trace mirror of the breadth-first trace strategy: per expansion the
    ``breadth`` best children by heuristic survive (stable ties) and only
    those survivors are goal-checked."""
    frontier = [tuple(nums)]
    while frontier:
        next_frontier = []
        for state in frontier:
            if len(state) < 2:
                continue
            scored = []
            for lhs, rhs, _, result in enum_ops(state):
                child = child_state(state, lhs, rhs, result)
                scored.append((_heuristic(heuristic, child, target), child, result))
            scored.sort(key=lambda t: t[0], reverse=not select_min)
            for _, child, result in scored[:breadth]:
                if result == target and (not require_all_used or len(child) == 1):
                    return True
                next_frontier.append(child)
        frontier = next_frontier
    return False
