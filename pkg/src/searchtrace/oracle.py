"""Exhaustive ground truth: solvability, solution paths, difficulty.

The solver walks every op sequence in canonical enumeration order.  A
sequence counts as a solution when its final operation produces the target;
a target that merely sits among the inputs does not count by itself.  The
optimal path is the shortest solution, ties broken by enumeration order.
Difficulty classification runs the twelve strategies (no-trace kernel path)
against the solver's verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._kernel import backend as _k
from .domain import ArithmeticOp, Problem
from .strategies import all_strategies, strategy_solves
from .tracelang import (
    CurrentState,
    Event,
    ExploreOp,
    GeneratedNodeSeq,
    GoalReached,
    TraceFormat,
    Trajectory,
)


@dataclass(frozen=True, slots=True)
class SolveResult:
    """Solver verdict for one problem.

    ``one_path`` is the first solution in canonical enumeration order (depth
    -first), present iff solvable; ``solution_count`` counts every distinct
    goal-reaching op sequence."""

    solvable: bool
    solution_count: int
    one_path: tuple[ArithmeticOp, ...] | None


def _to_ops(path) -> tuple[ArithmeticOp, ...]:
    return tuple(ArithmeticOp(lhs, rhs, op, result) for lhs, rhs, op, result in path)


def solve_exhaustive(problem: Problem, require_all_used: bool = False) -> SolveResult:
    """Count all solutions and return the first one found."""
    count, first = _k.solve_exhaustive(problem.inputs, problem.target, require_all_used)
    return SolveResult(count > 0, count, _to_ops(first) if first else None)


def is_solvable(problem: Problem, require_all_used: bool = False) -> bool:
    """Early-exit solvability check."""
    return _k.solvable(problem.inputs, problem.target, require_all_used)


def optimal_path(problem: Problem, require_all_used: bool = False) -> tuple[ArithmeticOp, ...] | None:
    """Shortest solution path, ties broken by enumeration order."""
    path = _k.shortest_path(problem.inputs, problem.target, require_all_used)
    return _to_ops(path) if path else None


def solution_trajectory(problem: Problem, path: tuple[ArithmeticOp, ...]) -> Trajectory:
    """Serialize a solution path in the solution-only trace format.

    Every non-final op explores, generates the next node (numbered from #2,
    the root being #1 implicitly), and states it; the final op explores and
    reaches the goal."""
    if not path:
        raise ValueError("a solution path needs at least one op")
    events: list[Event] = []
    remaining = problem.inputs
    history: tuple[ArithmeticOp, ...] = ()
    for i, op in enumerate(path):
        events.append(CurrentState(problem.target, remaining, history))
        child = _k.child_state(remaining, op.lhs, op.rhs, op.result)
        events.append(ExploreOp(op, child))
        if i == len(path) - 1:
            if op.result != problem.target:
                raise ValueError(f"path does not end at the target: {op}")
            events.append(GoalReached(problem.target, problem.target))
        else:
            events.append(GeneratedNodeSeq(i + 2, child, op))
            remaining = child
            history = history + (op,)
    return Trajectory(problem, TraceFormat.OP, tuple(events))


def oracle_trajectory(problem: Problem, require_all_used: bool = False) -> Trajectory | None:
    """Optimal-path trace for a solvable problem, None otherwise."""
    path = optimal_path(problem, require_all_used)
    if path is None:
        return None
    return solution_trajectory(problem, path)


def classify_difficulty(problem: Problem) -> int:
    """Bitmask of which canonical strategies solve the problem.

    Bit i corresponds to ``all_strategies()[i]`` (dfs-sum, dfs-multiply,
    then bfs-1..5 as sum/multiply pairs), run with default knobs and no
    budget."""
    mask = 0
    for i, cfg in enumerate(all_strategies()):
        if strategy_solves(cfg, problem):
            mask |= 1 << i
    return mask


def is_difficult(problem: Problem) -> bool:
    """Solvable, yet beyond every one of the twelve strategies."""
    return classify_difficulty(problem) == 0 and is_solvable(problem)
