"""The twelve streaming search strategies.

Depth-first and breadth-first traversals over the Countdown tree, guided by
one of two distance heuristics, emitting the trace grammar as they go:

* ``h_sum``: distance of the remaining-numbers sum from the target;
* ``h_multiply``: smallest distance of that sum from any divisor of the
  target.

DFS prunes children against a threshold (the target by default) and recurses
best-first; BFS keeps the ``b`` best children of each expansion (breadths 1
through 5) and pops FIFO within a depth.  Only kept children are ever
explored: the first explored operation whose result equals the target ends
the trace with the goal line, and a goal-producing operation that fails the
prune or breadth filter is simply missed.  That miss is what makes the
strategies incomplete.  The canonical strategy names are ``dfs-sum``,
``dfs-multiply``, and ``bfs-{b}-{sum|multiply}`` for b in 1..5.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from ._kernel import backend as _k
from .domain import ArithmeticOp, Problem
from .tracelang import (
    CurrentState,
    Event,
    ExploreOp,
    GeneratedNode,
    GoalReached,
    MoveToNode,
    NoSolution,
    TraceFormat,
    Trajectory,
)


class SearchKind(enum.Enum):
    DFS = "dfs"
    BFS = "bfs"


class HeuristicKind(enum.Enum):
    SUM = "sum"
    MULTIPLY = "multiply"


class PruneDirection(enum.Enum):
    """DFS keeps children whose heuristic is <= the threshold by default;
    KEEP_GT inverts the comparison."""

    KEEP_LE = "le"
    KEEP_GT = "gt"


class SelectDirection(enum.Enum):
    """BFS keeps the b smallest-heuristic children by default; MAX keeps
    the largest."""

    MIN = "min"
    MAX = "max"


def h_sum(remaining: tuple[int, ...], target: int) -> int:
    return _k.h_sum(remaining, target)


def h_multiply(remaining: tuple[int, ...], target: int) -> int:
    return _k.h_multiply(remaining, target)


@dataclass(frozen=True, slots=True)
class StrategyConfig:
    """One search strategy: traversal kind, heuristic, and its knobs.

    ``threshold`` (DFS only) defaults to the problem's target at run time;
    ``pruning=False`` disables the DFS filter entirely.  ``breadth_limit``
    applies to BFS only.
    """

    kind: SearchKind
    heuristic: HeuristicKind
    breadth_limit: int | None = None
    threshold: int | None = None
    pruning: bool = True
    prune_direction: PruneDirection = PruneDirection.KEEP_LE
    select_direction: SelectDirection = SelectDirection.MIN

    def __post_init__(self) -> None:
        if self.kind is SearchKind.BFS:
            if self.breadth_limit is None or self.breadth_limit < 1:
                raise ValueError("BFS needs breadth_limit >= 1")
            if self.threshold is not None:
                raise ValueError("threshold is a DFS knob")
        else:
            if self.breadth_limit is not None:
                raise ValueError("breadth_limit is a BFS knob")

    @property
    def name(self) -> str:
        """Stable name; canonical configs get the bare dfs-sum style names,
        non-default knobs are suffixed."""
        if self.kind is SearchKind.DFS:
            base = f"dfs-{self.heuristic.value}"
            if not self.pruning:
                base += ":noprune"
            elif self.prune_direction is PruneDirection.KEEP_GT:
                base += ":gt"
            if self.threshold is not None:
                base += f":t{self.threshold}"
            return base
        base = f"bfs-{self.breadth_limit}-{self.heuristic.value}"
        if self.select_direction is SelectDirection.MAX:
            base += ":max"
        return base

    def heuristic_fn(self):
        return h_sum if self.heuristic is HeuristicKind.SUM else h_multiply


def all_strategies() -> tuple[StrategyConfig, ...]:
    """The canonical twelve, in bitmask order: dfs-sum, dfs-multiply, then
    bfs-1..5 as (sum, multiply) pairs."""
    configs = [
        StrategyConfig(SearchKind.DFS, HeuristicKind.SUM),
        StrategyConfig(SearchKind.DFS, HeuristicKind.MULTIPLY),
    ]
    for b in range(1, 6):
        configs.append(StrategyConfig(SearchKind.BFS, HeuristicKind.SUM, breadth_limit=b))
        configs.append(StrategyConfig(SearchKind.BFS, HeuristicKind.MULTIPLY, breadth_limit=b))
    return tuple(configs)


def strategy_by_name(name: str) -> StrategyConfig:
    """Look up one of the twelve canonical strategies by its stable name."""
    for cfg in all_strategies():
        if cfg.name == name:
            return cfg
    raise KeyError(f"unknown strategy {name!r}")


class _BudgetExhausted(Exception):
    pass


class _Emitter:
    """Event buffer enforcing the generated-node budget."""

    def __init__(self, budget: int | None) -> None:
        self.events: list[Event] = []
        self.budget = budget
        self.generated = 0

    def emit(self, event: Event) -> None:
        self.events.append(event)

    def check_budget(self) -> None:
        if self.budget is not None and self.generated >= self.budget:
            raise _BudgetExhausted()

    def emit_generated(self, event: Event) -> None:
        self.check_budget()
        self.events.append(event)
        self.generated += 1


def _expand(
    remaining: tuple[int, ...],
    target: int,
    cfg: StrategyConfig,
) -> list[tuple[ArithmeticOp, tuple[int, ...]]]:
    """Kept children of one expansion, in emission order: heuristic-sorted
    with stable ties, threshold-filtered for DFS, capped at b for BFS."""
    h = cfg.heuristic_fn()
    scored: list[tuple[int, ArithmeticOp, tuple[int, ...]]] = []
    for lhs, rhs, op, result in _k.enum_ops(remaining):
        child = _k.child_state(remaining, lhs, rhs, result)
        scored.append((h(child, target), ArithmeticOp(lhs, rhs, op, result), child))
    if cfg.kind is SearchKind.DFS:
        if cfg.pruning:
            h_th = cfg.threshold if cfg.threshold is not None else target
            if cfg.prune_direction is PruneDirection.KEEP_LE:
                scored = [s for s in scored if s[0] <= h_th]
            else:
                scored = [s for s in scored if s[0] > h_th]
        scored.sort(key=lambda s: s[0])
        return [(aop, child) for _, aop, child in scored]
    scored.sort(key=lambda s: s[0], reverse=cfg.select_direction is SelectDirection.MAX)
    return [(aop, child) for _, aop, child in scored[: cfg.breadth_limit]]


def _is_goal(aop: ArithmeticOp, child: tuple[int, ...], target: int, require_all_used: bool) -> bool:
    return aop.result == target and (not require_all_used or len(child) == 1)


def dfs_stream(
    problem: Problem,
    cfg: StrategyConfig,
    node_budget: int | None = None,
    require_all_used: bool = False,
) -> Trajectory:
    """Depth-first search trace: visit a state, emit its kept children, then
    recurse into them best-first, moving between nodes explicitly."""
    target = problem.target
    em = _Emitter(node_budget)
    em.emit(CurrentState(target, problem.inputs, ()))

    def visit(remaining: tuple[int, ...], history: tuple[ArithmeticOp, ...], label: tuple[int, ...]) -> bool:
        if len(remaining) < 2:
            return False
        em.check_budget()
        labeled = []
        for idx, (aop, child) in enumerate(_expand(remaining, target, cfg)):
            em.check_budget()  # before the ExploreOp so truncation never dangles
            em.emit(ExploreOp(aop, child))
            if _is_goal(aop, child, target, require_all_used):
                em.emit(GoalReached(target, target))
                return True
            child_label = label + (idx,)
            em.emit_generated(GeneratedNode(child_label, target, child, aop))
            labeled.append((aop, child, child_label))
        for aop, child, child_label in labeled:
            em.emit(MoveToNode(child_label))
            em.emit(CurrentState(target, child, history + (aop,)))
            if visit(child, history + (aop,), child_label):
                return True
        return False

    try:
        found = visit(problem.inputs, (), (0,))
    except _BudgetExhausted:
        found = False
    if not found:
        em.emit(NoSolution())
    return Trajectory(problem, TraceFormat.SOS, tuple(em.events))


def bfs_stream(
    problem: Problem,
    cfg: StrategyConfig,
    node_budget: int | None = None,
    require_all_used: bool = False,
) -> Trajectory:
    """Breadth-first search trace: FIFO frontier, the b best children of
    each expansion survive and are visited in generation order."""
    target = problem.target
    em = _Emitter(node_budget)
    frontier: list[tuple[tuple[int, ...], tuple[ArithmeticOp, ...], tuple[int, ...]]] = [
        (problem.inputs, (), (0,))
    ]
    found = False
    try:
        head = 0
        while head < len(frontier):
            remaining, history, label = frontier[head]
            head += 1
            if label == (0,):
                em.emit(CurrentState(target, remaining, ()))
            else:
                em.emit(MoveToNode(label))
                em.emit(CurrentState(target, remaining, history))
            if len(remaining) < 2:
                continue
            em.check_budget()
            for idx, (aop, child) in enumerate(_expand(remaining, target, cfg)):
                em.check_budget()  # before the ExploreOp so truncation never dangles
                em.emit(ExploreOp(aop, child))
                if _is_goal(aop, child, target, require_all_used):
                    em.emit(GoalReached(target, target))
                    found = True
                    break
                child_label = label + (idx,)
                em.emit_generated(GeneratedNode(child_label, target, child, aop))
                frontier.append((child, history + (aop,), child_label))
            if found:
                break
    except _BudgetExhausted:
        pass
    if not found:
        em.emit(NoSolution())
    return Trajectory(problem, TraceFormat.SOS, tuple(em.events))


def run_strategy(
    cfg: StrategyConfig,
    problem: Problem,
    node_budget: int | None = None,
    require_all_used: bool = False,
) -> Trajectory:
    """Run a strategy on a problem; the trace always terminates with either
    a goal line or the no-solution sentinel (budget truncation included)."""
    if cfg.kind is SearchKind.DFS:
        return dfs_stream(problem, cfg, node_budget, require_all_used)
    return bfs_stream(problem, cfg, node_budget, require_all_used)


def strategy_solves(cfg: StrategyConfig, problem: Problem, require_all_used: bool = False) -> bool:
    """Found-or-not without building the trace (kernel fast path)."""
    if cfg.kind is SearchKind.DFS:
        if not cfg.pruning:
            # unpruned DFS visits everything the exhaustive solver does
            return _k.solvable(problem.inputs, problem.target, require_all_used)
        h_th = cfg.threshold if cfg.threshold is not None else problem.target
        return _k.dfs_solves(
            problem.inputs,
            problem.target,
            _heuristic_id(cfg.heuristic),
            h_th,
            cfg.prune_direction is PruneDirection.KEEP_LE,
            True,
            require_all_used,
        )
    return _k.bfs_solves(
        problem.inputs,
        problem.target,
        _heuristic_id(cfg.heuristic),
        cfg.breadth_limit,
        cfg.select_direction is SelectDirection.MIN,
        require_all_used,
    )


def _heuristic_id(kind: HeuristicKind) -> int:
    return _k.HEURISTIC_SUM if kind is HeuristicKind.SUM else _k.HEURISTIC_MULTIPLY


def unpruned(cfg: StrategyConfig) -> StrategyConfig:
    """The same DFS strategy with pruning disabled (completeness mode)."""
    if cfg.kind is not SearchKind.DFS:
        raise ValueError("pruning applies to DFS only")
    return replace(cfg, pruning=False)
