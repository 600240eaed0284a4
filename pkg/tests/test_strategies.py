"""Strategy behavior: the canonical twelve, trace shapes, budgets,
soundness, and agreement between traced and no-trace runs."""

from __future__ import annotations

import random

import pytest

from searchtrace.domain import Problem, replay_ops
from searchtrace.strategies import (
    HeuristicKind,
    PruneDirection,
    SearchKind,
    SelectDirection,
    StrategyConfig,
    all_strategies,
    bfs_stream,
    dfs_stream,
    h_multiply,
    h_sum,
    run_strategy,
    strategy_by_name,
    strategy_solves,
    unpruned,
)
from searchtrace.tracelang import (
    CurrentState,
    GeneratedNode,
    GoalReached,
    MoveToNode,
    NoSolution,
    parse,
    serialize,
)

FIGURE = Problem(18, (74, 24, 36, 44))
UNSOLVABLE = Problem(10, (1, 1, 1, 1))


def random_problem(rng: random.Random) -> Problem:
    return Problem(rng.randint(10, 100), tuple(rng.randint(1, 50) for _ in range(4)))


def test_twelve_canonical_strategies() -> None:
    names = [cfg.name for cfg in all_strategies()]
    assert len(names) == 12
    assert names[0] == "dfs-sum"
    assert names[1] == "dfs-multiply"
    assert "bfs-3-multiply" in names
    assert names[-1] == "bfs-5-multiply"
    assert len(set(names)) == 12
    for name in names:
        assert strategy_by_name(name).name == name


def test_config_validation() -> None:
    with pytest.raises(ValueError):
        StrategyConfig(SearchKind.BFS, HeuristicKind.SUM)  # breadth missing
    with pytest.raises(ValueError):
        StrategyConfig(SearchKind.DFS, HeuristicKind.SUM, breadth_limit=3)
    with pytest.raises(ValueError):
        StrategyConfig(SearchKind.BFS, HeuristicKind.SUM, breadth_limit=2, threshold=4)
    with pytest.raises(KeyError):
        strategy_by_name("bfs-6-sum")


def test_heuristic_values() -> None:
    assert h_sum((24, 36, 30), 18) == 72
    assert h_multiply((30, 12), 18) == 24
    assert h_multiply((2,), 17) == 1


def test_bfs5_reproduces_reference_shape() -> None:
    """Breadth-5 run on the reference problem: five children generated at the
    root, then a move to #0,0, eventually the goal."""
    cfg = strategy_by_name("bfs-5-sum")
    traj = bfs_stream(FIGURE, cfg)
    root_children = [e for e in traj.events if isinstance(e, GeneratedNode) and len(e.label) == 2]
    assert [e.label for e in root_children[:5]] == [(0, i) for i in range(5)]
    assert traj.events[11] == MoveToNode((0, 0))
    assert isinstance(traj.events[-1], GoalReached)
    # the best root child by the sum heuristic is 74-44=30
    assert str(root_children[0].op) == "74-44=30"


def test_every_expansion_respects_breadth() -> None:
    for b in (1, 2, 3):
        cfg = strategy_by_name(f"bfs-{b}-sum")
        traj = bfs_stream(FIGURE, cfg)
        by_parent: dict[tuple[int, ...], int] = {}
        for e in traj.events:
            if isinstance(e, GeneratedNode):
                parent = e.label[:-1]
                by_parent[parent] = by_parent.get(parent, 0) + 1
                assert e.label[-1] < b
        assert all(count <= b for count in by_parent.values())


def test_unsolvable_ends_with_sentinel() -> None:
    for cfg in all_strategies():
        traj = run_strategy(cfg, UNSOLVABLE)
        assert isinstance(traj.events[-1], NoSolution)
        assert not any(isinstance(e, GoalReached) for e in traj.events)


def test_goal_line_is_terminal_and_exact() -> None:
    traj = run_strategy(strategy_by_name("bfs-5-sum"), FIGURE)
    assert serialize(traj).endswith("18,18 equal: Goal Reached")


def test_budget_zero_trace() -> None:
    for name in ("dfs-sum", "bfs-3-multiply"):
        traj = run_strategy(strategy_by_name(name), FIGURE, node_budget=0)
        assert len(traj.events) == 2
        assert isinstance(traj.events[0], CurrentState)
        assert isinstance(traj.events[1], NoSolution)


@pytest.mark.parametrize("budget", [1, 3, 7])
def test_budget_caps_generated_nodes(budget: int) -> None:
    for name in ("dfs-multiply", "bfs-4-sum"):
        traj = run_strategy(strategy_by_name(name), UNSOLVABLE, node_budget=budget)
        generated = sum(1 for e in traj.events if isinstance(e, GeneratedNode))
        assert generated <= budget
        assert isinstance(traj.events[-1], NoSolution)


def test_traces_are_deterministic() -> None:
    for cfg in all_strategies():
        a = run_strategy(cfg, FIGURE)
        b = run_strategy(cfg, FIGURE)
        assert serialize(a) == serialize(b)


def test_traces_parse_clean_and_round_trip() -> None:
    rng = random.Random(7)
    for _ in range(25):
        problem = random_problem(rng)
        cfg = rng.choice(all_strategies())
        traj = run_strategy(cfg, problem)
        text = serialize(traj)
        reparsed, violations = parse(text)
        assert violations == []
        assert serialize(reparsed) == text
        assert reparsed.events == traj.events


def test_goal_claims_replay_to_target() -> None:
    """Soundness: whenever a strategy claims the goal, the extracted path
    replays from the inputs to the target."""
    from searchtrace.tracelang import extract_solution_path

    rng = random.Random(11)
    checked = 0
    for _ in range(120):
        problem = random_problem(rng)
        cfg = rng.choice(all_strategies())
        traj = run_strategy(cfg, problem)
        if isinstance(traj.events[-1], GoalReached):
            path = extract_solution_path(traj)
            final = replay_ops(problem.inputs, path)
            assert path[-1].result == problem.target
            assert problem.target in final
            checked += 1
    assert checked > 10  # the sample must actually exercise solved cases


def test_sim_agrees_with_trace() -> None:
    rng = random.Random(23)
    for _ in range(150):
        problem = random_problem(rng)
        cfg = rng.choice(all_strategies())
        traj = run_strategy(cfg, problem)
        assert strategy_solves(cfg, problem) == isinstance(traj.events[-1], GoalReached)


def test_unpruned_dfs_is_complete() -> None:
    from searchtrace.oracle import is_solvable

    rng = random.Random(31)
    cfg = unpruned(strategy_by_name("dfs-sum"))
    for _ in range(60):
        problem = random_problem(rng)
        traj = dfs_stream(problem, cfg)
        assert isinstance(traj.events[-1], GoalReached) == is_solvable(problem)


def test_prune_and_select_direction_literals() -> None:
    keep_gt = StrategyConfig(
        SearchKind.DFS, HeuristicKind.SUM, prune_direction=PruneDirection.KEEP_GT
    )
    assert keep_gt.name == "dfs-sum:gt"
    select_max = StrategyConfig(
        SearchKind.BFS, HeuristicKind.SUM, breadth_limit=2, select_direction=SelectDirection.MAX
    )
    assert select_max.name == "bfs-2-sum:max"
    # both still produce grammatical traces
    for cfg in (keep_gt, select_max):
        traj = run_strategy(cfg, FIGURE)
        _, violations = parse(serialize(traj))
        assert violations == []


def test_unpruned_name_and_guard() -> None:
    assert unpruned(strategy_by_name("dfs-sum")).name == "dfs-sum:noprune"
    with pytest.raises(ValueError):
        unpruned(strategy_by_name("bfs-1-sum"))


def test_move_lines_precede_every_nonroot_state() -> None:
    traj = run_strategy(strategy_by_name("bfs-2-multiply"), FIGURE)
    events = traj.events
    for i, e in enumerate(events):
        if isinstance(e, CurrentState) and i > 0:
            assert isinstance(events[i - 1], MoveToNode)
