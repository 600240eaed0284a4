"""Exhaustive solver results, optimal paths, rendered solution traces,
and the per-strategy difficulty mask."""

from __future__ import annotations

import random

from searchtrace.domain import Problem, replay_ops
from searchtrace.oracle import (
    classify_difficulty,
    is_difficult,
    is_solvable,
    optimal_path,
    oracle_trajectory,
    solution_trajectory,
    solve_exhaustive,
)
from searchtrace.strategies import all_strategies, strategy_solves
from searchtrace.tracelang import parse, serialize

FIGURE = Problem(18, (74, 24, 36, 44))


def test_figure_problem_counts() -> None:
    res = solve_exhaustive(FIGURE)
    assert res.solvable
    assert res.solution_count > 0
    assert [str(op) for op in res.one_path] == ["74+24=98", "36+44=80", "98-80=18"]


def test_unsolvable_problem() -> None:
    res = solve_exhaustive(Problem(10, (1, 1, 1, 1)))
    assert not res.solvable
    assert res.solution_count == 0
    assert res.one_path is None
    assert not is_solvable(Problem(10, (1, 1, 1, 1)))


def test_optimal_path_prefers_short() -> None:
    path = optimal_path(Problem(18, (9, 9, 2, 1)))
    assert [str(op) for op in path] == ["9+9=18"]
    assert optimal_path(Problem(10, (1, 1, 1, 1))) is None


def test_optimal_path_figure_matches_first_found() -> None:
    # no shorter solution exists for the reference problem, and depth-first
    # order makes the 3-op optimum identical to the first exhaustive hit
    path = optimal_path(FIGURE)
    assert [str(op) for op in path] == ["74+24=98", "36+44=80", "98-80=18"]


def test_solution_trajectory_matches_reference(solution_trace_text: str) -> None:
    traj = solution_trajectory(FIGURE, optimal_path(FIGURE))
    assert serialize(traj) == solution_trace_text


def test_oracle_trajectory_round_trips() -> None:
    rng = random.Random(5)
    produced = 0
    for _ in range(60):
        problem = Problem(rng.randint(10, 100), tuple(rng.randint(1, 50) for _ in range(4)))
        traj = oracle_trajectory(problem)
        if traj is None:
            assert not is_solvable(problem)
            continue
        produced += 1
        text = serialize(traj)
        reparsed, violations = parse(text)
        assert violations == []
        assert serialize(reparsed) == text
    assert produced > 20


def test_solution_trajectory_replays() -> None:
    path = optimal_path(FIGURE)
    assert replay_ops(FIGURE.inputs, path) == (18,)


def test_all_used_variant() -> None:
    # 9+9=18 leaves 2 and 1 unused, so the all-used variant needs more ops
    problem = Problem(18, (9, 9, 2, 1))
    res = solve_exhaustive(problem, require_all_used=True)
    assert res.solvable
    assert len(res.one_path) == 3
    assert replay_ops(problem.inputs, res.one_path) == (18,)


def test_difficulty_mask_matches_per_strategy_runs() -> None:
    rng = random.Random(13)
    for _ in range(40):
        problem = Problem(rng.randint(10, 100), tuple(rng.randint(1, 50) for _ in range(4)))
        mask = classify_difficulty(problem)
        for bit, cfg in enumerate(all_strategies()):
            assert bool(mask & (1 << bit)) == strategy_solves(cfg, problem)


def test_is_difficult() -> None:
    rng = random.Random(17)
    found_easy = False
    for _ in range(40):
        problem = Problem(rng.randint(10, 100), tuple(rng.randint(1, 50) for _ in range(4)))
        difficult = is_difficult(problem)
        if difficult:
            assert is_solvable(problem)
            assert classify_difficulty(problem) == 0
        else:
            found_easy = True
    assert found_easy
