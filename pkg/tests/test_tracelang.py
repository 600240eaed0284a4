"""Trace grammar: serialization, parsing, round-trips, extraction.

The reference trace texts live in tests/data and were transcribed verbatim;
derived counts (30 generated nodes in the search trace, 9 events / 2
generated nodes / 4 unique states in the solution trace) were frozen by
counting lines in those files.
"""

from __future__ import annotations

import pytest

from searchtrace.domain import ArithmeticOp, Problem
from searchtrace.tracelang import (
    BrokenAncestry,
    CurrentState,
    ExploreOp,
    FormatViolation,
    GeneratedNode,
    GeneratedNodeSeq,
    GoalReached,
    MoveToNode,
    NoSolution,
    TraceFormat,
    TraceSyntaxError,
    Trajectory,
    extract_solution_path,
    extract_states,
    parse,
    parse_line,
    render_event,
    serialize,
)


def test_render_reference_lines() -> None:
    op = ArithmeticOp.make(74, 24, "+")
    assert (
        render_event(CurrentState(18, (74, 24, 36, 44), ()))
        == "Current State: 18:[74, 24, 36, 44], Operations: []"
    )
    assert (
        render_event(CurrentState(18, (36, 44, 98), (op,)))
        == "Current State: 18:[36, 44, 98], Operations: ['74+24=98']"
    )
    assert (
        render_event(ExploreOp(op, (36, 44, 98)))
        == "Exploring Operation: 74+24=98, Resulting Numbers: [36, 44, 98]"
    )
    assert (
        render_event(GeneratedNode((0, 2), 18, (44, 98, 50), op))
        == "Generated Node #0,2: 18:[44, 98, 50] Operation: 74+24=98"
    )
    assert (
        render_event(GeneratedNodeSeq(2, (36, 44, 98), op))
        == "Generated Node #2: [36, 44, 98] from Operation: 74+24=98"
    )
    assert render_event(MoveToNode((0, 2))) == "Moving to Node #0,2"
    assert render_event(GoalReached(18, 18)) == "18,18 equal: Goal Reached"
    assert render_event(NoSolution()) == "No Solution Found"


def test_parse_line_inverts_render() -> None:
    op = ArithmeticOp.make(98, 80, "-")
    events = [
        CurrentState(18, (98, 80), (ArithmeticOp.make(74, 24, "+"),)),
        ExploreOp(op, (18,)),
        GeneratedNode((0, 1, 4), 18, (18,), op),
        GeneratedNodeSeq(3, (18,), op),
        MoveToNode((0,)),
        GoalReached(18, 18),
        NoSolution(),
    ]
    for event in events:
        assert parse_line(render_event(event)) == event


@pytest.mark.parametrize(
    "line",
    [
        "Current State: 18:[74, 24, 36, 44] Operations: []",  # missing comma
        "Current State: 18:[74,24], Operations: []",  # missing space
        "Exploring Operation: 74&24=98, Resulting Numbers: [98]",
        "Generated Node #0,2 18:[44] Operation: 74+24=98",  # missing colon
        "Moving to Node 0,2",
        "18,18 equal: goal reached",
        "",
        "Current State: 18:[74, 24], Operations: [74+24=98]",  # unquoted history
    ],
)
def test_malformed_lines_rejected(line: str) -> None:
    assert parse_line(line) is None


def test_round_trip_solution_figure(solution_trace_text: str) -> None:
    traj, violations = parse(solution_trace_text)
    assert violations == []
    assert traj.fmt is TraceFormat.OP
    assert traj.problem == Problem(18, (74, 24, 36, 44))
    assert serialize(traj) == solution_trace_text
    reparsed, _ = parse(serialize(traj))
    assert reparsed == traj


def test_round_trip_search_figure(search_trace_text: str) -> None:
    traj, violations = parse(search_trace_text)
    assert violations == []
    assert traj.fmt is TraceFormat.SOS
    assert serialize(traj) == search_trace_text
    generated = [e for e in traj.events if isinstance(e, GeneratedNode)]
    assert len(generated) == 30
    assert generated[0].label == (0, 0)
    assert generated[-1].label == (0, 3, 4)


def test_solution_figure_shape(solution_trace_text: str) -> None:
    traj, _ = parse(solution_trace_text)
    assert len(traj.events) == 9  # 3 events per op for a 3-op path
    seqs = [e.seq for e in traj.events if isinstance(e, GeneratedNodeSeq)]
    assert seqs == [2, 3]  # numbering starts at 2, the root being #1


def test_extract_solution_path_solution_figure(solution_trace_text: str) -> None:
    traj, _ = parse(solution_trace_text)
    path = extract_solution_path(traj)
    assert [str(op) for op in path] == ["74+24=98", "36+44=80", "98-80=18"]


def test_extract_solution_path_search_figure(search_trace_text: str) -> None:
    traj, _ = parse(search_trace_text)
    path = extract_solution_path(traj)
    assert [str(op) for op in path] == ["74-44=30", "36-24=12", "30-12=18"]


def test_extract_states_search_figure(search_trace_text: str) -> None:
    traj, _ = parse(search_trace_text)
    keys = extract_states(traj)
    assert keys[0] == "[24,36,44,74]"
    assert "[24,30,36]" in keys
    assert keys[-1] == "[18]"


def test_extract_states_solution_figure_unique_count(solution_trace_text: str) -> None:
    traj, _ = parse(solution_trace_text)
    keys = extract_states(traj)
    assert len(set(keys)) == 4  # inputs, two intermediates, the goal state


def test_extract_states_without_goal() -> None:
    text = "\n".join(
        [
            "Current State: 10:[1, 1, 1, 1], Operations: []",
            "No Solution Found",
        ]
    )
    traj, _ = parse(text)
    assert extract_states(traj) == ["[1,1,1,1]"]
    assert extract_solution_path(traj) is None


def test_strict_parse_raises_with_line_number() -> None:
    text = "\n".join(
        [
            "Current State: 18:[74, 24, 36, 44], Operations: []",
            "Exploring Operation: 74&24=98, Resulting Numbers: [36, 44, 98]",
        ]
    )
    with pytest.raises(TraceSyntaxError) as err:
        parse(text)
    assert err.value.line_no == 2


def test_lenient_parse_records_and_skips() -> None:
    text = "\n".join(
        [
            "Current State: 18:[74, 24, 36, 44], Operations: []",
            "Exploring Operation: 74&24=98, Resulting Numbers: [36, 44, 98]",
            "No Solution Found",
        ]
    )
    traj, violations = parse(text, strict=False)
    assert [v.line_no for v in violations] == [2]
    assert isinstance(violations[0], FormatViolation)
    assert len(traj.events) == 2
    assert isinstance(traj.events[-1], NoSolution)


def test_trailing_newline_tolerated(solution_trace_text: str) -> None:
    traj, violations = parse(solution_trace_text + "\n")
    assert violations == []
    assert serialize(traj) == solution_trace_text


def test_first_line_must_be_current_state() -> None:
    with pytest.raises(TraceSyntaxError):
        parse("Moving to Node #0,1")
    traj, violations = parse("Moving to Node #0,1", strict=False, problem=Problem(18, (1, 2, 3, 4)))
    assert len(violations) == 1
    assert traj.events == ()


def test_broken_ancestry_raises() -> None:
    # goal claimed from a node whose ancestor was never generated
    text = "\n".join(
        [
            "Current State: 18:[74, 24, 36, 44], Operations: []",
            "Exploring Operation: 74-44=30, Resulting Numbers: [24, 36, 30]",
            "Generated Node #0,0: 18:[24, 36, 30] Operation: 74-44=30",
            "Moving to Node #0,7",
            "Current State: 18:[24, 36, 30], Operations: ['74-44=30']",
            "Exploring Operation: 36-24=12, Resulting Numbers: [30, 12]",
            "18,18 equal: Goal Reached",
        ]
    )
    traj, violations = parse(text, strict=False)
    assert violations == []  # structurally fine, semantically broken
    with pytest.raises(BrokenAncestry):
        extract_solution_path(traj)


def test_goal_without_preceding_explore_is_broken() -> None:
    text = "\n".join(
        [
            "Current State: 18:[18, 24, 36, 44], Operations: []",
            "18,18 equal: Goal Reached",
        ]
    )
    traj, _ = parse(text, strict=False)
    with pytest.raises(BrokenAncestry):
        extract_solution_path(traj)


def test_serialize_has_no_trailing_newline(solution_trace_text: str) -> None:
    traj, _ = parse(solution_trace_text)
    assert not serialize(traj).endswith("\n")


def test_trajectory_equality_is_structural(solution_trace_text: str) -> None:
    a, _ = parse(solution_trace_text)
    b, _ = parse(solution_trace_text)
    assert a == b and a is not b
    assert isinstance(a, Trajectory)
