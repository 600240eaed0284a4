"""Semantic validation of trajectories, the four-way error taxonomy, and
batch statistics.

A trajectory is judged line by line against the problem and against its own
claims. Each line contributes to at most one error category, with precedence
formatting > arithmetic > other > exploration:

* formatting: the line does not parse;
* arithmetic: a stated operation is wrong or illegal (bad result, negative
  subtraction, inexact or zero division, operands not available);
* other: a stated number set disagrees with what the parent state and the
  stated operation imply;
* exploration: a move or generated node references a node that was never
  generated, or a node sequence jumps its numbering.

Generated nodes register their *stated* numbers, so a single corrupted line
is judged once and later lines are checked against the trace's own claims
rather than cascading into more errors.

Correctness is stricter than the presence of a goal line: the goal's
ancestry must replay from the true inputs to the target with valid
arithmetic.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from math import sqrt
from typing import Sequence

from ._kernel import backend as _k
from .domain import ArithmeticOp, OperationError, Problem, replay_ops
from .metrics import states_explored
from .tracelang import (
    BrokenAncestry,
    CurrentState,
    ExploreOp,
    GeneratedNode,
    GeneratedNodeSeq,
    GoalReached,
    MoveToNode,
    extract_solution_path,
    extract_states,
    parse,
)

CATEGORIES = ("formatting", "arithmetic", "other", "exploration")


class EmptyBatch(ValueError):
    """batch_report needs at least one report."""


@dataclass(frozen=True)
class ErrorCounts:
    formatting: int = 0
    arithmetic: int = 0
    other: int = 0
    exploration: int = 0

    def __post_init__(self) -> None:
        for name in CATEGORIES:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} count is negative")

    def total(self) -> int:
        return self.formatting + self.arithmetic + self.other + self.exploration

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in CATEGORIES}


@dataclass(frozen=True)
class ValidationReport:
    correct: bool
    errors: ErrorCounts
    states_visited: tuple[str, ...]
    solution_path: tuple[ArithmeticOp, ...] | None
    states_explored: int

    def as_dict(self) -> dict:
        return {
            "correct": self.correct,
            "errors": self.errors.as_dict(),
            "states_visited": list(self.states_visited),
            "solution_path": [str(op) for op in self.solution_path]
            if self.solution_path is not None
            else None,
            "states_explored": self.states_explored,
        }


def _op_valid(op: ArithmeticOp) -> bool:
    try:
        return ArithmeticOp.make(op.lhs, op.rhs, op.op).result == op.result
    except OperationError:
        return False


def _operands_available(state: Sequence[int], op: ArithmeticOp) -> bool:
    pool = list(state)
    for value in (op.lhs, op.rhs):
        if value in pool:
            pool.remove(value)
        else:
            return False
    return True


def _same_numbers(a: Sequence[int], b: Sequence[int]) -> bool:
    return sorted(a) == sorted(b)


def _child_of(state: Sequence[int], op: ArithmeticOp) -> tuple[int, ...]:
    return _k.child_state(tuple(state), op.lhs, op.rhs, op.result)


def validate(text: str, problem: Problem) -> ValidationReport:
    """Judge one trajectory against a problem; never raises."""
    traj, violations = parse(text, strict=False, problem=problem)
    counts = dict.fromkeys(CATEGORIES, 0)
    counts["formatting"] = len(violations)

    states: dict[tuple[int, ...], tuple[int, ...]] = {(0,): problem.inputs}
    current: tuple[int, ...] | None = None
    pending_move: tuple[int, ...] | None = None
    last_seq_state: tuple[int, ...] | None = None
    expected_seq = 2
    first = True

    for ev in traj.events:
        if isinstance(ev, CurrentState):
            stated = ev.remaining
            if first:
                # the problem, not the trace, owns the root: a mis-stated
                # opening line is one error, and the walk continues from the
                # real inputs so the ops after it are judged fairly
                first = False
                if ev.target != problem.target or not _same_numbers(stated, problem.inputs):
                    counts["other"] += 1
                if _same_numbers(stated, problem.inputs):
                    states[(0,)] = stated
                else:
                    stated = problem.inputs
            elif pending_move is not None:
                known = states.get(pending_move)
                wrong_value = ev.target != problem.target
                if known is not None and not _same_numbers(stated, known):
                    wrong_value = True
                if wrong_value:
                    counts["other"] += 1
                states[pending_move] = stated
            elif last_seq_state is not None:
                # solution traces restate the node they just generated
                if ev.target != problem.target or not _same_numbers(stated, last_seq_state):
                    counts["other"] += 1
            else:
                counts["exploration"] += 1
            current = stated
            pending_move = None
            last_seq_state = None
            continue

        if isinstance(ev, MoveToNode):
            if ev.label not in states:
                counts["exploration"] += 1
                current = None
            else:
                current = states[ev.label]
            pending_move = ev.label
            continue

        if isinstance(ev, ExploreOp):
            op = ev.op
            if not _op_valid(op) or (
                current is not None and not _operands_available(current, op)
            ):
                counts["arithmetic"] += 1
            elif current is not None and not _same_numbers(
                ev.resulting, _child_of(current, op)
            ):
                counts["other"] += 1
            continue

        if isinstance(ev, GeneratedNode):
            parent = ev.label[:-1]
            parent_state = states.get(parent)
            op = ev.op
            if not _op_valid(op) or (
                parent_state is not None and not _operands_available(parent_state, op)
            ):
                counts["arithmetic"] += 1
            elif ev.target != problem.target or (
                parent_state is not None
                and not _same_numbers(ev.remaining, _child_of(parent_state, op))
            ):
                counts["other"] += 1
            elif parent not in states:
                counts["exploration"] += 1
            states[ev.label] = ev.remaining
            continue

        if isinstance(ev, GeneratedNodeSeq):
            op = ev.op
            if not _op_valid(op) or (
                current is not None and not _operands_available(current, op)
            ):
                counts["arithmetic"] += 1
            elif current is not None and not _same_numbers(
                ev.remaining, _child_of(current, op)
            ):
                counts["other"] += 1
            elif ev.seq != expected_seq:
                counts["exploration"] += 1
            expected_seq = ev.seq + 1  # resync so one bad number counts once
            current = ev.remaining
            last_seq_state = ev.remaining
            continue

        if isinstance(ev, GoalReached):
            if ev.value != problem.target or ev.target != problem.target:
                counts["arithmetic"] += 1

    correct = False
    solution_path: tuple[ArithmeticOp, ...] | None = None
    if any(isinstance(e, GoalReached) for e in traj.events):
        try:
            path = extract_solution_path(traj)
        except BrokenAncestry:
            path = None
        if path:
            path = tuple(path)
            try:
                final = replay_ops(problem.inputs, path)
            except OperationError:
                final = None
            if (
                final is not None
                and path[-1].result == problem.target
                and problem.target in final
            ):
                correct = True
                solution_path = path

    return ValidationReport(
        correct=correct,
        errors=ErrorCounts(**counts),
        states_visited=tuple(extract_states(traj)),
        solution_path=solution_path,
        states_explored=states_explored(traj),
    )


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """95% score interval for a binomial proportion (z=1.96 default)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= successes <= n:
        raise ValueError("successes outside [0, n]")
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


def _mean_ci(values: Sequence[float], z: float = 1.96) -> tuple[float, float, float, bool]:
    """(mean, lo, hi, degenerate); width collapses to zero for one value."""
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return (mean, mean, mean, True)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half = z * sqrt(var / n)
    return (mean, mean - half, mean + half, False)


@dataclass(frozen=True)
class BatchSummary:
    n: int
    accuracy: float
    accuracy_ci: tuple[float, float]
    error_means: dict[str, tuple[float, float, float]]
    mean_states_explored_correct: float | None
    states_explored_ci: tuple[float, float] | None
    degenerate: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "accuracy_ci": list(self.accuracy_ci),
            "error_means": {k: list(v) for k, v in self.error_means.items()},
            "mean_states_explored_correct": self.mean_states_explored_correct,
            "states_explored_ci": list(self.states_explored_ci)
            if self.states_explored_ci is not None
            else None,
            "degenerate": self.degenerate,
        }


def batch_report(reports: Sequence[ValidationReport]) -> BatchSummary:
    """Accuracy with a Wilson 95% CI, per-category mean errors per trajectory
    with normal 95% CIs, and mean states explored among correct runs."""
    if not reports:
        raise EmptyBatch("no reports to summarize")
    n = len(reports)
    n_correct = sum(1 for r in reports if r.correct)
    degenerate = n == 1

    error_means = {}
    for name in CATEGORIES:
        mean, lo, hi, dg = _mean_ci([getattr(r.errors, name) for r in reports])
        error_means[name] = (mean, lo, hi)
        degenerate = degenerate or dg

    explored = [float(r.states_explored) for r in reports if r.correct]
    if explored:
        mean, lo, hi, dg = _mean_ci(explored)
        explored_mean, explored_ci = mean, (lo, hi)
        degenerate = degenerate or dg
    else:
        explored_mean, explored_ci = None, None

    return BatchSummary(
        n=n,
        accuracy=n_correct / n,
        accuracy_ci=wilson_interval(n_correct, n),
        error_means=error_means,
        mean_states_explored_correct=explored_mean,
        states_explored_ci=explored_ci,
        degenerate=degenerate,
    )


# --- seeded corruption harness -------------------------------------------
# One deliberate defect per call, crafted to land in exactly one category;
# used by the taxonomy tests and benchmarks.

CORRUPTION_KINDS = CATEGORIES

_RE_EXPLORE_OP = re.compile(r"^(Exploring Operation: \d+[+\-*/]\d+=)(\d+)(,.*)$")
_RE_NODE_NUMBERS = re.compile(r"^(Generated Node #[\d,]+: (?:\d+:)?\[)(\d+)(.*)$")


def _line_indices(lines: list[str], pattern: str) -> list[int]:
    return [i for i, line in enumerate(lines) if line.startswith(pattern)]


def corrupt_formatting(text: str, rng: random.Random) -> str:
    """Make one exploration line unparseable."""
    lines = text.split("\n")
    sites = _line_indices(lines, "Exploring Operation: ")
    if not sites:
        raise ValueError("no line to mangle")
    i = rng.choice(sites)
    lines[i] = lines[i].replace(": ", "; ", 1)
    return "\n".join(lines)


def corrupt_arithmetic(text: str, rng: random.Random) -> str:
    """Falsify the result of one stated operation."""
    lines = text.split("\n")
    sites = [i for i in _line_indices(lines, "Exploring Operation: ") if _RE_EXPLORE_OP.match(lines[i])]
    if not sites:
        raise ValueError("no operation to falsify")
    i = rng.choice(sites)
    m = _RE_EXPLORE_OP.match(lines[i])
    lines[i] = f"{m.group(1)}{int(m.group(2)) + 1}{m.group(3)}"
    return "\n".join(lines)


def corrupt_exploration(text: str, rng: random.Random) -> str:
    """Insert a move to a node that was never generated."""
    lines = text.split("\n")
    at = rng.randrange(1, len(lines) + 1)
    lines.insert(at, "Moving to Node #9,9")
    return "\n".join(lines)


def corrupt_other(text: str, rng: random.Random) -> str:
    """Skew one number in a generated node's stated set."""
    lines = text.split("\n")
    sites = [i for i in _line_indices(lines, "Generated Node #") if _RE_NODE_NUMBERS.match(lines[i])]
    if not sites:
        raise ValueError("no generated node to skew")
    i = rng.choice(sites)
    m = _RE_NODE_NUMBERS.match(lines[i])
    lines[i] = f"{m.group(1)}{int(m.group(2)) + 1}{m.group(3)}"
    return "\n".join(lines)


_CORRUPTORS = {
    "formatting": corrupt_formatting,
    "arithmetic": corrupt_arithmetic,
    "exploration": corrupt_exploration,
    "other": corrupt_other,
}


def corrupt(text: str, kind: str, rng: random.Random) -> str:
    """Apply one seeded corruption of the given kind; raises ValueError when
    the trace has no suitable site."""
    try:
        fn = _CORRUPTORS[kind]
    except KeyError:
        raise ValueError(f"unknown corruption kind {kind!r}") from None
    return fn(text, rng)
