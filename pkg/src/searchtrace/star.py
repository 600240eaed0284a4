"""Correctness filtering for expert iteration, plus per-iteration stats.

The filter is the data half of the improvement loop: sample rollouts, keep
the ones that actually reach the goal, finetune on those, repeat.  Model
training itself lives outside this package; this module only decides what
survives into the next finetuning set.

A rollout survives when it validates as correct and carries no arithmetic,
exploration, or other errors.  Formatting violations alone do not disqualify
it: kept trajectories are re-serialized from their parsed events, which
normalizes whitespace and drops unreadable lines, so the surviving record is
always clean.  One rollout per problem (first correct wins); output order
follows input order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Union

from .datasetgen import DatasetRecord
from .domain import Problem, canonical_key
from .tracelang import parse, serialize
from .validation import validate, wilson_interval

ROLLOUT_STRATEGY = "rollout"

Rollout = Union[DatasetRecord, tuple[Problem, str]]


def _coerce(item: Rollout) -> DatasetRecord:
    if isinstance(item, DatasetRecord):
        return item
    problem, text = item
    return DatasetRecord(
        problem=problem,
        strategy=ROLLOUT_STRATEGY,
        trajectory_text=text,
        correct=False,
        states_explored=0,
        seed=0,
    )


def problem_key(problem: Problem) -> tuple[str, int]:
    """Dedup identity: the input multiset plus the target."""
    return (canonical_key(problem.inputs), problem.target)


def star_filter(rollouts: Iterable[Rollout]) -> Iterator[DatasetRecord]:
    """Keep the first correct, error-free rollout per problem.

    Accepts dataset records or bare (problem, trajectory text) pairs; yields
    records whose trajectory is re-serialized from the parsed events and
    whose correct flag and states_explored are re-derived, never trusted
    from the input.  Idempotent: filtering filtered output is a no-op.
    """
    seen: set[tuple[str, int]] = set()
    for item in rollouts:
        record = _coerce(item)
        key = problem_key(record.problem)
        if key in seen:
            continue
        report = validate(record.trajectory_text, record.problem)
        errors = report.errors
        if not report.correct:
            continue
        if errors.arithmetic or errors.exploration or errors.other:
            continue
        traj, _ = parse(record.trajectory_text, strict=False, problem=record.problem)
        seen.add(key)
        yield replace(
            record,
            trajectory_text=serialize(traj),
            correct=True,
            states_explored=report.states_explored,
        )


@dataclass(frozen=True)
class IterationStats:
    """One expert-iteration round, as counted after filtering.

    ``accuracy`` is measured on a fixed validation problem set of size
    ``validation_n`` (kept so confidence intervals stay computable);
    ``mean_states_explored_kept`` is None when nothing was kept.
    """

    iteration: int
    rollouts: int
    kept: int
    accuracy: float
    validation_n: int
    mean_states_explored_kept: float | None

    def __post_init__(self) -> None:
        if self.kept > self.rollouts:
            raise ValueError("kept exceeds rollouts")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy outside [0, 1]")
        if self.validation_n < 1:
            raise ValueError("validation_n must be >= 1")

    def accuracy_ci(self) -> tuple[float, float]:
        return wilson_interval(round(self.accuracy * self.validation_n), self.validation_n)


def iteration_report(before: IterationStats, after: IterationStats) -> dict:
    """Deltas between two iterations, with 95% intervals on each accuracy.

    Reports movement without judging it: kept counts and efficiency can go
    either way, and the caller decides what counts as convergence."""
    eff_before = before.mean_states_explored_kept
    eff_after = after.mean_states_explored_kept
    efficiency_delta = (
        eff_after - eff_before if eff_before is not None and eff_after is not None else None
    )
    return {
        "iterations": [before.iteration, after.iteration],
        "accuracy_before": before.accuracy,
        "accuracy_after": after.accuracy,
        "accuracy_delta": after.accuracy - before.accuracy,
        "accuracy_ci_before": list(before.accuracy_ci()),
        "accuracy_ci_after": list(after.accuracy_ci()),
        "rollouts_before": before.rollouts,
        "rollouts_after": after.rollouts,
        "kept_before": before.kept,
        "kept_after": after.kept,
        "kept_delta": after.kept - before.kept,
        "states_explored_before": eff_before,
        "states_explored_after": eff_after,
        "efficiency_delta": efficiency_delta,
    }
