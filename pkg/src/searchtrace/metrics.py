"""Alignment and efficiency metrics between search runs.

Correctness vectors are compared with the phi coefficient (Pearson on 0/1
encodings). Trajectories are compared by state alignment: the number of
unique states two searches both visit, divided by the larger unique-state
count. State identity is the multiset of remaining numbers; histories are
ignored so runs from different strategies stay comparable.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Sequence

from .tracelang import GeneratedNode, GeneratedNodeSeq, Trajectory, extract_states


class DegenerateVector(ValueError):
    """A correctness vector is constant, so phi is undefined."""


class EmptySet(ValueError):
    """No problems to aggregate over."""


def phi_correlation(a: Sequence[bool], b: Sequence[bool]) -> float:
    if len(a) != len(b):
        raise ValueError(f"vector lengths differ: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least 2 paired outcomes")
    if len(set(a)) < 2 or len(set(b)) < 2:
        raise DegenerateVector("constant correctness vector; phi undefined")
    n = len(a)
    n11 = sum(1 for x, y in zip(a, b) if x and y)
    n10 = sum(1 for x, y in zip(a, b) if x and not y)
    n01 = sum(1 for x, y in zip(a, b) if not x and y)
    n00 = n - n11 - n10 - n01
    row1, row0 = n11 + n10, n01 + n00
    col1, col0 = n11 + n01, n10 + n00
    return (n11 * n00 - n10 * n01) / math.sqrt(row1 * row0 * col1 * col0)


def state_alignment(t1: Trajectory, t2: Trajectory) -> float:
    s1 = set(extract_states(t1))
    s2 = set(extract_states(t2))
    if not s1 and not s2:
        return 1.0
    if not s1 or not s2:
        return 0.0
    return len(s1 & s2) / max(len(s1), len(s2))


def mean_state_alignment(
    runs_a: Sequence[Trajectory], runs_b: Sequence[Trajectory]
) -> float:
    if len(runs_a) != len(runs_b):
        raise ValueError(f"run counts differ: {len(runs_a)} vs {len(runs_b)}")
    if not runs_a:
        raise EmptySet("no problems to average over")
    return sum(state_alignment(a, b) for a, b in zip(runs_a, runs_b)) / len(runs_a)


def states_explored(t: Trajectory) -> int:
    """Number of generated nodes; the root is given, not explored."""
    return sum(1 for e in t.events if isinstance(e, (GeneratedNode, GeneratedNodeSeq)))


def correctness_vector(trajectories: Iterable[Trajectory]) -> list[bool]:
    from .tracelang import GoalReached

    return [
        bool(t.events) and isinstance(t.events[-1], GoalReached) for t in trajectories
    ]


def phi_matrix(vectors: Mapping[str, Sequence[bool]]) -> dict[tuple[str, str], float | None]:
    """Pairwise phi between named correctness vectors; None where undefined."""
    out: dict[tuple[str, str], float | None] = {}
    for name_a, vec_a in vectors.items():
        for name_b, vec_b in vectors.items():
            try:
                out[(name_a, name_b)] = phi_correlation(vec_a, vec_b)
            except DegenerateVector:
                out[(name_a, name_b)] = None
    return out


def alignment_matrix(
    runs: Mapping[str, Sequence[Trajectory]]
) -> dict[tuple[str, str], float]:
    """Pairwise mean state alignment between named runs on shared problems."""
    out: dict[tuple[str, str], float] = {}
    for name_a, runs_a in runs.items():
        for name_b, runs_b in runs.items():
            out[(name_a, name_b)] = mean_state_alignment(runs_a, runs_b)
    return out
