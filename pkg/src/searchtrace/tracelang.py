"""The trace language: events, serializer, and parser.

A trajectory is a newline-separated sequence of events, one per line.  Two
formats share the grammar:

* search streams (``sos``): generated nodes carry tree labels (``#0,1,4``,
  root ``#0``) and ``Moving to Node`` lines mark traversal;
* solution-only traces (``op``): generated nodes are numbered sequentially
  from ``#2`` (the root is implicitly ``#1``) and rendered with ``from
  Operation``.

Line formats, bit-exact:

    Current State: 18:[74, 24, 36, 44], Operations: []
    Exploring Operation: 74+24=98, Resulting Numbers: [36, 44, 98]
    Generated Node #0,2: 18:[44, 98, 50] Operation: 74+24=98
    Generated Node #2: [36, 44, 98] from Operation: 74+24=98
    Moving to Node #0,2
    18,18 equal: Goal Reached
    No Solution Found

History lists render their operations single-quoted: ``['74+24=98']``.
A goal line ends a trajectory; ``No Solution Found`` is the terminal
sentinel of exhausted or truncated searches.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .domain import ArithmeticOp, Problem, Split


class TraceFormat(enum.Enum):
    SOS = "sos"  # full search stream
    OP = "op"  # solution-only trace


class TraceSyntaxError(ValueError):
    """Strict-mode parse failure."""

    def __init__(self, line_no: int, reason: str) -> None:
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True, slots=True)
class FormatViolation:
    """One malformed line recorded by the lenient parser."""

    line_no: int
    line: str
    reason: str


class BrokenAncestry(ValueError):
    """A goal was claimed but the node ancestry cannot be resolved.

    Signals an exploration defect in the trace, not a crash."""


@dataclass(frozen=True, slots=True)
class CurrentState:
    target: int
    remaining: tuple[int, ...]
    history: tuple[ArithmeticOp, ...]


@dataclass(frozen=True, slots=True)
class ExploreOp:
    op: ArithmeticOp
    resulting: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class GeneratedNode:
    """Search-stream node with a tree label."""

    label: tuple[int, ...]
    target: int
    remaining: tuple[int, ...]
    op: ArithmeticOp


@dataclass(frozen=True, slots=True)
class GeneratedNodeSeq:
    """Solution-trace node with a sequential number."""

    seq: int
    remaining: tuple[int, ...]
    op: ArithmeticOp


@dataclass(frozen=True, slots=True)
class MoveToNode:
    label: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class GoalReached:
    value: int
    target: int


@dataclass(frozen=True, slots=True)
class NoSolution:
    pass


Event = (
    CurrentState
    | ExploreOp
    | GeneratedNode
    | GeneratedNodeSeq
    | MoveToNode
    | GoalReached
    | NoSolution
)


@dataclass(frozen=True, slots=True)
class Trajectory:
    """A parsed or generated trace: the problem, its format, the events.

    The first event of a well-formed trajectory is a CurrentState over the
    problem's inputs with an empty history; GoalReached and NoSolution are
    terminal.  ``problem`` is None only for lenient parses whose first line
    was unreadable.
    """

    problem: Problem | None
    fmt: TraceFormat
    events: tuple[Event, ...]


# --- serialization ---------------------------------------------------------


def _render_nums(nums: tuple[int, ...]) -> str:
    return ", ".join(str(n) for n in nums)


def _render_history(history: tuple[ArithmeticOp, ...]) -> str:
    if not history:
        return "[]"
    return "[" + ", ".join(f"'{op}'" for op in history) + "]"


def _render_label(label: tuple[int, ...]) -> str:
    return ",".join(str(i) for i in label)


def render_event(event: Event) -> str:
    """One event, one line."""
    if isinstance(event, CurrentState):
        return (
            f"Current State: {event.target}:[{_render_nums(event.remaining)}],"
            f" Operations: {_render_history(event.history)}"
        )
    if isinstance(event, ExploreOp):
        return (
            f"Exploring Operation: {event.op},"
            f" Resulting Numbers: [{_render_nums(event.resulting)}]"
        )
    if isinstance(event, GeneratedNode):
        return (
            f"Generated Node #{_render_label(event.label)}:"
            f" {event.target}:[{_render_nums(event.remaining)}] Operation: {event.op}"
        )
    if isinstance(event, GeneratedNodeSeq):
        return (
            f"Generated Node #{event.seq}:"
            f" [{_render_nums(event.remaining)}] from Operation: {event.op}"
        )
    if isinstance(event, MoveToNode):
        return f"Moving to Node #{_render_label(event.label)}"
    if isinstance(event, GoalReached):
        return f"{event.value},{event.target} equal: Goal Reached"
    if isinstance(event, NoSolution):
        return "No Solution Found"
    raise TypeError(f"not an event: {event!r}")


def serialize(trajectory: Trajectory) -> str:
    """The trace text: events joined by newlines, no trailing newline."""
    return "\n".join(render_event(e) for e in trajectory.events)


# --- parsing ---------------------------------------------------------------

_OP = r"(\d+)([+\-*/])(\d+)=(\d+)"
_NUMS = r"((?:\d+(?:, \d+)*)?)"
_RE_CURRENT = re.compile(
    rf"^Current State: (\d+):\[{_NUMS}\], Operations: \[((?:'[^']*')(?:, '[^']*')*)?\]$"
)
_RE_EXPLORE = re.compile(rf"^Exploring Operation: {_OP}, Resulting Numbers: \[{_NUMS}\]$")
_RE_GEN_SOS = re.compile(rf"^Generated Node #(\d+(?:,\d+)*): (\d+):\[{_NUMS}\] Operation: {_OP}$")
_RE_GEN_OP = re.compile(rf"^Generated Node #(\d+): \[{_NUMS}\] from Operation: {_OP}$")
_RE_MOVE = re.compile(r"^Moving to Node #(\d+(?:,\d+)*)$")
_RE_GOAL = re.compile(r"^(\d+),(\d+) equal: Goal Reached$")
_RE_OP_QUOTED = re.compile(rf"^'{_OP}'$")


def _parse_nums(text: str) -> tuple[int, ...]:
    if not text:
        return ()
    return tuple(int(n) for n in text.split(", "))


def _parse_op(lhs: str, op: str, rhs: str, result: str) -> ArithmeticOp:
    return ArithmeticOp(int(lhs), int(rhs), op, int(result))


def _parse_history(text: str | None) -> tuple[ArithmeticOp, ...] | None:
    if text is None:
        return ()
    ops = []
    for chunk in text.split(", "):
        m = _RE_OP_QUOTED.match(chunk)
        if not m:
            return None
        ops.append(_parse_op(*m.groups()))
    return tuple(ops)


def parse_line(line: str) -> Event | None:
    """The event on a line, or None if the line matches no event format."""
    m = _RE_CURRENT.match(line)
    if m:
        history = _parse_history(m.group(3))
        if history is None:
            return None
        return CurrentState(int(m.group(1)), _parse_nums(m.group(2)), history)
    m = _RE_EXPLORE.match(line)
    if m:
        return ExploreOp(_parse_op(*m.groups()[:4]), _parse_nums(m.group(5)))
    m = _RE_GEN_OP.match(line)
    if m:
        return GeneratedNodeSeq(int(m.group(1)), _parse_nums(m.group(2)), _parse_op(*m.groups()[2:]))
    m = _RE_GEN_SOS.match(line)
    if m:
        label = tuple(int(i) for i in m.group(1).split(","))
        return GeneratedNode(label, int(m.group(2)), _parse_nums(m.group(3)), _parse_op(*m.groups()[3:]))
    m = _RE_MOVE.match(line)
    if m:
        return MoveToNode(tuple(int(i) for i in m.group(1).split(",")))
    m = _RE_GOAL.match(line)
    if m:
        return GoalReached(int(m.group(1)), int(m.group(2)))
    if line == "No Solution Found":
        return NoSolution()
    return None


def parse(
    text: str,
    strict: bool = True,
    problem: Problem | None = None,
    split: Split = Split.TRAIN,
) -> tuple[Trajectory, list[FormatViolation]]:
    """Parse trace text back into a trajectory.

    Strict mode raises TraceSyntaxError at the first malformed line; lenient
    mode records each malformed line as a FormatViolation and skips it.  The
    problem is reconstructed from the opening CurrentState line unless one
    is passed in.  A single trailing newline is tolerated; the format is
    inferred from the first generated-node line (defaulting to the search
    format when a trace has none).
    """
    violations: list[FormatViolation] = []
    events: list[Event] = []
    fmt: TraceFormat | None = None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for line_no, line in enumerate(lines, start=1):
        event = parse_line(line)
        if event is None:
            if strict:
                raise TraceSyntaxError(line_no, f"malformed line: {line!r}")
            violations.append(FormatViolation(line_no, line, "malformed line"))
            continue
        if not events and not isinstance(event, CurrentState):
            if strict:
                raise TraceSyntaxError(line_no, "trajectory must open with a Current State line")
            violations.append(
                FormatViolation(line_no, line, "trajectory must open with a Current State line")
            )
            continue
        if fmt is None:
            if isinstance(event, (GeneratedNode, MoveToNode)):
                fmt = TraceFormat.SOS
            elif isinstance(event, GeneratedNodeSeq):
                fmt = TraceFormat.OP
        events.append(event)
    if problem is None and events:
        first = events[0]
        assert isinstance(first, CurrentState)
        try:
            problem = Problem(first.target, first.remaining, split)
        except ValueError as exc:
            if strict:
                raise TraceSyntaxError(1, f"opening state is not a valid problem: {exc}")
            violations.append(FormatViolation(1, lines[0], str(exc)))
    if strict and problem is None:
        raise TraceSyntaxError(0, "empty trajectory")
    return Trajectory(problem, fmt or TraceFormat.SOS, tuple(events)), violations


# --- extraction ------------------------------------------------------------


def extract_states(trajectory: Trajectory) -> list[str]:
    """Canonical keys of every state the search visits, in order.

    Visited means instantiated as a node: states on CurrentState lines,
    generated nodes, and the goal state (the resulting numbers of the
    explored operation a goal line follows, which is the one place it
    appears).  Children that are explored but not kept are scored, never
    visited, so they do not count."""
    from .domain import canonical_key

    events = trajectory.events
    keys: list[str] = []
    for i, event in enumerate(events):
        if isinstance(event, (CurrentState, GeneratedNode, GeneratedNodeSeq)):
            keys.append(canonical_key(event.remaining))
        elif (
            isinstance(event, ExploreOp)
            and i + 1 < len(events)
            and isinstance(events[i + 1], GoalReached)
        ):
            keys.append(canonical_key(event.resulting))
    return keys


def _goal_index(events: tuple[Event, ...]) -> int | None:
    for i, event in enumerate(events):
        if isinstance(event, GoalReached):
            return i
    return None


def extract_solution_path(trajectory: Trajectory) -> tuple[ArithmeticOp, ...] | None:
    """The op sequence from the inputs to the goal, or None without a goal.

    For search streams the path is recovered from the tree labels: the ops
    of every ancestor of the node whose expansion hit the goal, plus the
    goal op itself.  Raises BrokenAncestry when a claimed goal has no
    resolvable ancestry (missing nodes, missing goal op)."""
    events = trajectory.events
    goal_at = _goal_index(events)
    if goal_at is None:
        return None
    if goal_at == 0 or not isinstance(events[goal_at - 1], ExploreOp):
        raise BrokenAncestry("goal line not preceded by an explored operation")
    goal_op: ExploreOp = events[goal_at - 1]

    if trajectory.fmt is TraceFormat.OP:
        path = [e.op for e in events[:goal_at] if isinstance(e, GeneratedNodeSeq)]
        path.append(goal_op.op)
        return tuple(path)

    current: tuple[int, ...] = (0,)
    for event in events[:goal_at]:
        if isinstance(event, MoveToNode):
            current = event.label
    by_label: dict[tuple[int, ...], ArithmeticOp] = {}
    for event in events[:goal_at]:
        if isinstance(event, GeneratedNode) and event.label not in by_label:
            by_label[event.label] = event.op
    path = []
    for depth in range(2, len(current) + 1):
        prefix = current[:depth]
        if prefix not in by_label:
            raise BrokenAncestry(f"no generated node #{_render_label(prefix)} on the goal ancestry")
        path.append(by_label[prefix])
    path.append(goal_op.op)
    return tuple(path)
