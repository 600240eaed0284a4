"""Core Countdown domain: problems, states, and arithmetic operations.

A problem is a target in [10, 100] plus input numbers (normally four).  Each
operation consumes two numbers from the remaining pool and appends its
result, so a k-number problem supports at most k-1 operations.  Legal
operations keep everything in non-negative integers: subtraction takes the
larger operand first, division must be exact with a non-zero divisor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ._kernel import backend as _k


class OperationError(ValueError):
    """An arithmetic operation violating the domain rules."""


class NegativeResult(OperationError):
    """Subtraction ordered small-minus-large."""


class NonIntegerDivision(OperationError):
    """Division with a remainder."""


class DivisionByZero(OperationError):
    """Division with a zero divisor."""


class OperandNotAvailable(OperationError):
    """Operand missing from the state's remaining numbers."""


class Split(enum.Enum):
    TRAIN = "train"
    VAL = "val"
    TEST_SEEN_TARGET = "test_seen_target"
    TEST_NEW_TARGET = "test_new_target"


@dataclass(frozen=True, slots=True)
class ArithmeticOp:
    """One rendered operation, e.g. ``98-80=18``.

    Operands are stored in rendering order: positional for + and *, larger
    first for - and / (with ``0/x`` the one legal exception).
    """

    lhs: int
    rhs: int
    op: str
    result: int

    def __str__(self) -> str:
        return f"{self.lhs}{self.op}{self.rhs}={self.result}"

    @classmethod
    def make(cls, lhs: int, rhs: int, op: str) -> "ArithmeticOp":
        """Build and validate an operation from its operands."""
        if op == "+":
            return cls(lhs, rhs, "+", lhs + rhs)
        if op == "*":
            return cls(lhs, rhs, "*", lhs * rhs)
        if op == "-":
            if lhs < rhs:
                raise NegativeResult(f"{lhs}-{rhs} is negative")
            return cls(lhs, rhs, "-", lhs - rhs)
        if op == "/":
            if rhs == 0:
                raise DivisionByZero(f"{lhs}/0")
            if lhs % rhs != 0:
                raise NonIntegerDivision(f"{lhs}/{rhs} is not exact")
            return cls(lhs, rhs, "/", lhs // rhs)
        raise OperationError(f"unknown operator {op!r}")


@dataclass(frozen=True, slots=True)
class Problem:
    """A Countdown instance: make ``target`` from ``inputs``."""

    target: int
    inputs: tuple[int, ...]
    split: Split = Split.TRAIN

    def __post_init__(self) -> None:
        if not 10 <= self.target <= 100:
            raise ValueError(f"target {self.target} outside [10, 100]")
        if not 3 <= len(self.inputs) <= 4:
            raise ValueError(f"expected 3 or 4 inputs, got {len(self.inputs)}")
        if any(n < 1 for n in self.inputs):
            raise ValueError(f"inputs must be >= 1: {self.inputs}")

    def key(self) -> tuple[tuple[int, ...], int]:
        """Dedup identity: sorted inputs plus target."""
        return (tuple(sorted(self.inputs)), self.target)


@dataclass(frozen=True, slots=True)
class SearchState:
    """A node of the search tree over a problem.

    ``label`` is the tree address printed in traces: the root is (0,) and
    each child appends its index among the node's kept children.
    """

    remaining: tuple[int, ...]
    history: tuple[ArithmeticOp, ...] = ()
    label: tuple[int, ...] = (0,)


def root_state(problem: Problem) -> SearchState:
    return SearchState(remaining=problem.inputs)


def apply_op(state: SearchState, op: ArithmeticOp) -> tuple[int, ...]:
    """Remaining numbers after applying ``op`` to ``state``.

    Operand removal is stable (first occurrences) and the result is
    appended, so untouched numbers keep their order.
    """
    pool = list(state.remaining)
    for operand in (op.lhs, op.rhs):
        try:
            pool.remove(operand)
        except ValueError:
            raise OperandNotAvailable(
                f"operand {operand} not in {state.remaining}"
            ) from None
    # re-validate the arithmetic so hand-built ops cannot smuggle bad values
    checked = ArithmeticOp.make(op.lhs, op.rhs, op.op)
    if checked.result != op.result:
        raise OperationError(f"{op} is arithmetically wrong")
    pool.append(op.result)
    return tuple(pool)


def enumerate_ops(state: SearchState) -> tuple[ArithmeticOp, ...]:
    """Legal operations of a state, in canonical order.

    Pairs by position (i < j), operators in the fixed order +, -, *, /;
    duplicate (operands, operator) combinations from repeated values are
    emitted once.  The order is deterministic and is what every tie-break
    in the toolkit falls back to.
    """
    return tuple(
        ArithmeticOp(lhs, rhs, op, result)
        for lhs, rhs, op, result in _k.enum_ops(state.remaining)
    )


def transition(state: SearchState, op: ArithmeticOp) -> SearchState:
    """Child state reached by ``op``: numbers updated, op appended to the
    history, label extended by the op's index in enumeration order."""
    ops = _k.enum_ops(state.remaining)
    try:
        idx = ops.index((op.lhs, op.rhs, op.op, op.result))
    except ValueError:
        raise OperandNotAvailable(f"{op} is not a legal op of {state.remaining}") from None
    return SearchState(
        remaining=apply_op(state, op),
        history=state.history + (op,),
        label=state.label + (idx,),
    )


def is_goal(state: SearchState, target: int, require_all_used: bool = False) -> bool:
    """Whether the state contains the target.

    Search fires this the moment an operation produces the target; leftover
    numbers are fine unless ``require_all_used`` is set.
    """
    if require_all_used:
        return len(state.remaining) == 1 and state.remaining[0] == target
    return target in state.remaining


def canonical_key(remaining: tuple[int, ...]) -> str:
    """Order-free identity of a set of remaining numbers, e.g. ``[24,30,36]``."""
    return "[" + ",".join(str(n) for n in sorted(remaining)) + "]"


def replay_ops(
    inputs: tuple[int, ...], ops: tuple[ArithmeticOp, ...]
) -> tuple[int, ...]:
    """Apply a sequence of ops starting from ``inputs``; raises the usual
    operation errors if any step is illegal."""
    state = SearchState(remaining=tuple(inputs))
    for op in ops:
        state = SearchState(remaining=apply_op(state, op))
    return state.remaining
