"""Deterministic generation of problems, target splits, and the search /
optimal-path training datasets.

All randomness flows from one 64-bit seed through per-record derived seeds
(blake2b of "seed:purpose:index"), so the same (n, seed) always yields the
same records regardless of worker count, and the search-trace and
optimal-path datasets built from the same seed are problem-aligned record
by record.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Iterable, Iterator, Mapping, Sequence, TextIO

from ._kernel import backend as _k
from .domain import Problem, Split
from .metrics import states_explored
from .oracle import classify_difficulty, oracle_trajectory
from .strategies import all_strategies, run_strategy, strategy_by_name
from .tracelang import GoalReached, serialize

TARGET_MIN = 10
TARGET_MAX = 100
INPUT_MIN = 1
INPUT_MAX = 50
HELD_OUT_COUNT = 9  # 10% of the 91 targets in [10, 100]

OPTIMAL_STRATEGY_NAME = "optimal"


class InsufficientPool(RuntimeError):
    """Rejection sampling could not fill a requested problem set."""


def derive_seed(seed: int, *parts: object) -> int:
    """64-bit per-record seed from the run seed and a purpose/index path."""
    payload = ":".join(str(p) for p in (seed, *parts)).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class SplitPlan:
    """Which targets are held out of training for the new-target test split."""

    held_out_targets: frozenset[int]
    split_seed: int

    def __post_init__(self) -> None:
        for t in self.held_out_targets:
            if not TARGET_MIN <= t <= TARGET_MAX:
                raise ValueError(f"held-out target {t} outside [{TARGET_MIN}, {TARGET_MAX}]")

    @classmethod
    def from_seed(cls, split_seed: int) -> "SplitPlan":
        rng = random.Random(derive_seed(split_seed, "split"))
        held = frozenset(rng.sample(range(TARGET_MIN, TARGET_MAX + 1), HELD_OUT_COUNT))
        return cls(held, split_seed)

    def allows(self, target: int, split: Split) -> bool:
        held = target in self.held_out_targets
        if split is Split.TEST_NEW_TARGET:
            return held
        return not held


@dataclass(frozen=True)
class DatasetRecord:
    """One trajectory with its provenance: problem, strategy, outcome."""

    problem: Problem
    strategy: str
    trajectory_text: str
    correct: bool
    states_explored: int
    seed: int
    rating: float | None = None

    def to_obj(self) -> dict:
        obj = {
            "target": self.problem.target,
            "nums": list(self.problem.inputs),
            "strategy": self.strategy,
            "split": self.problem.split.value,
            "correct": self.correct,
            "trajectory": self.trajectory_text,
            "states_explored": self.states_explored,
            "seed": self.seed,
        }
        if self.rating is not None:
            obj["rating"] = self.rating
        return obj

    @classmethod
    def from_obj(cls, obj: Mapping) -> "DatasetRecord":
        problem = Problem(
            int(obj["target"]),
            tuple(int(v) for v in obj["nums"]),
            Split(obj.get("split", "train")),
        )
        return cls(
            problem=problem,
            strategy=str(obj.get("strategy", "")),
            trajectory_text=str(obj["trajectory"]),
            correct=bool(obj.get("correct", False)),
            states_explored=int(obj.get("states_explored", 0)),
            seed=int(obj.get("seed", 0)),
            rating=float(obj["rating"]) if "rating" in obj else None,
        )


def write_records(records: Iterable[DatasetRecord], fp: TextIO) -> int:
    n = 0
    for record in records:
        fp.write(json.dumps(record.to_obj()) + "\n")
        n += 1
    return n


def read_records(path: str | Path) -> list[DatasetRecord]:
    out = []
    with open(path, encoding="utf-8") as fp:
        for line_no, line in enumerate(fp, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(DatasetRecord.from_obj(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"record {line_no}: {exc}") from exc
    return out


def sample_problem(
    rng: random.Random,
    plan: SplitPlan,
    split: Split = Split.TRAIN,
    num_inputs: int = 4,
    taken: set | None = None,
    extra_reject: Callable[[Problem], bool] | None = None,
    max_attempts: int | None = None,
) -> Problem:
    """Forward-construct a solvable problem.

    Draw inputs uniformly from [1, 50], combine them with random valid ops
    down to a single value, and accept that value as the target when it
    lands in [10, 100], respects the split's held-out rule, and is not
    already one of the inputs. Construction guarantees solvability.
    """
    attempts = 0
    while True:
        attempts += 1
        if max_attempts is not None and attempts > max_attempts:
            raise InsufficientPool(
                f"no acceptable problem in {max_attempts} attempts for split {split.value}"
            )
        inputs = tuple(rng.randint(INPUT_MIN, INPUT_MAX) for _ in range(num_inputs))
        state = inputs
        while len(state) > 1:
            candidates = _k.enum_ops(state)
            lhs, rhs, _, result = candidates[rng.randrange(len(candidates))]
            state = _k.child_state(state, lhs, rhs, result)
        target = state[0]
        if not TARGET_MIN <= target <= TARGET_MAX:
            continue
        if target in inputs:
            continue
        if not plan.allows(target, split):
            continue
        problem = Problem(target, inputs, split)
        if taken is not None and problem.key() in taken:
            continue
        if extra_reject is not None and extra_reject(problem):
            continue
        if taken is not None:
            taken.add(problem.key())
        return problem


def sample_problems(
    n: int,
    seed: int,
    *,
    plan: SplitPlan | None = None,
    split: Split = Split.TRAIN,
    num_inputs: int = 4,
) -> list[Problem]:
    """The first n problems of the run: serial, deduplicated, worker-free."""
    plan = plan if plan is not None else SplitPlan.from_seed(seed)
    taken: set = set()
    problems = []
    for index in range(n):
        rng = random.Random(derive_seed(seed, "problem", index))
        problems.append(sample_problem(rng, plan, split, num_inputs, taken))
    return problems


def strategy_name_for_index(seed: int, index: int) -> str:
    rng = random.Random(derive_seed(seed, "strategy", index))
    names = [cfg.name for cfg in all_strategies()]
    return names[rng.randrange(len(names))]


def _build_sos(task: tuple[Problem, str, int]) -> DatasetRecord:
    problem, strategy_name, record_seed = task
    traj = run_strategy(strategy_by_name(strategy_name), problem)
    return DatasetRecord(
        problem=problem,
        strategy=strategy_name,
        trajectory_text=serialize(traj),
        correct=isinstance(traj.events[-1], GoalReached),
        states_explored=states_explored(traj),
        seed=record_seed,
    )


def _build_op(task: tuple[Problem, str, int]) -> DatasetRecord:
    problem, _, record_seed = task
    traj = oracle_trajectory(problem)
    if traj is None:  # forward construction makes this unreachable
        raise AssertionError(f"constructed problem is unsolvable: {problem}")
    return DatasetRecord(
        problem=problem,
        strategy=OPTIMAL_STRATEGY_NAME,
        trajectory_text=serialize(traj),
        correct=True,
        states_explored=states_explored(traj),
        seed=record_seed,
    )


def _stream(
    build: Callable[[tuple[Problem, str, int]], DatasetRecord],
    tasks: Sequence[tuple[Problem, str, int]],
    workers: int,
) -> Iterator[DatasetRecord]:
    if workers <= 1:
        yield from map(build, tasks)
        return
    with Pool(workers) as pool:
        yield from pool.imap(build, tasks, chunksize=64)


def _tasks(
    n: int,
    seed: int,
    plan: SplitPlan | None,
    split: Split,
    num_inputs: int,
    strategy: str | None,
) -> list[tuple[Problem, str, int]]:
    problems = sample_problems(n, seed, plan=plan, split=split, num_inputs=num_inputs)
    tasks = []
    for index, problem in enumerate(problems):
        name = strategy if strategy is not None else strategy_name_for_index(seed, index)
        tasks.append((problem, name, derive_seed(seed, "problem", index)))
    return tasks


def generate_sos_dataset(
    n: int,
    seed: int,
    *,
    plan: SplitPlan | None = None,
    split: Split = Split.TRAIN,
    num_inputs: int = 4,
    strategy: str | None = None,
    workers: int = 1,
) -> Iterator[DatasetRecord]:
    """Search trajectories; one strategy per problem, uniform over the twelve
    unless a fixed strategy name is given."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if strategy is not None:
        strategy_by_name(strategy)  # validate early
    tasks = _tasks(n, seed, plan, split, num_inputs, strategy)
    return _stream(_build_sos, tasks, workers)


def generate_op_dataset(
    n: int,
    seed: int,
    *,
    plan: SplitPlan | None = None,
    split: Split = Split.TRAIN,
    num_inputs: int = 4,
    workers: int = 1,
) -> Iterator[DatasetRecord]:
    """Optimal-path trajectories over the same problems as the search dataset
    built from the same (n, seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tasks = _tasks(n, seed, plan, split, num_inputs, None)
    return _stream(_build_op, tasks, workers)


DEFAULT_TEST_SET_SIZE = 10_000
_POOL_ATTEMPT_FACTOR = 2_000  # attempts allowed per requested problem


def build_test_sets(
    seed: int,
    train_records: Sequence[DatasetRecord],
    *,
    counts: int | Mapping[str, int] = DEFAULT_TEST_SET_SIZE,
    plan: SplitPlan | None = None,
    num_inputs: int = 4,
) -> dict[str, list[Problem]]:
    """Four disjoint evaluation pools: seen-target problems with fresh inputs,
    held-out-target problems, train problems the sampled strategy missed, and
    solvable problems that defeat all twelve strategies."""
    plan = plan if plan is not None else SplitPlan.from_seed(seed)
    if isinstance(counts, int):
        counts = {key: counts for key in ("test_seen_target", "test_new_target", "unsolved_train", "difficult")}

    train_keys = {r.problem.key() for r in train_records}
    train_inputs = {tuple(sorted(r.problem.inputs)) for r in train_records}
    taken = set(train_keys)
    sets: dict[str, list[Problem]] = {}

    def fill(name: str, split: Split, reject: Callable[[Problem], bool] | None) -> None:
        want = counts.get(name, 0)
        out = []
        budget = want * _POOL_ATTEMPT_FACTOR
        rng = random.Random(derive_seed(seed, "testset", name))
        for _ in range(want):
            try:
                out.append(
                    sample_problem(
                        rng, plan, split, num_inputs, taken, reject, max_attempts=budget
                    )
                )
            except InsufficientPool as exc:
                raise InsufficientPool(f"{name}: {exc}") from exc
        sets[name] = out

    fill(
        "test_seen_target",
        Split.TEST_SEEN_TARGET,
        lambda p: tuple(sorted(p.inputs)) in train_inputs,
    )
    fill("test_new_target", Split.TEST_NEW_TARGET, None)

    unsolved = []
    seen: set = set()
    for record in train_records:
        if record.correct or record.problem.key() in seen:
            continue
        seen.add(record.problem.key())
        unsolved.append(record.problem)
        if len(unsolved) == counts.get("unsolved_train", 0):
            break
    if len(unsolved) < counts.get("unsolved_train", 0):
        raise InsufficientPool(
            f"unsolved_train: only {len(unsolved)} incorrect train records available"
        )
    sets["unsolved_train"] = unsolved

    fill("difficult", Split.TRAIN, lambda p: classify_difficulty(p) != 0)
    return sets
