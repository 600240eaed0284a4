"""Acceptance gate: one test per top-level product requirement.

Each test exercises one requirement end to end at its stated tolerance and
runtime budget, so ``pytest -v tests/test_acceptance.py`` prints one
pass/fail line per criterion.  The tests are self-contained: they generate
their own data and never read fixture files.

The dataset correct-rate window (criterion 4) is asserted exactly as stated.
The default generator configuration is known to land above the window; the
test fails with the measured fraction rather than widening the bound.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
import time
from dataclasses import replace

import pytest

from searchtrace.cli import main
from searchtrace.datasetgen import (
    derive_seed,
    generate_sos_dataset,
    sample_problems,
)
from searchtrace.metrics import alignment_matrix, phi_correlation, state_alignment
from searchtrace.star import problem_key, star_filter
from searchtrace.strategies import all_strategies, run_strategy, unpruned
from searchtrace.tracelang import GoalReached, extract_solution_path, parse, serialize
from searchtrace.domain import replay_ops
from searchtrace.oracle import solve_exhaustive
from searchtrace.validation import CATEGORIES, CORRUPTION_KINDS, corrupt, validate

WORKERS = max(1, min(8, os.cpu_count() or 1))


@pytest.fixture(scope="session")
def sos_pool():
    """10k search trajectories with the default strategy mix, plus the time
    it took to build them (charged to the round-trip budget)."""
    start = time.monotonic()
    records = list(generate_sos_dataset(10_000, 101, workers=WORKERS))
    return records, time.monotonic() - start


def test_c1_grammar_round_trip(sos_pool) -> None:
    """10,000 generator trajectories round-trip bit-exactly in under a minute."""
    records, gen_elapsed = sos_pool
    start = time.monotonic()
    failures = 0
    for record in records:
        trajectory, violations = parse(record.trajectory_text, strict=True)
        if violations or serialize(trajectory) != record.trajectory_text:
            failures += 1
            continue
        again, _ = parse(serialize(trajectory), strict=True)
        if again != trajectory:
            failures += 1
    elapsed = gen_elapsed + (time.monotonic() - start)
    assert failures == 0, f"{failures} of {len(records)} trajectories failed round-trip"
    assert elapsed < 60.0, f"round-trip took {elapsed:.1f}s, budget is 60s"


def test_c2_oracle_equivalence() -> None:
    """Unpruned DFS agrees with the exhaustive solver on 1,000 problems and
    every strategy-claimed solution replays to the target, under a minute."""
    start = time.monotonic()
    problems = sample_problems(1_000, 202)
    complete_dfs = unpruned(all_strategies()[0])
    disagreements = 0
    for problem in problems:
        trajectory = run_strategy(complete_dfs, problem)
        found = isinstance(trajectory.events[-1], GoalReached)
        if found != (solve_exhaustive(problem).solution_count > 0):
            disagreements += 1
    assert disagreements == 0, f"{disagreements}/1000 solvability disagreements"

    bad_claims = 0
    for problem in problems:
        for cfg in all_strategies():
            trajectory = run_strategy(cfg, problem)
            if not isinstance(trajectory.events[-1], GoalReached):
                continue
            path = extract_solution_path(trajectory)
            if path is None or path[-1].result != problem.target:
                bad_claims += 1
                continue
            final = replay_ops(problem.inputs, path)
            if problem.target not in final:
                bad_claims += 1
    assert bad_claims == 0, f"{bad_claims} claimed solutions failed replay"
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"equivalence check took {elapsed:.1f}s, budget is 60s"


def test_c3_reference_trace(capsys) -> None:
    """`solve --strategy oracle` on 74,24,36,44 -> 18: three ops ending in
    98-80=18 and the exact goal line."""
    code = main(["solve", "--nums", "74,24,36,44", "--target", "18", "--strategy", "oracle"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.rstrip("\n").split("\n")
    explore = [ln for ln in lines if ln.startswith("Exploring Operation: ")]
    assert len(explore) == 3, f"expected 3 ops, trace explored {len(explore)}"
    assert explore[-1].startswith("Exploring Operation: 98-80=18,"), explore[-1]
    assert lines[-1] == "18,18 equal: Goal Reached"


def test_c4_dataset_correct_rate() -> None:
    """50,000 default-mix trajectories have a correct fraction in [0.45, 0.70]
    in under ten minutes."""
    start = time.monotonic()
    correct = 0
    total = 0
    for record in generate_sos_dataset(50_000, 404, workers=WORKERS):
        total += 1
        correct += record.correct
    elapsed = time.monotonic() - start
    fraction = correct / total
    assert elapsed < 600.0, f"generation took {elapsed:.1f}s, budget is 600s"
    assert 0.45 <= fraction <= 0.70, (
        f"correct fraction {fraction:.3f} outside [0.45, 0.70]: rejection-sampled "
        f"solvable problems with uniform inputs are easier than the window assumes, "
        f"so the twelve incomplete strategies succeed too often"
    )


def _classify(report) -> str:
    counts = report.errors.as_dict()
    best = max(counts.values())
    for category in CATEGORIES:  # precedence order breaks ties
        if counts[category] == best:
            return category
    raise AssertionError("unreachable")


def test_c5_corruption_taxonomy(sos_pool) -> None:
    """1,000 traces x 4 seeded corruption kinds classify into the intended
    category at >= 99.9% per kind."""
    records, _ = sos_pool
    pool = [
        r for r in records
        if "Exploring Operation: " in r.trajectory_text
        and "Generated Node #" in r.trajectory_text
    ][:1000]
    assert len(pool) == 1000, f"only {len(pool)} corruptible traces in the pool"
    rates = {}
    for kind in CORRUPTION_KINDS:
        hits = 0
        for i, record in enumerate(pool):
            rng = random.Random(derive_seed(5, "corrupt", kind, i))
            mangled = corrupt(record.trajectory_text, kind, rng)
            if _classify(validate(mangled, record.problem)) == kind:
                hits += 1
        rates[kind] = hits / len(pool)
    for kind, rate in rates.items():
        assert rate >= 0.999, f"{kind}: classified correctly at {rate:.4f} < 0.999 ({rates})"


def test_c6_metric_properties(sos_pool) -> None:
    """Alignment symmetry/reflexivity/bounds on 10,000 pairs, phi against
    closed form at 1e-12, and the 12x12 same-heuristic alignment pattern."""
    records, _ = sos_pool
    trajectories = [parse(r.trajectory_text, strict=True)[0] for r in records[:300]]
    for t in trajectories:
        assert state_alignment(t, t) == 1.0
    rng = random.Random(303)
    violations = 0
    for _ in range(10_000):
        a = trajectories[rng.randrange(len(trajectories))]
        b = trajectories[rng.randrange(len(trajectories))]
        v = state_alignment(a, b)
        if not (0.0 <= v <= 1.0) or v != state_alignment(b, a):
            violations += 1
    assert violations == 0, f"{violations} alignment property violations"

    T, F = True, False
    cases = [
        (((T, T, F, F), (T, F, T, F)), 0.0),
        (((T, T, F, F), (T, T, F, F)), 1.0),
        (((T, T, F, F), (F, F, T, T)), -1.0),
        (((T, T, T, F), (T, F, F, F)), 1.0 / 3.0),
        (((T, F, F, F), (T, T, F, F)), 2.0 / math.sqrt(12.0)),
    ]
    for (va, vb), expected in cases:
        assert abs(phi_correlation(va, vb) - expected) <= 1e-12

    problems = sample_problems(400, 606)
    runs = {cfg.name: [run_strategy(cfg, p) for p in problems] for cfg in all_strategies()}
    matrix = alignment_matrix(runs)
    assert len(matrix) == 144
    sum_names = [name for name in runs if name.endswith("sum")]
    mul_names = [name for name in runs if name.endswith("multiply")]
    within = [matrix[(a, b)] for a in sum_names for b in sum_names if a != b]
    cross = [matrix[(a, b)] for a in sum_names for b in mul_names]
    mean_within = sum(within) / len(within)
    mean_cross = sum(cross) / len(cross)
    assert mean_within > mean_cross, (
        f"same-heuristic alignment {mean_within:.4f} not above cross-heuristic "
        f"{mean_cross:.4f}: alignment divides shared states by the LARGER state "
        f"set, so same-heuristic pairs at different breadths (subset-shaped, but "
        f"very different sizes) score low while equal-breadth cross pairs score "
        f"~0.9 because the two heuristics rank children almost identically; the "
        f"expected pattern only emerges under min-normalization, which the "
        f"alignment formula rules out"
    )


def test_c7_worker_determinism(capsys, tmp_path) -> None:
    """gen-dataset --n 10000 --seed 7 writes byte-identical files with 1 and
    8 workers."""
    digests = []
    for workers, name in ((1, "w1.jsonl"), (8, "w8.jsonl")):
        path = tmp_path / name
        code = main([
            "gen-dataset", "--n", "10000", "--seed", "7",
            "--out", str(path), "--workers", str(workers),
        ])
        capsys.readouterr()
        assert code == 0
        digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
    assert digests[0] == digests[1], "worker count changed the output bytes"


def test_c8_star_filter_soundness(sos_pool) -> None:
    """A seeded 60/40 clean/corrupt mix keeps exactly the 60; idempotent."""
    records, _ = sos_pool
    candidates = [
        r for r in records
        if r.correct and "Generated Node #" in r.trajectory_text
    ][:100]
    assert len(candidates) == 100
    rng = random.Random(808)
    mixed = []
    clean_keys = set()
    for i, record in enumerate(candidates):
        if i % 5 < 2:  # 40 of 100 corrupted
            mixed.append(replace(
                record,
                trajectory_text=corrupt(record.trajectory_text, "arithmetic", rng),
            ))
        else:
            mixed.append(record)
            clean_keys.add(problem_key(record.problem))
    kept = list(star_filter(mixed))
    assert len(kept) == 60, f"kept {len(kept)} of an expected 60"
    assert {problem_key(r.problem) for r in kept} == clean_keys
    again = list(star_filter(kept))
    assert again == kept, "second filter pass changed the output"
