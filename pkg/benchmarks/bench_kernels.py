"""Kernel backend benchmark: pure Python twin vs the compiled extension.

Runs identical workloads against both kernel modules and reports per-problem
times plus the speedup ratio.  Workloads mirror how the toolkit actually
uses the kernels: raw op enumeration, exhaustive solution counting,
solvability checks, optimal-path search, and the twelve no-trace strategy
sims behind difficulty classification.  Each workload returns a checksum so
the run doubles as a backend-agreement check.

Usage: python3 benchmarks/bench_kernels.py [--problems N] [--seed S]
"""

from __future__ import annotations

import argparse
import sys
import time

from searchtrace._kernel import pykernel

try:
    from searchtrace._kernel import ckernel
except ImportError:
    ckernel = None

from searchtrace.datasetgen import SplitPlan, sample_problems
from searchtrace.strategies import (
    HeuristicKind,
    PruneDirection,
    SearchKind,
    SelectDirection,
    all_strategies,
)


def bench_enum_ops(k, problems) -> int:
    total = 0
    for p in problems:
        state = p.inputs
        # enumerate at every depth of one greedy walk, not just the root
        while len(state) >= 2:
            ops = k.enum_ops(state)
            total += len(ops)
            lhs, rhs, _, result = ops[0]
            state = k.child_state(state, lhs, rhs, result)
    return total


def bench_solve_exhaustive(k, problems) -> int:
    return sum(k.solve_exhaustive(p.inputs, p.target)[0] for p in problems)


def bench_solvable(k, problems) -> int:
    return sum(1 for p in problems if k.solvable(p.inputs, p.target))


def bench_shortest_path(k, problems) -> int:
    total = 0
    for p in problems:
        path = k.shortest_path(p.inputs, p.target)
        if path is not None:
            total += len(path)
    return total


def bench_strategy_sims(k, problems) -> int:
    """The difficulty-classification workload: all twelve sims per problem."""
    checksum = 0
    configs = all_strategies()
    for p in problems:
        mask = 0
        for bit, cfg in enumerate(configs):
            h = k.HEURISTIC_SUM if cfg.heuristic is HeuristicKind.SUM else k.HEURISTIC_MULTIPLY
            if cfg.kind is SearchKind.DFS:
                threshold = cfg.threshold if cfg.threshold is not None else p.target
                hit = k.dfs_solves(
                    p.inputs, p.target, h, threshold,
                    cfg.prune_direction is PruneDirection.KEEP_LE,
                )
            else:
                hit = k.bfs_solves(
                    p.inputs, p.target, h, cfg.breadth_limit,
                    cfg.select_direction is SelectDirection.MIN,
                )
            if hit:
                mask |= 1 << bit
        checksum += mask
    return checksum


WORKLOADS = (
    ("enum_ops walk", bench_enum_ops),
    ("solve_exhaustive", bench_solve_exhaustive),
    ("solvable", bench_solvable),
    ("shortest_path", bench_shortest_path),
    ("strategy sims x12", bench_strategy_sims),
)


def run(fn, k, problems) -> tuple[float, int]:
    start = time.perf_counter()
    checksum = fn(k, problems)
    return time.perf_counter() - start, checksum


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--problems", type=int, default=400, help="problems per workload")
    parser.add_argument("--seed", type=int, default=11, help="problem sampling seed")
    args = parser.parse_args(argv)

    plan = SplitPlan.from_seed(args.seed)
    problems = sample_problems(args.problems, args.seed, plan=plan)
    print(f"{len(problems)} problems, seed {args.seed}")

    if ckernel is None:
        print("compiled kernel not built; timing the pure backend only")
    backends = [("pure", pykernel)] + ([("compiled", ckernel)] if ckernel else [])

    width = max(len(name) for name, _ in WORKLOADS)
    header = f"{'workload':<{width}}  " + "".join(f"{name:>12} " for name, _ in backends)
    if ckernel is not None:
        header += f"{'speedup':>9}"
    print(header)
    print("-" * len(header))

    agree = True
    for name, fn in WORKLOADS:
        times = []
        checksums = []
        for _, k in backends:
            elapsed, checksum = run(fn, k, problems)
            times.append(elapsed)
            checksums.append(checksum)
        cells = "".join(f"{t / len(problems) * 1e6:>10.1f}us " for t in times)
        line = f"{name:<{width}}  {cells}"
        if ckernel is not None:
            line += f"{times[0] / times[1]:>8.1f}x"
            if checksums[0] != checksums[1]:
                agree = False
                line += "  BACKENDS DISAGREE"
        print(line)

    if not agree:
        print("checksum mismatch between backends", file=sys.stderr)
        return 1
    if ckernel is not None:
        print("checksums agree across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
