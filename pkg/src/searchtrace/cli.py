"""Command-line entry point.

Every subcommand that writes files also writes ``<out>.manifest.json``
recording the tool version, the subcommand, and the full flag set (no
timestamps), so any output can be reproduced byte-for-byte by re-running
its manifest.  Exit codes: 0 success, 1 usage error, 2 data error (bad
input file, naming the offending record).

All randomness flows from ``--seed`` through per-record derived seeds, so
``--workers`` never changes output bytes.  The default worker count comes
from the SEARCHTRACE_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .datasetgen import (
    DatasetRecord,
    OPTIMAL_STRATEGY_NAME,
    SplitPlan,
    generate_op_dataset,
    generate_sos_dataset,
    read_records,
    sample_problems,
    write_records,
)
from .domain import Problem, Split
from .metrics import (
    DegenerateVector,
    mean_state_alignment,
    phi_correlation,
)
from .oracle import classify_difficulty, is_solvable, oracle_trajectory
from .star import problem_key, star_filter
from .strategies import all_strategies, run_strategy, strategy_by_name
from .tracelang import (
    CurrentState,
    NoSolution,
    TraceFormat,
    Trajectory,
    parse,
    serialize,
)
from .validation import batch_report, validate

WORKERS_ENV = "SEARCHTRACE_WORKERS"
ORACLE_NAMES = ("oracle", OPTIMAL_STRATEGY_NAME)


class DataError(Exception):
    """Bad input data; exits 2 and names the offending record."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _nums_arg(text: str) -> tuple[int, ...]:
    try:
        nums = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if len(nums) not in (3, 4):
        raise argparse.ArgumentTypeError("expected 3 or 4 numbers")
    return nums


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_manifest(out: Path, subcommand: str, args: argparse.Namespace) -> None:
    config = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key != "func" and not key.startswith("_")
    }
    manifest = {
        "tool": "searchtrace",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
    }
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_problems(path: Path) -> list[Problem]:
    problems = []
    try:
        with open(path, encoding="utf-8") as fp:
            for line_no, line in enumerate(fp, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    problems.append(
                        Problem(
                            int(obj["target"]),
                            tuple(int(v) for v in obj["nums"]),
                            Split(obj.get("split", "train")),
                        )
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    raise DataError(f"{path}: record {line_no}: {exc}") from exc
    except OSError as exc:
        raise DataError(str(exc)) from exc
    return problems


def _load_rollout_texts(path: Path, fmt: str) -> list[str]:
    """Trajectory texts only; jsonl rows need a ``trajectory`` field, txt is
    blank-line-separated traces."""
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(str(exc)) from exc
    if fmt == "txt":
        return [chunk.strip("\n") for chunk in raw.split("\n\n") if chunk.strip()]
    texts = []
    for line_no, line in enumerate(raw.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            texts.append(str(obj["trajectory"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise DataError(f"{path}: record {line_no}: {exc}") from exc
    return texts


def _read_records_or_die(path: Path) -> list[DatasetRecord]:
    try:
        return read_records(path)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _pair_by_index(problems: list[Problem], texts: list[str]) -> list[tuple[Problem, str]]:
    if len(problems) != len(texts):
        raise DataError(
            f"problem/rollout count mismatch: {len(problems)} problems vs {len(texts)} rollouts"
        )
    return list(zip(problems, texts))


# --- subcommands -------------------------------------------------------------


def _cmd_gen_problems(args: argparse.Namespace) -> int:
    plan = SplitPlan.from_seed(args.seed)
    problems = sample_problems(
        args.n, args.seed, plan=plan, split=Split(args.split), num_inputs=args.num_inputs
    )
    with open(args.out, "w", encoding="utf-8") as fp:
        for problem in problems:
            fp.write(
                json.dumps(
                    {
                        "target": problem.target,
                        "nums": list(problem.inputs),
                        "split": problem.split.value,
                    }
                )
                + "\n"
            )
    _write_manifest(args.out, "gen-problems", args)
    return 0


def _cmd_gen_dataset(args: argparse.Namespace) -> int:
    if args.condition == "op" and args.strategy is not None:
        raise DataError("--strategy applies only to --condition sos")
    plan = SplitPlan.from_seed(args.seed)
    common = dict(
        plan=plan,
        split=Split(args.split),
        num_inputs=args.num_inputs,
        workers=args.workers,
    )
    if args.condition == "sos":
        records = generate_sos_dataset(args.n, args.seed, strategy=args.strategy, **common)
    else:
        records = generate_op_dataset(args.n, args.seed, **common)
    with open(args.out, "w", encoding="utf-8") as fp:
        if args.format == "txt":
            first = True
            for record in records:
                if not first:
                    fp.write("\n")
                fp.write(record.trajectory_text + "\n")
                first = False
        else:
            write_records(records, fp)
    _write_manifest(args.out, "gen-dataset", args)
    return 0


def _no_solution_trace(problem: Problem) -> Trajectory:
    events = (CurrentState(problem.target, problem.inputs, ()), NoSolution())
    return Trajectory(problem, TraceFormat.SOS, events)


def _cmd_solve(args: argparse.Namespace) -> int:
    problem = Problem(args.target, args.nums)
    if args.strategy in ORACLE_NAMES:
        traj = oracle_trajectory(problem, args.require_all_used)
        if traj is None:
            traj = _no_solution_trace(problem)
    else:
        cfg = strategy_by_name(args.strategy)
        traj = run_strategy(cfg, problem, args.budget, args.require_all_used)
    print(serialize(traj))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    problems = _load_problems(args.problems)
    texts = _load_rollout_texts(args.rollouts, args.format)
    pairs = _pair_by_index(problems, texts)
    reports = [validate(text, problem) for problem, text in pairs]
    summary = batch_report(reports) if reports else None
    payload = {
        "n": len(reports),
        "summary": summary.as_dict() if summary else None,
        "reports": [report.as_dict() for report in reports],
    }
    args.out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    _write_manifest(args.out, "validate", args)
    return 0


def _cmd_star_filter(args: argparse.Namespace) -> int:
    problems = _load_problems(args.problems)
    if args.format == "jsonl":
        rollouts = _read_records_or_die(args.rollouts)
        if len(rollouts) != len(problems):
            raise DataError(
                f"problem/rollout count mismatch: {len(problems)} problems"
                f" vs {len(rollouts)} rollouts"
            )
        items = [
            replace(record, problem=problem) for problem, record in zip(problems, rollouts)
        ]
    else:
        items = _pair_by_index(problems, _load_rollout_texts(args.rollouts, args.format))
    with open(args.out, "w", encoding="utf-8") as fp:
        kept = write_records(star_filter(items), fp)
    _write_manifest(args.out, "star-filter", args)
    print(f"kept {kept} of {len(problems)}")
    return 0


def _grouped_runs(path: Path) -> dict[str, list[DatasetRecord]]:
    groups: dict[str, list[DatasetRecord]] = {}
    for record in _read_records_or_die(path):
        groups.setdefault(record.strategy, []).append(record)
    if not groups:
        raise DataError(f"{path}: no records")
    keys = None
    for name, records in groups.items():
        seq = [problem_key(r.problem) for r in records]
        if keys is None:
            keys = seq
        elif seq != keys:
            raise DataError(f"{path}: strategy {name!r} covers a different problem sequence")
    return groups


def _parse_group(records: list[DatasetRecord]) -> list[Trajectory]:
    return [
        parse(r.trajectory_text, strict=False, problem=r.problem)[0] for r in records
    ]


def _cmd_metrics(args: argparse.Namespace) -> int:
    groups_a = _grouped_runs(args.runs_a)
    groups_b = _grouped_runs(args.runs_b)
    keys_a = [problem_key(r.problem) for r in next(iter(groups_a.values()))]
    keys_b = [problem_key(r.problem) for r in next(iter(groups_b.values()))]
    if keys_a != keys_b:
        raise DataError("runs-a and runs-b cover different problem sequences")

    names_a, names_b = list(groups_a), list(groups_b)
    correct_a = {n: [r.correct for r in g] for n, g in groups_a.items()}
    correct_b = {n: [r.correct for r in g] for n, g in groups_b.items()}
    trajs_a = {n: _parse_group(g) for n, g in groups_a.items()}
    trajs_b = {n: _parse_group(g) for n, g in groups_b.items()}

    phi: list[list[float | None]] = []
    align: list[list[float]] = []
    for name_a in names_a:
        phi_row: list[float | None] = []
        align_row: list[float] = []
        for name_b in names_b:
            try:
                phi_row.append(phi_correlation(correct_a[name_a], correct_b[name_b]))
            except DegenerateVector:
                phi_row.append(None)
            align_row.append(mean_state_alignment(trajs_a[name_a], trajs_b[name_b]))
        phi.append(phi_row)
        align.append(align_row)

    out: Path = args.out
    stem = out.with_suffix("") if out.suffix else out

    def write_matrix(path: Path, matrix: list[list]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow([""] + names_b)
            for name_a, row in zip(names_a, matrix):
                writer.writerow([name_a] + ["" if v is None else f"{v:.6f}" for v in row])

    write_matrix(out, phi)
    write_matrix(stem.with_name(stem.name + ".alignment.csv"), align)
    with open(stem.with_name(stem.name + ".vectors.csv"), "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(["file", "strategy"] + [f"p{i}" for i in range(len(keys_a))])
        for name in names_a:
            writer.writerow(["a", name] + [int(v) for v in correct_a[name]])
        for name in names_b:
            writer.writerow(["b", name] + [int(v) for v in correct_b[name]])
    stem.with_name(stem.name + ".json").write_text(
        json.dumps(
            {
                "strategies_a": names_a,
                "strategies_b": names_b,
                "n_problems": len(keys_a),
                "phi": phi,
                "alignment": align,
                "correctness_a": {n: [bool(v) for v in vec] for n, vec in correct_a.items()},
                "correctness_b": {n: [bool(v) for v in vec] for n, vec in correct_b.items()},
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    _write_manifest(out, "metrics", args)
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    records = _read_records_or_die(args.data)
    if not records:
        raise DataError(f"{args.data}: no records")
    reports = [validate(r.trajectory_text, r.problem) for r in records]
    summary = batch_report(reports)
    by_split: dict[str, int] = {}
    by_strategy: dict[str, int] = {}
    for record in records:
        by_split[record.problem.split.value] = by_split.get(record.problem.split.value, 0) + 1
        by_strategy[record.strategy] = by_strategy.get(record.strategy, 0) + 1
    flag_disagreements = sum(
        1 for record, report in zip(records, reports) if record.correct != report.correct
    )
    payload = {
        "n": len(records),
        "by_split": dict(sorted(by_split.items())),
        "by_strategy": dict(sorted(by_strategy.items())),
        "correct_flag_disagreements": flag_disagreements,
        "summary": summary.as_dict(),
    }
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out is not None:
        args.out.write_text(text + "\n", encoding="utf-8")
        _write_manifest(args.out, "stats", args)
    return 0


def _difficulty_obj(problem: Problem) -> dict:
    mask = classify_difficulty(problem)
    names = [cfg.name for i, cfg in enumerate(all_strategies()) if mask & (1 << i)]
    return {
        "target": problem.target,
        "nums": list(problem.inputs),
        "mask": mask,
        "solved_by": names,
        "solvable": is_solvable(problem),
        "difficult": mask == 0 and is_solvable(problem),
    }


def _cmd_difficulty(args: argparse.Namespace) -> int:
    if args.problems is not None:
        if args.out is None:
            raise DataError("--problems needs --out")
        problems = _load_problems(args.problems)
        with open(args.out, "w", encoding="utf-8") as fp:
            for problem in problems:
                fp.write(json.dumps(_difficulty_obj(problem)) + "\n")
        _write_manifest(args.out, "difficulty", args)
        return 0
    if args.nums is None or args.target is None:
        raise DataError("need either --problems or both --nums and --target")
    print(json.dumps(_difficulty_obj(Problem(args.target, args.nums)), indent=2))
    return 0


# --- parser wiring -----------------------------------------------------------


def _strategy_names() -> list[str]:
    return [cfg.name for cfg in all_strategies()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="searchtrace", description=__doc__)
    parser.add_argument("--version", action="version", version=f"searchtrace {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add_common_gen(p: argparse.ArgumentParser) -> None:
        p.add_argument("--n", type=int, required=True, help="number of problems")
        p.add_argument("--seed", type=int, required=True, help="master seed")
        p.add_argument("--out", type=Path, required=True, help="output path")
        p.add_argument(
            "--split",
            choices=[s.value for s in Split],
            default=Split.TRAIN.value,
            help="which split rule the targets must satisfy",
        )
        p.add_argument("--num-inputs", type=int, choices=(3, 4), default=4)

    p = sub.add_parser("gen-problems", help="sample solvable problems to JSON lines")
    add_common_gen(p)
    p.set_defaults(func=_cmd_gen_problems)

    p = sub.add_parser("gen-dataset", help="generate a trajectory dataset")
    add_common_gen(p)
    p.add_argument("--condition", choices=("sos", "op"), default="sos")
    p.add_argument(
        "--strategy",
        choices=_strategy_names(),
        default=None,
        help="fix one strategy instead of the uniform mix (sos only)",
    )
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--format", choices=("jsonl", "txt"), default="jsonl")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("solve", help="run one problem and print its trace")
    p.add_argument("--nums", type=_nums_arg, required=True, help="comma-separated inputs")
    p.add_argument("--target", type=int, required=True)
    p.add_argument(
        "--strategy",
        choices=list(ORACLE_NAMES) + _strategy_names(),
        default="oracle",
    )
    p.add_argument("--budget", type=int, default=None, help="node budget (strategies only)")
    p.add_argument(
        "--require-all-used",
        action="store_true",
        help="goal must consume every input number",
    )
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("validate", help="score rollouts against their problems")
    p.add_argument("--problems", type=Path, required=True)
    p.add_argument("--rollouts", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="report JSON path")
    p.add_argument("--format", choices=("jsonl", "txt"), default="jsonl")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("metrics", help="phi and state-alignment matrices between runs")
    p.add_argument("--runs-a", type=Path, required=True)
    p.add_argument("--runs-b", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="phi matrix CSV path")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("star-filter", help="keep first correct rollout per problem")
    p.add_argument("--rollouts", type=Path, required=True)
    p.add_argument("--problems", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=("jsonl", "txt"), default="jsonl")
    p.set_defaults(func=_cmd_star_filter)

    p = sub.add_parser("stats", help="summarize a dataset file")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="also write the JSON here")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("difficulty", help="strategy bitmask classification")
    p.add_argument("--nums", type=_nums_arg, default=None)
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--problems", type=Path, default=None, help="batch mode input")
    p.add_argument("--out", type=Path, default=None, help="batch mode output")
    p.set_defaults(func=_cmd_difficulty)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
