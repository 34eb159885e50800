"""Command-line surface: generate, split, stats, eval, verify.

Exit codes: 0 success, 1 usage, 2 I/O or malformed input, 3 generation
exhausted or internal failure, 4 verification failure. Every command is
deterministic given identical flags, inputs, and environment; machine
output is JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from .calculus import differentiate
from .datafiles import (
    DatasetFormatError,
    SplitSpec,
    dataset_stats,
    read_dataset,
    split_dataset,
    write_dataset,
)
from .evalkit import check_equiv_exprs, check_ode_solution, score_lines
from .prefix import MalformedSequenceError, decode
from .sampling import PRESET_NAMES, preset_profile
from .taskgen import (
    TOKEN_CAP,
    GenStats,
    GenerationExhausted,
    PrimitiveTable,
    SamplePair,
    TASKS,
    generate_samples,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_GENERATION = 3
EXIT_VERIFY = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _threads() -> int:
    raw = os.environ.get("SYMFORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_profile(args) -> "GenProfile":
    profile = preset_profile(args.profile, seed=args.seed)
    lo, hi = profile.n_ops_range
    if args.max_ops is not None:
        hi = args.max_ops
        lo = min(lo, hi)
    if getattr(args, "min_ops", None) is not None:
        lo = args.min_ops
        if lo > hi:
            raise ValueError(f"--min-ops {lo} exceeds --max-ops {hi}")
    return profile.with_ops_range(lo, hi)


def _worker_generate(spec) -> tuple[list[SamplePair], dict]:
    task, profile_json, count, seed = spec
    from .sampling import GenProfile

    stats = GenStats()
    pairs = generate_samples(task, GenProfile.from_json(profile_json), count, seed, stats=stats)
    return pairs, stats.to_dict()


def _generate_parallel(task, profile, count, seed, threads) -> tuple[list[SamplePair], dict]:
    """Seed-partitioned workers with an ordered merge; duplicates across
    chunks are dropped and topped up deterministically."""
    chunk = count // threads
    counts = [chunk + (1 if i < count % threads else 0) for i in range(threads)]
    specs = [
        (task, profile.to_json(), counts[i], seed ^ i) for i in range(threads) if counts[i] > 0
    ]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_worker_generate, specs))
    merged: list[SamplePair] = []
    seen = set()
    stats_total: dict = {"attempts": 0, "accepted": 0, "rejections": {}, "workers": len(specs)}
    for pairs, stats in results:
        stats_total["attempts"] += stats["attempts"]
        stats_total["accepted"] += stats["accepted"]
        for reason, n in stats["rejections"].items():
            stats_total["rejections"][reason] = stats_total["rejections"].get(reason, 0) + n
        for pair in pairs:
            if pair.problem in seen:
                continue
            seen.add(pair.problem)
            merged.append(pair)
    topup_round = 0
    while len(merged) < count:
        topup_round += 1
        need = count - len(merged)
        stats = GenStats()
        extra = generate_samples(
            task, profile, need + 16, seed ^ (threads + topup_round), stats=stats
        )
        stats_total["attempts"] += stats.attempts
        stats_total["accepted"] += stats.accepted
        for pair in extra:
            if pair.problem in seen:
                continue
            seen.add(pair.problem)
            merged.append(pair)
            if len(merged) >= count:
                break
    stats_total["rejections"] = dict(sorted(stats_total["rejections"].items()))
    return merged[:count], stats_total


def _load_table(path) -> PrimitiveTable:
    table = PrimitiveTable()
    for problem, solution in read_dataset(path):
        table.insert(decode(tuple(problem)), decode(tuple(solution)), verify=False)
    return table


def cmd_generate(args) -> int:
    profile = _build_profile(args)
    threads = _threads()
    try:
        if args.task == "ibp":
            # single-writer table contract: IBP does not parallelize
            table = _load_table(args.seed_table) if args.seed_table else PrimitiveTable()
            stats = GenStats()
            pairs = generate_samples(
                args.task, profile, args.count, args.seed, table=table, stats=stats
            )
            stats_doc = stats.to_dict()
        elif threads > 1:
            pairs, stats_doc = _generate_parallel(
                args.task, profile, args.count, args.seed, threads
            )
        else:
            stats = GenStats()
            pairs = generate_samples(args.task, profile, args.count, args.seed, stats=stats)
            stats_doc = stats.to_dict()
    except GenerationExhausted as exc:
        detail = "zero yield" if exc.stats.accepted == 0 else "low yield"
        print(f"generation exhausted ({detail}): {exc}", file=sys.stderr)
        print(json.dumps({"error": "generation-exhausted", "stats": exc.stats.to_dict()}))
        return EXIT_GENERATION

    meta = {
        "task": args.task,
        "seed": args.seed,
        "count": args.count,
        "profile": json.loads(profile.to_json()),
        "token_caps": {"problem": TOKEN_CAP, "solution": TOKEN_CAP},
        "stats": stats_doc,
    }
    write_dataset(args.out, pairs, meta)
    print(json.dumps({"written": len(pairs), "out": str(args.out), "stats": stats_doc}))
    return EXIT_OK


def cmd_split(args) -> int:
    rows = read_dataset(args.infile)
    spec = SplitSpec(args.train, args.valid, args.test)
    parts = split_dataset(rows, spec)
    sizes = {}
    for name, part in parts.items():
        out_path = f"{args.out_prefix}.{name}"
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            for problem, solution in part:
                fh.write(" ".join(problem) + "\t" + " ".join(solution) + "\n")
        sizes[name] = len(part)
    print(json.dumps({"sizes": sizes, "out_prefix": args.out_prefix}))
    return EXIT_OK


def cmd_stats(args) -> int:
    rows = read_dataset(args.infile)
    print(json.dumps(dataset_stats(rows), sort_keys=True))
    return EXIT_OK


def cmd_eval(args) -> int:
    from .datafiles import read_predictions

    refs = read_dataset(args.ref)
    preds = read_predictions(args.pred)
    if len(refs) != len(preds):
        print(
            f"error: length mismatch: {len(refs)} reference lines vs "
            f"{len(preds)} prediction lines",
            file=sys.stderr,
        )
        return EXIT_IO
    report = score_lines(args.task, refs, preds, args.mod_constant, workers=_threads())
    print(report.to_json())
    return EXIT_OK


def _verify_line(task: str, problem, solution) -> str | None:
    """None when the sample satisfies its task invariant, else a reason."""
    try:
        problem_expr = decode(tuple(problem))
        solution_expr = decode(tuple(solution))
    except MalformedSequenceError as exc:
        return f"does not decode: {exc}"
    if task in ("fwd", "bwd", "ibp"):
        verdict = check_equiv_exprs(differentiate(solution_expr, "x"), problem_expr)
        if not verdict.is_equivalent():
            return f"derivative of solution is not the problem: {verdict.outcome.value}"
        return None
    if task in ("ode1", "ode2"):
        verdict = check_ode_solution(problem_expr, solution_expr)
        if not verdict.is_equivalent():
            return f"solution does not satisfy the equation: {verdict.outcome.value}"
        return None
    return f"unknown task {task}"


def cmd_verify(args) -> int:
    from .datafiles import normal_form_key

    rows = read_dataset(args.infile)
    failures = []
    seen: dict[str, int] = {}
    for line_no, (problem, solution) in enumerate(rows, start=1):
        reason = _verify_line(args.task, problem, solution)
        if reason is None:
            key = normal_form_key(problem)
            first = seen.setdefault(key, line_no)
            if first != line_no:
                reason = f"duplicate normal-form problem (first at line {first})"
        if reason is not None:
            failures.append({"line": line_no, "reason": reason})
    doc = {
        "task": args.task,
        "total": len(rows),
        "passed": len(rows) - len(failures),
        "failures": failures,
    }
    print(json.dumps(doc))
    if failures:
        lines = ", ".join(str(f["line"]) for f in failures[:20])
        print(f"verification failed on lines: {lines}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="symforge", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="generate a verified dataset file")
    gen.add_argument("--task", required=True, choices=TASKS)
    gen.add_argument("--count", required=True, type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--profile", default="uniform", choices=PRESET_NAMES)
    gen.add_argument("--max-ops", type=int, default=None, help="cap on internal nodes")
    gen.add_argument("--min-ops", type=int, default=None, help="floor on internal nodes")
    gen.add_argument("--out", required=True)
    gen.add_argument(
        "--seed-table",
        default=None,
        help="dataset file whose pairs seed the IBP primitive table",
    )
    gen.set_defaults(func=cmd_generate)

    split = commands.add_parser("split", help="leakage-free train/valid/test split")
    split.add_argument("--in", dest="infile", required=True)
    split.add_argument("--out-prefix", required=True)
    split.add_argument("--train", type=float, default=0.8)
    split.add_argument("--valid", type=float, default=0.1)
    split.add_argument("--test", type=float, default=0.1)
    split.set_defaults(func=cmd_split)

    stats = commands.add_parser("stats", help="token-length and operator statistics")
    stats.add_argument("--in", dest="infile", required=True)
    stats.set_defaults(func=cmd_stats)

    ev = commands.add_parser("eval", help="score predictions against a reference file")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--ref", required=True)
    ev.add_argument("--task", required=True, choices=TASKS)
    ev.add_argument("--mod-constant", action="store_true")
    ev.set_defaults(func=cmd_eval)

    ver = commands.add_parser("verify", help="re-check every sample's task invariant")
    ver.add_argument("--in", dest="infile", required=True)
    ver.add_argument("--task", required=True, choices=TASKS)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DatasetFormatError) as exc:
        if isinstance(exc, DatasetFormatError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GENERATION


if __name__ == "__main__":
    sys.exit(main())
