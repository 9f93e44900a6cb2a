"""Command-line front end.

Exit codes: 0 success, 2 input format error, 3 precondition violation,
4 internal invariant breach. Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from collections.abc import Sequence

from . import io
from .attack import btta_attack, cbtta_attack
from .demo import DemoConfig, run_demo
from .errors import AuditError, CategoryMismatch
from .estimation import assume_uniform_q, compute_stats, estimate_from_shadows
from .evaluation import score, table1_reproduction
from .partition import PartitionScheme
from .simulation import SimConfig, enumerate_rules_oracle, monte_carlo_metrics, simulate_outcomes
from .stats import GlobalStats, expected_metrics, global_from_categories, vulnerability_lower_bound


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle


def _emit(obj, path: str | None = None) -> None:
    with _output(path) as out:
        out.write(io.dumps_json(obj))


def _scheme(text: str, force: bool = False) -> PartitionScheme:
    return PartitionScheme.parse(text, force=force)


def _explicit(values: Sequence[float]) -> GlobalStats:
    return GlobalStats(*values)


def cmd_stats(args) -> int:
    dump = io.read_dump(args.input)
    scheme = _scheme(args.scheme, args.force)
    per_category = compute_stats(dump, scheme)
    _emit(io.stats_to_json(scheme, dump.m, per_category), args.out)
    return 0


def _check_stats_fit(scheme: PartitionScheme, m: int | None, per_category, dump_m: int | None) -> None:
    if m is not None and dump_m is not None and m != dump_m:
        raise CategoryMismatch(f"stats were built for m={m} labels, input has m={dump_m}")
    if dump_m is None:
        return
    # label coordinates are 0-based, interval coordinates 1-based
    ranges = [range(dump_m) if f.n is None else range(1, f.n + 1) for f in scheme.factors]
    for cid in per_category:
        if len(cid) != len(ranges) or any(c not in r for c, r in zip(cid, ranges)):
            raise CategoryMismatch(f"category {cid} does not belong to scheme {scheme} with m={dump_m}")


def cmd_attack(args) -> int:
    dump = io.read_dump(args.input)
    if args.explicit is not None:
        decisions = btta_attack(_explicit(args.explicit), dump.records)
    else:
        if args.stats is not None:
            scheme, m, per_category, aggregate = io.stats_from_json(io.read_json(args.stats))
            if args.scheme is not None and str(_scheme(args.scheme, True)) != str(scheme):
                raise CategoryMismatch(f"stats were built for scheme {scheme}, not {args.scheme}")
        else:
            scheme = _scheme(args.scheme or "ppl", args.force)
            shadows = [io.read_dump(p) for p in args.shadow]
            m = shadows[0].m
            per_category, aggregate = estimate_from_shadows(shadows, scheme), None
        if args.uniform_q is not None:
            per_category = assume_uniform_q(per_category, args.uniform_q)
        _check_stats_fit(scheme, m, per_category, dump.m)
        fallback = aggregate or global_from_categories(per_category.values())
        decisions = cbtta_attack(scheme, per_category, fallback, dump.records)
    with _output(args.out) as out:
        io.write_decisions(decisions, out)
    return 0


def cmd_evaluate(args) -> int:
    decisions = io.read_decisions(args.decisions)
    truth = io.read_dump(args.truth)
    stats = None
    if args.explicit is not None:
        stats = _explicit(args.explicit)
    elif args.stats is not None:
        _, _, stats, _ = io.stats_from_json(io.read_json(args.stats))
    _emit(score(decisions, truth, stats).to_dict(), args.out)
    return 0


def cmd_simulate(args) -> int:
    config = SimConfig(GlobalStats(args.q, args.p0, args.p1), args.n, args.seed)
    if args.metrics:
        confusion = monte_carlo_metrics(config)
        doc = {"n": args.n, "seed": args.seed, "empirical": confusion.metrics(), "counts": confusion.counts()}
        if config.stats.gap_ok:
            doc["expected"] = expected_metrics(config.stats).to_dict()
        _emit(doc, args.out)
        return 0
    dump = simulate_outcomes(config)
    with _output(args.out) as out:
        io.write_dump(dump, out, "jsonl")
    return 0


def cmd_oracle(args) -> int:
    stats = GlobalStats(args.q, args.p0, args.p1)
    (on_correct, on_wrong), best = enumerate_rules_oracle(stats)
    _emit({"best_rule": {"correct": on_correct.value, "incorrect": on_wrong.value}, "best_accuracy": best})
    return 0


def cmd_bound(args) -> int:
    bound, weak = vulnerability_lower_bound(GlobalStats(args.q, args.p0, args.p1))
    _emit({"bound": bound, "weak_bound": weak})
    return 0


def cmd_shadow_estimate(args) -> int:
    scheme = _scheme(args.scheme, args.force)
    shadows = [io.read_dump(p) for p in args.inputs]
    per_category = estimate_from_shadows(shadows, scheme)
    if args.uniform_q is not None:
        per_category = assume_uniform_q(per_category, args.uniform_q)
    _emit(io.stats_to_json(scheme, shadows[0].m, per_category), args.out)
    return 0


def cmd_table1(args) -> int:
    rows = table1_reproduction()
    if args.json:
        _emit([{"dataset": r.dataset, "p0": r.p0, "p1": r.p1, "btta_precision": r.btta_precision} for r in rows])
        return 0
    print(f"{'dataset':<16}{'train':>7}{'test':>7}{'precision':>11}")
    for r in rows:
        print(f"{r.dataset:<16}{r.p0:>7.3f}{r.p1:>7.3f}{r.rendered:>11}")
    return 0


def cmd_demo(args) -> int:
    config = DemoConfig(seed=args.seed, shadows=args.shadows, records=args.records, scheme=args.scheme)
    _emit(run_demo(config), args.out)
    return 0


def _triple(p: argparse.ArgumentParser) -> None:
    p.add_argument("q", type=float, help="training proportion")
    p.add_argument("p0", type=float, help="train accuracy")
    p.add_argument("p1", type=float, help="test accuracy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mia-audit", description="Membership-inference audits from accuracy statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-category statistics of a dump with split tags")
    p.add_argument("input")
    p.add_argument("--scheme", default="ptc:1", help="partition, e.g. ppl, ptc:10, ppl+ppc:5")
    p.add_argument("--force", action="store_true", help="allow the ptl+ppl product")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("attack", help="membership decision per record")
    p.add_argument("input")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--stats", help="stats JSON from `stats` or `shadow-estimate`")
    source.add_argument("--shadow", nargs="+", metavar="DUMP", help="shadow dumps to estimate from")
    source.add_argument("--explicit", nargs=3, type=float, metavar=("Q", "P0", "P1"))
    p.add_argument("--scheme", help="partition; must match the stats file if both are given")
    p.add_argument("--uniform-q", type=float, help="impose this training proportion on every category")
    p.add_argument("--force", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", help="score decisions against a dump with split tags")
    p.add_argument("decisions")
    p.add_argument("truth")
    expected = p.add_mutually_exclusive_group()
    expected.add_argument("--stats", help="stats JSON for expected metrics")
    expected.add_argument("--explicit", nargs=3, type=float, metavar=("Q", "P0", "P1"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="sample a dump (or its attack metrics) from (q, p0, p1)")
    _triple(p)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", action="store_true", help="print Monte Carlo metrics instead of the dump")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="best of the four deterministic rules")
    _triple(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bound", help="lower bound on attainable attack accuracy")
    _triple(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("shadow-estimate", help="stats estimated from shadow dumps")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--scheme", default="ppl")
    p.add_argument("--uniform-q", type=float)
    p.add_argument("--force", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_shadow_estimate)

    p = sub.add_parser("table1", help="expected precision for the published (train, test) accuracies")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("demo", help="toy pipeline: train target and shadows, attack, score")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--shadows", type=int, default=20)
    p.add_argument("--records", type=int, default=10_000, help="records per model dump")
    p.add_argument("--scheme", default="ppl")
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AuditError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return exc.exit_code
    except BrokenPipeError:
        # downstream reader closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "InputFormatError", "message": str(exc), "exit_code": 2}) + "\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(json.dumps({"error": "InternalError", "message": repr(exc), "exit_code": 4}) + "\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
