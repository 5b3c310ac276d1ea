"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

import jsonschema

from .noise import from_depolarizing
from .numerics import BACKENDS
from .pipeline import Schedule, data_path, eval_schedule

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad input file; reported with exit code 2."""


def _schema(name: str) -> dict:
    with open(data_path(name)) as fh:
        return json.load(fh)


def load_schedule_file(path: str) -> dict:
    """Read and schema-check a schedule file, raising InputError with diagnostics."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(_schema("schedule.schema.json"))
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{path}: schedule does not match the schema"]
        for err in errors:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"  at {where}: {err.message}")
        raise InputError("\n".join(lines))
    return obj


def _emit(args, payload: dict, table: str):
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(table)


def cmd_eval(args) -> int:
    obj = load_schedule_file(args.schedule)
    try:
        schedule = Schedule.from_json(obj, args.backend)
        report = eval_schedule(schedule)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{args.schedule}: {exc}") from None
    _emit(args, report.to_json(), report.to_table(args.sig_figs))
    return EXIT_OK


def cmd_search(args) -> int:
    from .search import SearchSpec, search_bootstrap

    backend = args.backend or "rational"
    start = from_depolarizing(Fraction(args.infidelity), "rational")
    try:
        spec = SearchSpec(start, args.threshold, args.max_depth, args.all_minimal)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    res = search_bootstrap(spec)
    if not res.found:
        msg = f"no sequence of at most {args.max_depth} stages reaches {args.threshold:g}"
        _emit(args, {"found": False, "max_depth": args.max_depth, "explored": res.explored}, msg)
        return EXIT_CHECK_FAILED
    payload = {
        "found": True,
        "sequence": [str(b) for b in res.sequence],
        "minimal_solutions": ["".join(str(b) for b in s) for s in res.minimal_solutions],
        "explored": res.explored,
    }
    lines = [f"sequence: {res.sequence_str()} ({len(res.sequence)} stages)"]
    if args.all_minimal:
        lines.append("all minimal: " + " ".join("".join(str(b) for b in s) for s in res.minimal_solutions))
    if res.sequence:
        from .pipeline import Distill

        schedule = Schedule(start.convert(backend), [Distill(b) for b in res.sequence], backend)
        report = eval_schedule(schedule)
        payload["report"] = report.to_json()
        lines += ["", report.to_table()]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verification

    report = run_verification(args.cases, args.seed, args.strict_decay)
    _emit(args, report.to_json(), report.matrix())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_simulate(args) -> int:
    from .montecarlo import SimConfig, run_sim

    obj = load_schedule_file(args.schedule)
    try:
        schedule = Schedule.from_json(obj, args.backend or "rational")
        cfg = SimConfig(schedule, args.budget, args.seed)
    except ValueError as exc:
        raise InputError(f"{args.schedule}: {exc}") from None
    t0 = time.perf_counter()
    stats = run_sim(cfg)
    elapsed = time.perf_counter() - t0
    table = stats.to_table() + f"\nelapsed: {elapsed:.2f}s"
    _emit(args, stats.to_json(), table)
    return EXIT_OK


def cmd_repro(args) -> int:
    from .pipeline import fig3_schedule
    from .repro import compare_rows, render_comparison

    report = eval_schedule(fig3_schedule(args.backend or "extended"))
    rows, tail = compare_rows(report)
    if args.stage is not None and not (1 <= args.stage <= len(rows) + len(tail)):
        raise InputError(f"--stage must be between 1 and {len(rows) + len(tail)}")
    ok = all(r.match for r in rows)
    tail_ok = all(all(t.in_band) for t in tail[-1:])
    if args.format == "json":
        payload = {
            "rows": [
                {
                    "index": r.index,
                    "label": r.label,
                    "ours": [str(v) for v in r.ours],
                    "published": list(r.published),
                    "cell_match": list(r.cell_match),
                    "discard_percent": r.discard_ours,
                    "discard_percent_published": r.discard_published,
                    "match": r.match,
                }
                for r in rows
                if args.stage in (None, r.index)
            ],
            "tail": [
                {
                    "index": t.index,
                    "label": t.label,
                    "exponents": [str(e) for e in t.exponents],
                    "published_exponents": [str(e) for e in t.published],
                    "in_band": list(t.in_band),
                }
                for t in tail
                if args.stage in (None, t.index)
            ],
            "match": ok and tail_ok,
        }
        print(json.dumps(payload, indent=2))
    else:
        print(render_comparison(rows, tail, args.stage))
    return EXIT_OK if ok and tail_ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=sorted(BACKENDS), default=None,
                        help="numeric backend (default: the schedule's own, else rational)")
    common.add_argument("--format", choices=("table", "json"), default="table")

    parser = argparse.ArgumentParser(
        prog="tetrapurify",
        description="Evaluate, search, verify and simulate entanglement purification schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a schedule file")
    p.add_argument("schedule")
    p.add_argument("--sig-figs", type=int, default=2)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("search-bootstrap", parents=[common], help="brute-force a bootstrap sequence")
    p.add_argument("--infidelity", default="1/3", help="depolarizing input infidelity, e.g. 1/3")
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--all-minimal", action="store_true", help="list every minimal-length solution")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", parents=[common], help="check the algebra against circuit simulation")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict-decay", action="store_true",
                   help="count the oplus decay sampling toward the exit status")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run of a schedule")
    p.add_argument("--schedule", required=True)
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("repro-paper", parents=[common], help="compare the built-in ten-stage schedule with published values")
    p.add_argument("--stage", type=int, default=None)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
