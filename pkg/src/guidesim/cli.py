"""Command line interface: run scenario batches and aggregate result tables.

Exit codes: 0 completed, 2 scenario schema error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from .errors import ScenarioSchemaError
from .harness import (aggregate, execute, format_table, load_scenario,
                      records_from_csv, records_to_csv)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INTERNAL = 3


def _scenario_files(target: Path) -> list[Path]:
    if target.is_dir():
        files = sorted(target.glob("*.json"))
        if not files:
            raise ScenarioSchemaError(f"no *.json scenarios in {target}")
        return files
    return [target]


def _run_job(job):
    doc, seed, timeout = job
    return execute(doc, seed, timeout)


def _cmd_run(args) -> int:
    files = _scenario_files(Path(args.scenario))
    docs = [load_scenario(f) for f in files]
    jobs = []
    for doc in docs:
        for k in range(args.seeds):
            jobs.append((doc, doc.seed + k, args.timeout))

    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(job) for job in jobs]

    csv_text = records_to_csv(records)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    if args.json:
        for record in records:
            print(json.dumps(asdict(record), sort_keys=True))
    elif not args.out:
        sys.stdout.write(csv_text)
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    try:
        text = Path(args.results).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioSchemaError(f"cannot read results {args.results}: {exc}") from exc
    records = records_from_csv(text)
    if not records:
        raise ScenarioSchemaError(f"no records in {args.results}")
    sys.stdout.write(format_table(aggregate(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="guidesim")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run scenario file(s) and emit a results CSV")
    run_p.add_argument("scenario", help="scenario .json file or a directory of them")
    run_p.add_argument("--seeds", type=int, default=1, metavar="N",
                       help="seeds per scenario, starting at the file's seed")
    run_p.add_argument("--out", metavar="results.csv", help="write the CSV here")
    run_p.add_argument("--json", action="store_true",
                       help="print records as JSON lines instead of CSV")
    run_p.add_argument("--timeout", type=float, default=None, metavar="S",
                       help="override the simulated timeout in seconds")
    run_p.add_argument("--parallel", type=int, default=1, metavar="K",
                       help="worker processes (output order is unaffected)")
    run_p.set_defaults(func=_cmd_run)

    agg_p = sub.add_parser("aggregate", help="print the summary table for a results CSV")
    agg_p.add_argument("results", help="results CSV produced by 'run'")
    agg_p.set_defaults(func=_cmd_aggregate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioSchemaError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Exception as exc:  # structured failure, never a traceback
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
