"""Command-line entry points.

Subcommands::

    querysketch serve --schema s.json --data DIR --port 8080
    querysketch run   --schema s.json --data DIR --sketch sketch.txt
    querysketch bench --manifest cases.json --trace-out metrics.jsonl
    querysketch bench --synthetic-cases 20 --mode no-soft
    querysketch eval  --schema s.json --data DIR --query query.txt

Exit codes: 0 success, 1 user/input error, 2 synthesis failure, 3 timeout.

Benchmark metrics are JSON lines with the fields
{case, mode, iterations, accepts, rejects, seconds, status}. The seconds
field is null unless --timing is given, so equal-seed runs stay
byte-identical; measured timings always go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import lang as L
from .catalog import Catalog, load_database
from .datagen import generate_suite
from .engine import AWAITING, COMPLETE, answer, run_batch, start_session, undo
from .errors import EmptyHistory, QuerySketchError
from .interp import evaluate
from .sampler import SamplerConfig

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SYNTH = 2
EXIT_TIMEOUT = 3

PREVIEW_ROWS = 5


def _add_catalog_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--schema", help="path to the schema descriptor JSON")
    parser.add_argument("--data", help="directory holding the CSV files")


def _add_sampler_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=100,
                        help="completions sampled per question round")
    parser.add_argument("--mh-steps", type=int, default=1000)
    parser.add_argument("--max-join-depth", type=int, default=6)
    parser.add_argument("--rejection-retry-limit", type=int, default=10000)
    parser.add_argument("--lambda", dest="lambda_size", type=float, default=0.0,
                        help="size-bias weight added to completion scores")
    parser.add_argument("--no-soft", action="store_true",
                        help="strip soft constraints before synthesizing")


def _sampler_config(args: argparse.Namespace) -> SamplerConfig:
    return SamplerConfig(
        sample_count=args.samples,
        mh_steps=args.mh_steps,
        max_join_depth=args.max_join_depth,
        rejection_retry_limit=args.rejection_retry_limit,
        seed=args.seed,
        lambda_size=args.lambda_size,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="querysketch")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    _add_catalog_flags(serve)
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--persist-dir", help="directory for session snapshots")

    run = sub.add_parser("run", help="interactive terminal session")
    _add_catalog_flags(run)
    run.add_argument("--sketch", required=True, help="path to the sketch file")
    _add_sampler_flags(run)

    bench = sub.add_parser("bench", help="batch runs against ground-truth oracles")
    _add_catalog_flags(bench)
    bench.add_argument("--sketch", help="single-case sketch file")
    bench.add_argument("--oracle", help="single-case ground-truth query file")
    bench.add_argument("--manifest", help="JSON list of benchmark cases")
    bench.add_argument("--synthetic-cases", type=int, default=0,
                       help="generate and run this many synthetic cases")
    bench.add_argument("--synthetic-seed", type=int, default=0)
    bench.add_argument("--mode", choices=("full", "no-soft", "perfect"), default="full")
    bench.add_argument("--trace-out", help="write JSON-lines metrics to this file")
    bench.add_argument("--max-iterations", type=int, default=50)
    bench.add_argument("--time-budget", type=float, default=3600.0,
                       help="wall-clock budget per case, seconds")
    bench.add_argument("--timing", action="store_true",
                       help="record measured seconds in the metrics (breaks byte-identical output)")
    _add_sampler_flags(bench)

    evalp = sub.add_parser("eval", help="evaluate a concrete query to CSV on stdout")
    _add_catalog_flags(evalp)
    evalp.add_argument("--query", required=True, help="path to the query file")

    return parser


def _load_catalog(args: argparse.Namespace) -> Catalog:
    if not args.schema or not args.data:
        raise QuerySketchError("--schema and --data are required")
    return load_database(args.schema, args.data)


def _format_preview(catalog: Catalog, table: str) -> str:
    headers, rows = catalog.preview(table, PREVIEW_ROWS)
    cells = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = [f"  table {table}:"]
    lines.append("    " + " | ".join(h.ljust(w) for h, w in zip(headers, widths)))
    lines.append("    " + "-+-".join("-" * w for w in widths))
    for row in cells[1:]:
        lines.append("    " + " | ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def _print_question(state, out) -> None:
    scored = state.pending
    question = scored.question
    print(f"\n[{state.iteration + 1}] proposed refinement:", file=out)
    print(f"  {question.summary()}", file=out)
    print(f"  resulting sketch: {L.print_sketch(question.sketch)}", file=out)
    for table in question.display_tables():
        print(_format_preview(state.catalog, table), file=out)


def cmd_run(args: argparse.Namespace) -> int:
    out = sys.stdout
    try:
        catalog = _load_catalog(args)
        sketch_text = Path(args.sketch).read_text(encoding="utf-8")
        if args.no_soft:
            sketch_text = L.print_sketch(L.strip_soft(L.parse_sketch(sketch_text, catalog)))
        state = start_session(sketch_text, catalog, _sampler_config(args))
    except QuerySketchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    while state.status == AWAITING:
        _print_question(state, out)
        try:
            reply = input("accept this refinement? [y/n/u] ").strip().lower()
        except EOFError:
            print("session aborted", file=sys.stderr)
            return EXIT_INPUT
        if reply in ("y", "yes"):
            answer(state, True)
        elif reply in ("n", "no"):
            answer(state, False)
        elif reply in ("u", "undo"):
            try:
                undo(state)
            except EmptyHistory:
                print("nothing to undo", file=out)
        else:
            print("please answer y, n, or u", file=out)

    if state.status != COMPLETE:
        print(f"synthesis failed: {state.failure}", file=sys.stderr)
        return EXIT_SYNTH
    final = state.sketch
    print("\nfinal query:", file=out)
    print(L.print_sketch(final), file=out)
    print("\nresult:", file=out)
    print(evaluate(final, catalog).to_csv(), end="", file=out)
    return EXIT_OK


def _bench_cases(args: argparse.Namespace):
    """Yield (name, catalog, sketch ast, ground truth ast) benchmark cases."""
    if args.synthetic_cases:
        for case in generate_suite(args.synthetic_seed, args.synthetic_cases):
            yield case.name, case.catalog, case.sketch, case.ground_truth
        return
    if args.manifest:
        manifest_path = Path(args.manifest)
        entries = json.loads(manifest_path.read_text(encoding="utf-8"))
        for entry in entries:
            base = manifest_path.parent
            catalog = load_database(base / entry["schema"], base / entry["data"])
            sketch = L.parse_sketch((base / entry["sketch"]).read_text(encoding="utf-8"),
                                    catalog)
            gt = L.parse_sketch((base / entry["ground_truth"]).read_text(encoding="utf-8"),
                                catalog)
            yield entry.get("name", entry["sketch"]), catalog, sketch, gt
        return
    if not (args.sketch and args.oracle):
        raise QuerySketchError(
            "bench needs --manifest, --synthetic-cases, or --sketch with --oracle")
    catalog = _load_catalog(args)
    sketch = L.parse_sketch(Path(args.sketch).read_text(encoding="utf-8"), catalog)
    gt = L.parse_sketch(Path(args.oracle).read_text(encoding="utf-8"), catalog)
    yield Path(args.sketch).name, catalog, sketch, gt


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _sampler_config(args)
    mode = args.mode
    lines = []
    statuses = []
    try:
        cases = list(_bench_cases(args))
    except (QuerySketchError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    for name, catalog, sketch, gt in cases:
        if mode == "no-soft":
            sketch, gt_for_match = L.strip_soft(sketch), L.strip_soft(gt)
        else:
            gt_for_match = gt
        try:
            result = run_batch(sketch, catalog, gt_for_match, cfg,
                               mode=("perfect" if mode == "perfect" else "full"),
                               max_iterations=args.max_iterations,
                               max_seconds=args.time_budget)
            status = result.status
            record = {
                "case": name,
                "mode": mode,
                "iterations": result.iterations,
                "accepts": result.accepts,
                "rejects": result.rejects,
                "seconds": round(result.seconds, 3) if args.timing else None,
                "status": status,
            }
            print(f"{name}: {status} after {result.iterations} iterations "
                  f"({result.seconds:.2f}s)", file=sys.stderr)
        except QuerySketchError as exc:
            record = {"case": name, "mode": mode, "iterations": 0, "accepts": 0,
                      "rejects": 0, "seconds": None, "status": f"failed: {exc}"}
            status = "failed"
            print(f"{name}: failed ({exc})", file=sys.stderr)
        lines.append(json.dumps(record, sort_keys=True))
        statuses.append(status)

    text = "\n".join(lines) + "\n"
    if args.trace_out:
        Path(args.trace_out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if any(s.startswith("failed") for s in statuses):
        return EXIT_SYNTH
    if any(s == "timeout" for s in statuses):
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        catalog = _load_catalog(args)
        query = L.parse_sketch(Path(args.query).read_text(encoding="utf-8"), catalog)
        if not L.is_complete(query):
            raise QuerySketchError("the query still contains holes; use 'run' to fill them")
        result = evaluate(query, catalog)
    except (QuerySketchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(result.to_csv())
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    service = ServiceState(persist_dir=args.persist_dir)
    if args.schema and args.data:
        catalog = load_database(args.schema, args.data)
        database_id = service.add_database(catalog)
        print(f"preloaded database {database_id} "
              f"({', '.join(catalog.table_names())})", file=sys.stderr)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"serve": cmd_serve, "run": cmd_run, "bench": cmd_bench, "eval": cmd_eval}
    try:
        return handlers[args.command](args)
    except QuerySketchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
