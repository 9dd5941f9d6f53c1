"""Command-line front end.

``check`` assesses a project against an upgrade and prints the report;
``fix`` additionally applies validated repairs (dry-run unless ``--write``);
``bench`` generates a labeled mutation corpus for one API pair and scores it.
Exit status: 0 when no incompatibilities were found, 1 when some were,
2 on internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import benchgen
from .orchestrate import ConfigError, load_config, run
from .sigmodel import parse_signature


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the run configuration")
    parser.add_argument(
        "--static-only",
        action="store_true",
        help="skip the reflection sidecar; the static index is authoritative",
    )
    parser.add_argument("--json-report", help="also write the report as JSON here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="param-mend")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="detect incompatible calls, repair in dry-run")
    _add_common(check)

    fix = sub.add_parser("fix", help="detect and repair; --write edits files in place")
    _add_common(fix)
    fix.add_argument("--write", action="store_true", help="write repaired files")

    bench = sub.add_parser("bench", help="generate and score a mutation corpus")
    bench.add_argument("--config", required=True, help="bench specification (JSON)")
    bench.add_argument("--json-report", help="write the metrics report here")
    return parser


def _run_pipeline(args: argparse.Namespace, write: bool) -> int:
    config = load_config(args.config)
    if args.static_only:
        config.static_only = True
    if write:
        config.dry_run = False
    report = run(config, write=write)
    print(report.render_table())
    for rel, diff in report.diffs.items():
        print(f"\n--- repairs for {rel} ---")
        print(diff, end="")
    if args.json_report:
        Path(args.json_report).write_text(report.to_json_text(), encoding="utf-8")
    return 1 if report.incompatible_count else 0


def _run_bench(args: argparse.Namespace) -> int:
    spec = json.loads(Path(args.config).read_text(encoding="utf-8"))
    api = spec["api"]
    old_sig = parse_signature(spec["old_signature"], qualified_name=api)
    new_sig = parse_signature(spec["new_signature"], qualified_name=api)
    values = dict(spec["values"])
    seed = int(spec.get("rng_seed", 0))

    cases = benchgen.mutate_cases(old_sig, values, rng_seed=seed)
    labeled = [
        benchgen.MutationCase(
            api=c.api,
            call_text=c.call_text,
            operator_trace=c.operator_trace,
            label=benchgen.label(c, old_sig, new_sig),
        )
        for c in cases
    ]
    corpus_path = spec.get("corpus_path")
    if corpus_path:
        benchgen.write_corpus(labeled, corpus_path)

    incompatible = sum(1 for c in labeled if c.label == "Incompatible")
    print(f"{api}: {len(labeled)} variants, {incompatible} incompatible")
    if args.json_report:
        doc = {
            "api": api,
            "variants": len(labeled),
            "incompatible": incompatible,
            "compatible": len(labeled) - incompatible,
            "rng_seed": seed,
        }
        Path(args.json_report).write_text(
            json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8"
        )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return _run_pipeline(args, write=False)
        if args.command == "fix":
            return _run_pipeline(args, write=bool(args.write))
        if args.command == "bench":
            return _run_bench(args)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal error contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
