"""
Command line:

    python -m app.cli run scenarios/scenario1.dai --trace out/trace.json --snapshot out/world.json
    python -m app.cli check out/world.json

Exit codes: 0 ok, 1 assertion / expect-error mismatch / invariant violation,
2 parse error or unreadable input, 3 engine error not covered by expect-error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from app.protocol.accounting import check_accounting, format_accounting_report, lint_parameters
from app.protocol.errors import InvalidConfig
from app.protocol.snapshot import load
from app.scenario.config import parse_config_yaml
from app.scenario.parser import ScenarioParseError
from app.scenario.runner import EXIT_ASSERTION, EXIT_OK, EXIT_PARSE, ScenarioResult, run_scenario
from app.utils import configure_logging, get_logger, write_text_artifact

logger = get_logger(__name__)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _summary_line(entry) -> str:
    parts = [f"L{entry['line']:<4}", f"{entry['verb']:<16}", entry["status"]]
    if entry.get("error"):
        parts.append(entry["error"])
    if entry.get("message") and entry["status"] != "expected-error":
        parts.append(f"- {entry['message']}")
    return " ".join(parts)


def _print_result(result: ScenarioResult) -> None:
    for entry in result.trace:
        print(_summary_line(entry))
        if entry["verb"] == "note" and entry.get("detail"):
            print(f"      note: {entry['detail']['note']}")
    print(f"exit {result.exit_code}")


def cmd_run(args: argparse.Namespace) -> int:
    try:
        text = _read(args.file)
        overlay = parse_config_yaml(_read(args.config), source=args.config) if args.config else None
    except (OSError, InvalidConfig) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE

    try:
        result = run_scenario(text, config=overlay, keep_going=args.keep_going)
    except ScenarioParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE

    _print_result(result)
    if args.trace:
        logger.info("trace written to %s", write_text_artifact(args.trace, result.trace_json()))
    if args.snapshot:
        snap = result.final_snapshot()
        if snap is None:
            print("warning: no world to snapshot (script never ran init)", file=sys.stderr)
        else:
            logger.info("snapshot written to %s", write_text_artifact(args.snapshot, snap))
    return result.exit_code


def cmd_check(args: argparse.Namespace) -> int:
    try:
        world = load(_read(args.snapshot))
    except (OSError, InvalidConfig) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE

    violations = check_accounting(world)
    report = format_accounting_report(violations, lint_parameters(world))
    print(report["markdown"])
    return EXIT_ASSERTION if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dai-sim", description="DAI protocol scenario runner")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default: $LOG_LEVEL or WARNING)")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario script")
    run.add_argument("file")
    run.add_argument("--snapshot", help="write the final world snapshot here")
    run.add_argument("--trace", help="write the JSON trace here")
    run.add_argument("--keep-going", action="store_true", help="do not stop at the first failing line")
    run.add_argument("--config", help="YAML configuration overlay")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="run the accounting check on a snapshot")
    check.add_argument("snapshot")
    check.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
