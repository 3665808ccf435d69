"""Command-line entry point: ``coteach {validate,simulate,experiment,plot}``.

Exit codes: 0 success, 1 fault (including usage and parse errors), 2 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import adaptive
from .engine import InteractionMode, run_session, write_event_log
from .scenario import (
    ScenarioParseError,
    ScenarioValidationError,
    builtin_guesswho,
    load_scenario,
    validate_scenario,
)

EXIT_OK, EXIT_FAULT, EXIT_INVALID = 0, 1, 2
MODE_NAMES = [m.value for m in InteractionMode]

log = logging.getLogger("coteach")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAULT, f"{self.prog}: error: {message}\n")


def _add_scenario_args(p: argparse.ArgumentParser, positional: bool = False) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    if positional:
        src.add_argument("scenario", nargs="?", help="scenario JSON file")
    else:
        src.add_argument("--scenario", help="scenario JSON file")
    src.add_argument("--builtin", action="store_true", help="use the builtin three-character world")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coteach", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a scenario file")
    _add_scenario_args(p, positional=True)

    p = sub.add_parser("simulate", help="run one session and write its event log")
    _add_scenario_args(p)
    p.add_argument("--mode", required=True, help=" | ".join(MODE_NAMES))
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory (default: .)")

    p = sub.add_parser("experiment", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--no-svg", action="store_true", help="skip curves.svg")

    p = sub.add_parser("plot", help="render curves.csv as an SVG chart")
    p.add_argument("csv")
    p.add_argument("svg")
    return parser


def _scenario(args, validate: bool = True):
    if args.builtin:
        return builtin_guesswho()
    return load_scenario(args.scenario, validate=validate)


def cmd_validate(args) -> int:
    try:
        s = _scenario(args, validate=False)
    except (OSError, ScenarioParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAULT
    report = validate_scenario(s)
    print(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args) -> int:
    if args.mode not in MODE_NAMES:
        build_parser().print_usage(sys.stderr)
        print(f"error: unknown mode {args.mode!r}; choose from {', '.join(MODE_NAMES)}", file=sys.stderr)
        return EXIT_FAULT
    if args.rounds < 1:
        print("error: --rounds must be positive", file=sys.stderr)
        return EXIT_FAULT
    try:
        s = _scenario(args)
    except ScenarioValidationError as exc:
        print(f"invalid scenario:\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ScenarioParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAULT

    mode = InteractionMode(args.mode)
    session = run_session(s, mode, args.rounds, np.random.default_rng(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_event_log(session, s, out / "events.jsonl")
    if session.observability is not None:
        (out / "observability.csv").write_text(adaptive.dump_csv(session.observability, s))

    for rnd in session.rounds:
        print(f"round {rnd.index}: target {s.concepts[rnd.target]}")
        for ep in rnd.episodes:
            print(f"  group {ep.group + 1}: {ep.steps:3d} steps, {100 * ep.final_fraction:6.2f}% correct, {ep.status}")
    print(f"event log written to {out / 'events.jsonl'}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiment import ConfigError, load_config, run_experiment, write_results

    try:
        cfg = load_config(args.config)
    except (ConfigError, ScenarioParseError, ScenarioValidationError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAULT
    res = run_experiment(cfg, workers=args.threads)
    for path in write_results(res, args.out, svg=not args.no_svg):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_curves

    try:
        plot_curves(args.csv, args.svg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAULT
    print(f"wrote {args.svg}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "experiment": cmd_experiment,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except Exception:  # engine faults
        log.exception("%s failed", args.command)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
