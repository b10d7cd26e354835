#!/usr/bin/env python3
"""
rcfinsler - Command Line Interface
Evaluate, verify, invert, audit and sample the infinite-series (α, β)-metric

Exit codes: 0 all checks pass, 1 verification failure, 2 domain or configuration error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from config import get_config, setup_logging
from src.processors.metric_model import FIXTURE_NAMES
from src.processors.runner import DEFAULT_FORMATS, EXIT_ERROR, RunConfig, run_command
from src.utils.errors import ConfigError
from src.utils.report_writer import ReportWriter
from src.utils.validation import FAMILY_NAMES, OUTPUT_FORMATS

logger = logging.getLogger("rcfinsler.cli")

COMMAND_HELP = {
    "eval": "α, β, jet, invariants and tensors at explicit or sampled points",
    "verify": "identity suite and closed-form vs finite-difference sweeps",
    "invert": "three-step rank-one inverse and determinant audit (a_ij̄ = 0 only)",
    "audit": "classify every printed formula as consistent, discrepant or indeterminate",
    "sample": "validity-region map over a grid or a seeded box sample",
}


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    source = common.add_argument_group("metric source")
    source.add_argument("--fixture", choices=FIXTURE_NAMES, help="named fixture metric")
    source.add_argument("--metric", metavar="FILE", help="JSON metric definition {n, a_sym, a_mixed, b}")
    source.add_argument(
        "--family",
        default="infinite-series",
        help=f"{' | '.join(FAMILY_NAMES)} | series-<r> (default: infinite-series)",
    )
    source.add_argument("--b", metavar="RE:IM,...", help="1-form override for flat-real and random-seeded")

    points = common.add_argument_group("points")
    points.add_argument("--z", metavar="RE:IM,...", help="base point (default: origin)")
    points.add_argument("--eta", metavar="RE:IM,...", help="tangent vector η")
    points.add_argument("--samples", type=int, help="number of sampled points")
    points.add_argument("--seed", type=int, help="sampler seed (default: 42, always echoed)")
    points.add_argument("--grid", type=int, help="grid points per axis (sample only)")
    points.add_argument("--box", type=float, help="sampling box half-width (default: 1.0)")
    points.add_argument("--replay", metavar="FILE", help="re-check witness points of an earlier JSON report")
    points.add_argument("--witness", metavar="FORMULA_ID", help="with --replay: only this finding's witness")

    checks = common.add_argument_group("tolerances")
    checks.add_argument("--tolerance", type=float, help="verify tolerance (default: 1e-5)")
    checks.add_argument("--consistent", type=float, help="audit consistent threshold (default: 1e-5)")
    checks.add_argument("--discrepant", type=float, help="audit discrepant threshold (default: 1e-3)")

    output = common.add_argument_group("output")
    output.add_argument("--jobs", type=int, help="worker threads for sweeps")
    output.add_argument("--format", choices=OUTPUT_FORMATS, help="json | csv | pretty")
    output.add_argument("--output", "-o", metavar="FILE", help="write the report to FILE instead of stdout")
    output.add_argument("--log-level", help="overrides RCF_LOG for this run")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcfinsler",
        description="Numerical toolkit for the ℝ-complex Finsler metric F = β²/(β − α)",
    )
    common = _common_arguments()
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, text in COMMAND_HELP.items():
        commands.add_parser(name, parents=[common], help=text, description=text)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    config = get_config()
    setup_logging(config, args.log_level)

    data = vars(args)
    writer = ReportWriter()
    try:
        cfg = RunConfig.from_mapping(data, config)
    except ConfigError as e:
        logger.error(f"Invalid arguments: {e.message}")
        writer.write({"command": args.command, "exit_code": EXIT_ERROR, **e.to_dict()}, "json", stream=sys.stderr)
        return EXIT_ERROR

    try:
        report = run_command(args.command, cfg)
    except Exception as e:
        logger.error(f"Error in {args.command}: {str(e)}", exc_info=True)
        return EXIT_ERROR

    fmt = cfg.fmt or DEFAULT_FORMATS.get(args.command, "json")
    outcome = writer.write(report, fmt, output_path=args.output)
    if not outcome["success"]:
        logger.error(outcome["error"])
        return EXIT_ERROR
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
