"""Command-line entry point for the pair-calibration toolkit.

Usage:
    python main.py gen-data --task sin1d --seed 0 --n 25000 --out runs/sin1d
    python main.py train --config run.json --seed 0 --set train.iterations=2000
    python main.py eval|bound|decode|report ...
    python main.py schema

Exit codes: 0 success, 2 configuration error, 3 runtime or model error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from api.commands import COMMANDS, EXIT_OK, build_config, exit_code, read_config_file, run_command, schema_text
from config import get_settings

logger = logging.getLogger(__name__)


def configure_logging(level: str | None = None) -> None:
    settings = get_settings()
    logging.basicConfig(
        level=level or settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paircal",
        description="Pair predictors, cheat-corrected uncertainty and hallucination-bounded decoding.",
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    for command in COMMANDS.values():
        p = sub.add_parser(command.name, help=command.help)
        p.add_argument("--config", default=None, help="Run configuration JSON file")
        p.add_argument("--seed", type=int, default=None, help="Master seed (required here or in the config)")
        p.add_argument("--out", default=None, help="Output directory")
        p.add_argument("--task", choices=["sin1d", "pi", "lake"], default=None)
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY.PATH=VALUE",
            help="Override a config value by dotted path (repeatable)",
        )
        for option in command.options:
            p.add_argument(
                option.flag,
                dest=option.path,
                type=option.type,
                choices=option.choices,
                default=None,
                help=option.help,
            )

    sub.add_parser("schema", help="Print the JSON schema of the run configuration")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    if args.command == "schema":
        print(schema_text())
        return EXIT_OK

    command = COMMANDS[args.command]
    flags = {"seed": args.seed, "out": args.out, "task": args.task}
    flags.update({option.path: getattr(args, option.path) for option in command.options})
    try:
        config = build_config(read_config_file(args.config), flags, args.overrides)
        result = run_command(args.command, config)
    except Exception as e:
        code = exit_code(e)
        if code == 3 and not hasattr(e, "exit_code"):
            logger.exception("%s failed", args.command)
        print(f"error: {e}", file=sys.stderr)
        return code

    print(json.dumps(result, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
