"""Command-line front end.

    optomech-switch <task> --config <file> --out <dir> [--format csv,json]
                    [--jobs N]

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
Failures print a machine-readable JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import FORMATS, parse_config
from .errors import ConfigError, NumericalError, OptomechError, OutputError
from .runner import run_scenario

TASK_CHOICES = ("bistability", "spectrum", "switch-metrics", "hysteresis", "sweep")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optomech-switch",
        description="Bistability, switching metrics and displacement spectra "
                    "for the coupled-cavity optomechanical model.")
    parser.add_argument("task", choices=TASK_CHOICES,
                        help="task to run; must match the config's [task] name")
    parser.add_argument("--config", required=True, help="scenario config file")
    parser.add_argument("--out", default=None,
                        help="output directory (falls back to the config's [output] dir)")
    parser.add_argument("--format", default=None,
                        help="comma list out of {csv,json}; default from config")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for sweep points")
    return parser


def _error_record(exc: Exception, exit_code: int) -> str:
    return json.dumps({"error": {"type": type(exc).__name__, "message": str(exc),
                                 "exit_code": exit_code}})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    formats = None
    if args.format is not None:
        formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
        bad = [f for f in formats if f not in FORMATS]
        if bad or not formats:
            print(_error_record(ConfigError(f"invalid --format {args.format!r}"),
                                EXIT_CONFIG), file=sys.stderr)
            return EXIT_CONFIG
    if args.jobs < 1:
        print(_error_record(ConfigError("--jobs must be >= 1"), EXIT_CONFIG),
              file=sys.stderr)
        return EXIT_CONFIG

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(_error_record(exc, EXIT_IO), file=sys.stderr)
        return EXIT_IO

    try:
        config = parse_config(text)
        if config.task.name != args.task:
            raise ConfigError(
                f"CLI task {args.task!r} does not match config task "
                f"{config.task.name!r}")
        manifest = run_scenario(config, out_dir=args.out, formats=formats,
                                jobs=args.jobs)
    except ConfigError as exc:
        print(_error_record(exc, EXIT_CONFIG), file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(_error_record(exc, EXIT_IO), file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(_error_record(exc, EXIT_NUMERICAL), file=sys.stderr)
        return EXIT_NUMERICAL
    except OptomechError as exc:
        print(_error_record(exc, EXIT_NUMERICAL), file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(_error_record(exc, EXIT_IO), file=sys.stderr)
        return EXIT_IO

    print(json.dumps({"status": "ok", "task": manifest["task"],
                      "files": sorted(manifest["files"])}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
