"""``forbidtrans run --config PATH`` command-line front end."""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import __version__
from .config import TASKS, load_config
from .errors import (
    ConfigError,
    DimensionMismatchError,
    InvalidOperatorError,
    StructureError,
    TruncationUnconvergedError,
)
from .runner import COLUMN_DOCS, emit, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STRUCTURE = 3
EXIT_TRUNCATION = 4

log = logging.getLogger("forbidtrans")


def _columns_epilog() -> str:
    lines = ["CSV output columns by task:"]
    lines += [f"  {task:15s} {COLUMN_DOCS[task]}" for task in TASKS]
    lines += ["", "Rate cells are nonnegative numbers or the string 'forbidden'.",
              "Exit codes: 0 ok, 2 config error, 3 numerical-structure error, "
              "4 truncation not converged."]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forbidtrans",
                                     description="Transition-rate and suppression analyses.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run the analysis described by a config file",
                       epilog=_columns_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, help="YAML analysis file")
    p.add_argument("--format", choices=("csv", "text"), default="csv", help="output format (default csv)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # symmetrization notes travel in the metadata
            cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        log.info("task %s, config digest %s", cfg.task, cfg.digest())
        table = run(cfg)
    except OSError as exc:
        print(f"error: --config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DimensionMismatchError, InvalidOperatorError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StructureError as exc:
        print(f"structure error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except TruncationUnconvergedError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    for note in table.metadata.get("warnings", []):
        log.warning(note)
    log.info("finished in %.3f s", table.metadata["elapsed_seconds"])
    text = emit(table, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
