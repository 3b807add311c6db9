#!/usr/bin/env python3
"""
Groundwater MLP-Adam command line.

    python cli.py train --config run.conf
    python cli.py evaluate --config run.conf [--model model.mlp] [--out report.csv]
    python cli.py predict --config run.conf --horizon 12 [--out predictions.csv]
    python cli.py export-plot --config run.conf [--out plot.csv]
    python cli.py ablate --config run.conf [--out ablation.csv]
    python cli.py synthesize --config run.conf [--horizon 12]

Exit codes: 0 ok, 1 config/model error, 2 data error, 3 numeric error.
"""

import argparse
import logging
import sys
from typing import List, Optional

import pipeline
from utils.errors import ConfigError, DataError, GroundwaterError

COMMANDS = ["train", "evaluate", "predict", "export-plot", "ablate", "synthesize"]


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage problems as a one-line config error"""

    def error(self, message):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="cli.py", description="MLP-Adam groundwater level forecasting")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="Path to the key = value run config")
    parser.add_argument("--model", help="Model file (defaults to model_out from the config)")
    parser.add_argument("--horizon", type=int, help="Months to forecast / extra synthetic climate months")
    parser.add_argument("--out", help="Output path overriding the config")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress to standard error")
    return parser


def run(args: argparse.Namespace) -> int:
    if args.command == "train":
        return pipeline.cmd_train(args.config, progress=args.verbose)
    if args.command == "evaluate":
        return pipeline.cmd_evaluate(args.model, args.config, args.out)
    if args.command == "predict":
        if args.horizon is None:
            raise ConfigError("usage: predict requires --horizon")
        return pipeline.cmd_predict(args.model, args.config, args.horizon, args.out)
    if args.command == "export-plot":
        return pipeline.cmd_export_plot(args.model, args.config, args.out)
    if args.command == "ablate":
        return pipeline.cmd_ablate(args.config, args.out, progress=args.verbose)
    return pipeline.cmd_synthesize(args.config, args.horizon or 0)


def _report(error: Exception):
    message = " ".join(str(error).splitlines())
    print(f"error: {message}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(asctime)s - %(levelname)s - %(message)s",
            stream=sys.stderr,
        )
        return run(args)
    except GroundwaterError as e:
        _report(e)
        return e.exit_code
    except OSError as e:
        _report(e)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
