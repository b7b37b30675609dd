"""``stacklab <experiment> --config <path> [--out DIR] [--trials N] [--seed S]``.

Exit codes: 0 success, 2 config error, 3 invariant violation.  Errors are
printed as one line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConstructionError, InvariantError, ParameterError
from .experiment import EXPERIMENTS, ExperimentConfig, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stacklab", description="Rank-one cutting and stacking experiments.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", help="output directory (overrides output_path)")
    parser.add_argument("--trials", type=int, help="override trials")
    parser.add_argument("--seed", type=int, help="override master_seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {args.config}: {exc}")
        if not isinstance(data, dict):
            raise ParameterError("config must be a JSON object")
        data["experiment"] = args.experiment
        if args.out is not None:
            data["output_path"] = args.out
        if args.trials is not None:
            data["trials"] = args.trials
        if args.seed is not None:
            data["master_seed"] = args.seed
        config = ExperimentConfig.from_dict(data)
        manifest = run_experiment(config)
    except (InvariantError, ConstructionError) as exc:
        where = getattr(exc, "module", None) or "core_construction"
        stage = getattr(exc, "stage", None)
        print(f"error: invariant violation in {where} at stage {stage}: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_INVARIANT
    except ParameterError as exc:
        print(f"error: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(manifest["summary"], sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
