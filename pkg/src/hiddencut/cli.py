"""Command-line entry point.

Verbs map one-to-one onto the experiment runners. A JSON config file supplies
parameters; ``--seed``, ``--out``, and repeated ``--override KEY=VALUE`` flags
take precedence over the file. Set HIDDENCUT_LOG=DEBUG|INFO|... for verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import HiddenCutError
from .experiments import RUNNERS, apply_overrides, config_from_dict


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hiddencut",
        description="Hidden-cut circuit simulation and weak-entanglement heuristics",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config field; dotted keys reach nested values",
        )
    return parser


def _resolve_config(args) -> dict:
    doc = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
    doc = apply_overrides(doc, args.override)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out is not None:
        doc["out"] = args.out
    doc["experiment"] = args.experiment
    return doc


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("HIDDENCUT_LOG", "WARNING").upper())
    args = _build_parser().parse_args(argv)
    try:
        config = config_from_dict(_resolve_config(args))
        path = RUNNERS[args.experiment](config)
    except (HiddenCutError, OSError, json.JSONDecodeError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
