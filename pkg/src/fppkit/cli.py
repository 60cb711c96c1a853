"""Command line entry point: ``fppkit <stage> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import FppError
from .pipelines.config import RunConfig
from .pipelines.context import Context
from .pipelines.stages import STAGES, run_stage
from .pipelines.torsion import LABELS

GLOBAL_FLAGS = {
    "prime": ("--prime", int, "working prime p"),
    "precision": ("--precision", int, "p-adic precision e"),
    "margin": ("--margin", int, "certification margin m"),
    "seed": ("--seed", int, "random seed"),
    "data_dir": ("--data-dir", str, "dataset directory"),
    "cache_dir": ("--cache-dir", str, "cache directory"),
    "report": ("--report", str, "append JSON reports to this file"),
    "budget": ("--budget", int, "operation budget for point scans"),
}


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset after it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value config file")
    for dest, (flag, typ, help_) in GLOBAL_FLAGS.items():
        common.add_argument(flag, dest=dest, type=typ, help=help_)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="fppkit", parents=[common],
                                     description="p-adic pipelines on the 84-cubic surface")
    sub = parser.add_subparsers(dest="stage", required=True)
    for name in STAGES:
        sp = sub.add_parser(name, parents=[common])
        if name in ("curve-quadrics", "four-h-torsion"):
            default = "D" if name == "curve-quadrics" else "D1"
            choices = LABELS if name == "curve-quadrics" else ["D", "D1", "D8"]
            sp.add_argument("--class", dest="label", default=default, choices=choices)
        if name == "search-cuts":
            sp.add_argument("--min-support", type=int)
    return parser


def config_from_args(args) -> RunConfig:
    path = getattr(args, "config", None)
    cfg = RunConfig.load(path) if path else RunConfig()
    return cfg.updated(**{k: getattr(args, k, None) for k in GLOBAL_FLAGS})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    verbose = getattr(args, "verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ctx = Context(config_from_args(args))
        kw = {}
        if getattr(args, "label", None):
            kw["label"] = args.label
        if getattr(args, "min_support", None):
            kw["min_support"] = args.min_support
        rep = run_stage(args.stage, ctx, **kw)
    except (FppError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(rep.text())
    return 0 if rep.status == "ok" else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
