"""Command-line interface for the verification experiments."""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, EXPERIMENTS, default_config, load_config
from .experiments import run_experiment

_DESCRIPTIONS = {
    "energy": "Monte Carlo energy bound of the solution operator",
    "regularity": "fractional-order regularity refinement study",
    "mild-equiv": "pathwise solver-vs-mild-oracle refinement study",
    "infsup": "discrete inf-sup constant sweep",
    "lemma-constants": "stochastic-convolution inequality constants",
    "multiplicative": "fixed-point multiplicative-noise validation",
    "noise-dump": "dump sampled noise panels as CSV",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stheat",
        description=(
            "Spectral space-time verification suite for the stochastic "
            "heat equation"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=_DESCRIPTIONS[name])
        p.add_argument("--config", help="experiment config file (INI)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output directory (JSON/CSV reports)")
        p.add_argument("--paths", type=int, help="Monte Carlo path count")
        p.add_argument(
            "--quiet", action="store_true", help="suppress the summary printout"
        )
    return parser


def _resolve_config(args):
    overrides = {"name": args.command}
    for attr in ("seed", "out", "paths"):
        val = getattr(args, attr)
        if val is not None:
            overrides[attr] = val
    if args.quiet:
        overrides["quiet"] = True
    if args.config:
        return load_config(args.config, overrides=overrides)
    overrides.pop("name")
    return default_config(args.command, **overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run_experiment(config)
    if not config.quiet:
        for check in report["checks"]:
            status = "PASS" if check["passed"] else ("FAIL" if check["hard"] else "FLAG")
            print(f"[{status}] {config.name}: {check['name']}")
        print(json.dumps(report["results"], indent=2, default=str)[:4000])
        if config.out:
            print(f"report written under {config.out}/")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
