"""Command-line entry point: ``run`` and ``certify`` over a config file."""
from __future__ import annotations

import argparse
import logging
import sys

from .harness import ConfigError, certify, load_config, run_experiment


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="camouflage", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run an experiment and write its artifact bundle"),
                       ("certify", "run the reduced-instance certification suite")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="YAML or JSON experiment config")
        sp.add_argument("--out", help="output directory (overrides config and CAMOUFLAGE_OUT)")
        sp.add_argument("--seed", type=int, help="RNG seed for rollouts and random instances")
        sp.add_argument("--episodes", type=int, help="rollout episodes for the Monte Carlo cross-check")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    if args.seed is not None and args.seed < 0:
        print("--seed must be non-negative", file=sys.stderr)
        return 2
    if args.command == "run":
        result = run_experiment(cfg, out_dir=args.out, seed=args.seed, episodes=args.episodes)
        for mode, ratio in result.ratios.items():
            print(f"{mode:>16s}  ratio {ratio:.4f}")
        checks = result.checks
        print(f"wrote {', '.join(result.files.values())}")
    else:
        checks = certify(cfg, seed=args.seed)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        if args.command == "certify" or not c.passed:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
