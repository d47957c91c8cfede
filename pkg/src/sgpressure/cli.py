"""Command line entry point: ``run``, ``verify`` and ``list-systems``."""

from __future__ import annotations

import argparse
import json
import sys

from . import experiment
from .errors import ConfigError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgpressure",
        description="Finite-scale pressure and dimension estimates for semigroup actions.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write its artifacts")
    run.add_argument("config", help="path to a TOML experiment config")
    run.add_argument("--out-dir", default=None,
                     help=f"output directory (else ${experiment.OUT_DIR_ENV}, else the config)")
    run.add_argument("--workers", type=int, default=1, help="worker processes over delta")
    run.add_argument("--budget-words", type=int, default=None,
                     help="largest word level k**n that may be enumerated")

    verify = sub.add_parser("verify", help="run the invariant battery for a config")
    verify.add_argument("config")
    verify.add_argument("--out-dir", default=None)
    verify.add_argument("--workers", type=int, default=1)
    verify.add_argument("--budget-words", type=int, default=None)

    sub.add_parser("list-systems", help="print the built-in system names")
    return parser


def _config_error(exc: ConfigError, out_dir) -> int:
    record = {"exit_code": experiment.EXIT_CONFIG, "error": "ConfigError",
              "message": str(exc), "field": exc.field}
    print(json.dumps(record), file=sys.stderr)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "error.json").write_text(json.dumps(record, indent=2) + "\n")
    return experiment.EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-systems":
        for name in experiment.list_systems():
            print(name)
        return 0
    if args.workers < 1 or (args.budget_words is not None and args.budget_words < 1):
        return _config_error(ConfigError("must be positive", "--workers/--budget-words"),
                             experiment.resolve_out_dir(args.out_dir, None))
    try:
        cfg = experiment.load_config(args.config)
    except ConfigError as exc:
        return _config_error(exc, experiment.resolve_out_dir(args.out_dir, None))
    out = experiment.resolve_out_dir(args.out_dir, cfg)
    if args.command == "run":
        code = experiment.run_experiment(cfg, out, args.workers, args.budget_words)
        if code != 0:
            print((out / "error.json").read_text(), file=sys.stderr, end="")
        else:
            print(f"wrote {out}")
        return code
    report = experiment.verify_invariants(cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "invariants.json").write_text(json.dumps(report, indent=2) + "\n")
    for r in report["invariants"]:
        print(experiment.InvariantResult(**r).line())
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
