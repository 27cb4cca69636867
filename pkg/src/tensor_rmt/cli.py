"""Command line interface.

One subcommand per experiment kind; every run is driven by a JSON config
(--config) with optional flag overrides. The process exits nonzero iff a
tolerance declared in the config (or forced via --tol-*) was violated,
so the harness composes with make/CI.
"""
from __future__ import annotations

import argparse
import json
import sys

from ._version import __version__
from .errors import TensorRmtError, ValidationError
from .experiments import KINDS, ExperimentConfig, run

_TOL_FLAGS = {
    # flag name -> tolerance key
    "tol_kd": "kd",
    "tol_top_spike_rel": "top_spike_rel",
    "tol_neg_spike_rel": "neg_spike_rel",
    "tol_eigenpair_residual": "eigenpair_residual",
    "tol_alpha_tight": "alpha_tight",
    "tol_alpha_tight_from": "alpha_tight_from",
    "tol_alpha_low_max": "alpha_low_max",
    "tol_alpha3_eps": "alpha3_eps",
    "tol_accuracy_abs": "accuracy_abs",
    "tol_accuracy_min_theory": "accuracy_min_theory",
    "tol_method_gap": "method_gap",
    "tol_mean": "mean",
    "tol_variance": "variance",
    "tol_qq": "qq",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tensor-rmt",
        description="Experiment harness for the nested matrix-tensor "
                    "model: spectra, summary statistics, clustering.")
    parser.add_argument("--version", action="version",
                        version=f"tensor-rmt {__version__}")
    sub = parser.add_subparsers(dest="kind", metavar="KIND")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True,
                       help="JSON config file (see ExperimentConfig)")
        p.add_argument("--seed-list",
                       help="comma-separated seeds overriding the config")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--workers", type=int,
                       help="process count override (0/1 = serial)")
        p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE", dest="sets",
                       help="dotted config override, e.g. "
                            "--set model.beta_t=2.5 (JSON-parsed value)")
        for flag, key in _TOL_FLAGS.items():
            p.add_argument("--" + flag.replace("_", "-"), type=float,
                           dest=flag, help=f"override tolerances.{key}")
    return parser


def _parse_sets(pairs):
    out = []
    for pair in pairs:
        if "=" not in pair:
            raise ValidationError(f"--set expects KEY=VALUE, got {pair!r}")
        key, _, raw = pair.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        out.append((key.strip(), value))
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.kind is None:
        parser.print_usage(sys.stderr)
        return 2

    try:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.kind != args.kind:
            raise ValidationError(
                f"config kind {cfg.kind!r} does not match subcommand "
                f"{args.kind!r}")
        seeds = None
        if args.seed_list:
            seeds = [int(s) for s in args.seed_list.split(",") if s.strip()]
        tol = {key: getattr(args, flag)
               for flag, key in _TOL_FLAGS.items()
               if getattr(args, flag) is not None}
        cfg = cfg.with_overrides(seeds=seeds, out=args.out,
                                 workers=args.workers, tolerances=tol,
                                 sets=_parse_sets(args.sets))
        result = run(cfg)
    except (TensorRmtError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for path in result.files:
        print(f"wrote {path}")
    if result.violations:
        for v in result.violations:
            print(f"TOLERANCE VIOLATED: {v}", file=sys.stderr)
        return 1
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
