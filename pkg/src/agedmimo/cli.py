"""Command-line entry point: one subcommand per experiment.

    agedmimo <subcommand> --config cfg.json [--seed N] [--trials N]
             [--workers N] [--out-dir DIR]

Writes <out-dir>/<config stem>.csv plus a JSON manifest with the same
basename.  Exit codes: 0 success, 2 config error, 3 infeasible experiment.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .channel import DegenerateChannelError
from .experiments import RUNNERS, ConfigError, ExperimentConfig, run_experiment
from .poweradapt import InfeasibleError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agedmimo", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--trials", type=int, default=None, help="override config trials")
        p.add_argument("--workers", type=int, default=None, help="parallel worker count")
        p.add_argument("--out-dir", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_json(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.trials is not None:
            cfg.trials = args.trials
        workers = args.workers if args.workers is not None else cfg.workers
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_csv = out_dir / (Path(args.config).stem + ".csv")
        n_rows = run_experiment(args.subcommand, cfg, out_csv, workers=workers)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (InfeasibleError, DegenerateChannelError) as exc:
        print(f"infeasible experiment: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out_csv} ({n_rows} rows)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
