"""Command-line entry point: ``tsphenotype <subcommand> [--config ...]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .config import load_config
from .errors import PipelineError

log = logging.getLogger("tsphenotype")


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for frame scoring")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tsphenotype", description=__doc__)
    ap.add_argument("-q", "--quiet", action="store_true", help="only report warnings and errors")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="all branches plus plots"))
    _common(sub.add_parser("features", help="PACF and Welch feature tables"))
    _common(sub.add_parser("cluster", help="fuzzy c-medoids on both feature branches"))
    _common(sub.add_parser("dirichlet", help="Dirichlet regression of existing membership files"))
    _common(sub.add_parser("tda", help="periodicity profiles, bottleneck clustering and summaries"))
    p = sub.add_parser("synth", help="write a synthetic cohort with its config")
    _common(p, config=False)
    p.add_argument("--regular", type=int, default=3, help="periodic subjects")
    p.add_argument("--irregular", type=int, default=3, help="noise subjects")
    p.add_argument("--duration", type=float, default=3600.0, help="seconds per subject")
    p.add_argument("--sample-rate", type=float, default=32.0)
    p = sub.add_parser("plot", help="SVG figures from an artifact directory")
    p.add_argument("--config", default=None, help="take the artifact directory from this config")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", default=None, help="artifact directory")
    p.add_argument("--jobs", type=int, default=1, help=argparse.SUPPRESS)
    return ap


def _dispatch(args) -> int:
    if args.jobs < 1:
        raise PipelineError("cli", "--jobs must be at least 1")
    if args.command == "synth":
        from .synthgen import write_cohort
        if args.out is None:
            raise PipelineError("synthgen", "synth needs --out")
        try:
            path = write_cohort(args.out, args.regular, args.irregular, args.duration, args.sample_rate,
                               args.seed if args.seed is not None else 0)
        except ValueError as exc:
            raise PipelineError("synthgen", str(exc)) from exc
        print(path)
        return 0
    if args.command == "plot":
        from .svg import emit_plots
        if args.out is not None:
            out = Path(args.out)
        elif args.config is not None:
            out = load_config(args.config).out_dir
        else:
            raise PipelineError("cli", "plot needs --out or --config")
        for p in emit_plots(out):
            print(p)
        return 0

    cfg = load_config(args.config, args.seed, args.out)
    if args.command == "run":
        out = pipeline.run_pipeline(cfg, args.jobs)
    else:
        cohort, out = pipeline.prepare(cfg)
        if args.command == "features":
            pipeline.compute_features(cfg, cohort, out)
        elif args.command == "cluster":
            feats = pipeline.compute_features(cfg, cohort, out)
            pipeline.cluster_features(cfg, cohort.ids, feats, out)
        elif args.command == "dirichlet":
            pipeline.regress_memberships(cfg, cohort, out)
        elif args.command == "tda":
            pipeline.run_tda(cfg, cohort, out, args.jobs)
    print(out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return _dispatch(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
