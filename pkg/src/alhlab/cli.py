"""Command-line runner: one subcommand per scenario.

Exit codes: 0 every claim passes, 2 some claim fails, 3 configuration
error, 4 numerical abort.  Reports go to ``--out``, else ``$ALHLAB_OUT_DIR``,
else ``./alhlab-out``.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import SCENARIOS, default_config, load_config
from .errors import AlhError, ConfigurationError, NumericAbort
from .report import summary, write_report
from .scenarios import run_scenario

EXIT_PASS = 0
EXIT_FAIL = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alhlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="scenario", metavar="SCENARIO", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", metavar="PATH", help="YAML scenario config (default: packaged)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, metavar="N", help="override the random seed")
        p.add_argument("--r-max", type=float, metavar="X", help="override the integration horizon")
        p.add_argument("--jobs", type=int, default=1, metavar="K", help="worker processes (default 1)")
        p.add_argument("--quiet", action="store_true", help="only print the final verdict")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.scenario
    try:
        cfg = load_config(args.config) if args.config else default_config(name)
        if cfg.scenario != name:
            raise ConfigurationError(f"config is for scenario {cfg.scenario!r}, not {name!r}")
        cfg = cfg.with_overrides(seed=args.seed, r_max=args.r_max, out_dir=args.out)
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be >= 1")
    except (ConfigurationError, OSError) as exc:
        print(f"alhlab {name}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        claims = run_scenario(cfg, jobs=args.jobs)
    except ConfigurationError as exc:
        print(f"alhlab {name}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericAbort as exc:
        print(f"alhlab {name}: numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        doc = summary(name, cfg.as_dict(), [], status="aborted", error=f"{type(exc).__name__}: {exc}")
        write_report(cfg.output_dir, cfg.stem, [], doc)
        return EXIT_NUMERIC
    except AlhError as exc:
        print(f"alhlab {name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    doc = summary(name, cfg.as_dict(), claims)
    csv_path, json_path = write_report(cfg.output_dir, cfg.stem, claims, doc)
    if not args.quiet:
        for c in claims:
            print(f"{c.verdict.upper():4s}  {c.claim_id}: predicted {c.row()['predicted']}, "
                  f"measured {c.row()['measured']}")
    print(f"{name}: {doc['claims_passed']}/{doc['claims_total']} claims pass -> {doc['verdict']} "
          f"({csv_path}, {json_path})")
    return EXIT_PASS if doc["verdict"] == "pass" else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
