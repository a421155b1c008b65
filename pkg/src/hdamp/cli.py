"""Command line entry point.

    hdamp run --scenario sigma-scaling --config run.cfg --ctx.N 2.0 --out results/
    hdamp plot --report results/report.json --series sigma_vs_lnls
"""
from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, ConfigError, read_config_file, resolve
from .report import emit_plot_series, load_report
from .scenarios import run_scenario


def _split_overrides(extra):
    """Collect ``--dotted.key value`` (or ``--dotted.key=value``) pairs."""
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(tok, "expected --key value")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise ConfigError(key, "missing value") from None
        out[key] = value
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="hdamp", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write report.json, rows.csv and series CSVs")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--config", help="key=value file with dotted keys")
    run.add_argument("--out", help="output directory (overrides output_dir)")

    plot = sub.add_parser("plot", help="write one plot series of a report as x,y CSV")
    plot.add_argument("--report", required=True)
    plot.add_argument("--series", required=True)
    plot.add_argument("--out", help="directory for the CSV (default: next to the report)")
    return parser


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command == "plot":
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        from pathlib import Path
        report = load_report(args.report)
        try:
            path = emit_plot_series(report, args.series, args.out or Path(args.report).parent)
        except KeyError as exc:
            print(f"hdamp: {exc.args[0]}", file=sys.stderr)
            return 2
        print(path)
        return 0

    try:
        raw = read_config_file(args.config) if args.config else {}
        raw.update(_split_overrides(extra))
        if args.scenario:
            raw["scenario"] = args.scenario
        if args.out:
            raw["output_dir"] = args.out
        config = resolve(raw)
    except (ConfigError, OSError) as exc:
        print(f"hdamp: usage error: {exc}", file=sys.stderr)
        return 2

    report = run_scenario(config)
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.name}  {v.detail}")
    print(f"wrote {config.output_dir}/report.json and rows.csv")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
