"""Command line entry point: ``bdris {run,sweep-pos,sweep-m,sweep-power,gradcheck}``."""

import argparse
import sys
from pathlib import Path

from . import experiments
from .diagnostics import gradcheck
from .errors import ConfigError

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2

SWEEP_COMMANDS = {
    "sweep-pos": "ris_x",
    "sweep-m": "m_elements",
    "sweep-power": "tx_power_dbm",
}


def _parser():
    p = argparse.ArgumentParser(prog="bdris", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="INI experiment config")
        sp.add_argument("--profile", choices=sorted(experiments.PROFILES), default="desk")
        sp.add_argument("--seed", type=int, help="base seed (trial k uses seed + k)")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--methods", help="comma-separated subset of " + ",".join(experiments.METHODS))
        sp.add_argument("--out", type=Path, help="aggregated CSV path (stdout if omitted)")
        sp.add_argument("--dump-trials", nargs="?", const=True, default=None, metavar="PATH",
                        help="also write per-trial records (default: <out>.trials.csv)")
        sp.add_argument("--timing", action="store_true", help="include wall_ms in the dump")

    common(sub.add_parser("run", help="run the sweep declared in the config"))
    for name, kind in SWEEP_COMMANDS.items():
        common(sub.add_parser(name, help=f"sweep over {kind}"))

    g = sub.add_parser("gradcheck", help="numerical self-test of gradient, minorizer and factorizations")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sizes", default="2,4,8", help="comma-separated RIS sizes")
    g.add_argument("--corrupt-gradient", action="store_true", help=argparse.SUPPRESS)
    return p


def _config(args, kind):
    config = experiments.profile_config(args.profile, kind or "ris_x")
    if args.config is not None:
        config = experiments.load_config(args.config, config)
    if kind is not None:
        config = experiments.for_kind(config, kind)
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.methods:
        changes["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    return config.with_(**changes) if changes else config


def _dump_path(args, kind):
    if args.dump_trials is True:
        if args.out is not None:
            return args.out.with_suffix(".trials.csv")
        return Path(f"{kind}.trials.csv")
    return Path(args.dump_trials)


def main(argv=None):
    args = _parser().parse_args(argv)

    if args.command == "gradcheck":
        try:
            sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
        except ValueError:
            print(f"bad --sizes {args.sizes!r}", file=sys.stderr)
            return EXIT_CONFIG
        report = gradcheck(seed=args.seed, sizes=sizes, corrupt_gradient=args.corrupt_gradient)
        sys.stdout.write(report.text())
        return EXIT_OK if report.passed else EXIT_CHECK

    try:
        config = _config(args, SWEEP_COMMANDS.get(args.command))
        workers = experiments.worker_count()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text, _, records = experiments.run_sweep(config, workers)
    try:
        if args.out is None:
            sys.stdout.write(text)
        else:
            experiments.write_text(args.out, text)
        if args.dump_trials is not None:
            experiments.write_text(_dump_path(args, config.sweep_kind),
                                   experiments.records_csv(records, timing=args.timing))
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
