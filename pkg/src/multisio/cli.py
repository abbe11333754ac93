"""Command line entry point: ``multisio <subcommand> [--config PATH] [--out DIR] ...``.

Exit status: 0 when every pass flag holds, 1 when a flag fails, 2 on a
configuration or usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from threadpoolctl import threadpool_limits

from .config import default_config, load_config
from .errors import MultisioError
from .experiments import run_experiment

__all__ = ["main", "build_parser"]

log = logging.getLogger("multisio")

# subcommand -> experiments it accepts (first is the default)
SUBCOMMANDS = {
    "converge-truncation": ("converge_truncation",),
    "converge-lacunary": ("converge_lacunary",),
    "norm-scan": ("norm_scan_sio", "norm_scan_lacunary"),
    "decay-study": ("decay_study",),
    "probe": ("inequality_probe",),
    "selftest": ("selftest",),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"\n{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [grid] [omega] [sigma] [wavelet] [experiment]")
    common.add_argument("--out", metavar="DIR", default=None, help="directory for report.json and CSV tables")
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    common.add_argument("--plot", action="store_true", help="also write SVG plots (needs matplotlib)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials (default 1)")
    parser = _Parser(prog="multisio", description="Multilinear rough singular integral workbench.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    helps = {
        "converge-truncation": "successive truncation differences and their order",
        "converge-lacunary": "lacunary multiplier limits as nu -> -inf and +inf",
        "norm-scan": "seeded norm ratios of the maximal operators",
        "decay-study": "wavelet coefficient norm tables and fitted slopes",
        "probe": "identity and inequality probes",
        "selftest": "fast exact checks",
    }
    parser.subcommands = {}
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        parser.subcommands[name] = p
        if name == "norm-scan":
            p.add_argument("--operator", choices=("sio", "lacunary"), default=None,
                           help="maximal truncated singular integral or lacunary maximal multiplier")
    return parser


def _resolve_config(args):
    allowed = SUBCOMMANDS[args.command]
    wanted = None
    if getattr(args, "operator", None):
        wanted = "norm_scan_" + args.operator
    if args.config:
        cfg = load_config(args.config, experiment=wanted, default=allowed[0])
    else:
        cfg = default_config(wanted or allowed[0])
    if cfg.experiment not in allowed:
        raise MultisioError(f"config describes {cfg.experiment!r}, which '{args.command}' does not run")
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra:
        target = parser.subcommands.get(args.command, parser)
        target.error(f"unrecognized arguments: {' '.join(extra)}")
    if not args.command:
        parser.print_help(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = _resolve_config(args)
    except MultisioError as exc:
        print(f"multisio: config error: {exc}", file=sys.stderr)
        return 2
    # one BLAS thread keeps floating point reductions identical at any --threads
    with threadpool_limits(limits=1):
        try:
            report = run_experiment(cfg, threads=args.threads)
        except MultisioError as exc:
            print(f"multisio: {type(exc).__name__}: {exc}", file=sys.stderr)
            return 2
    for line in report.summary_lines():
        print(line)
    if args.out:
        path = report.write(args.out)
        log.info("wrote %s", path)
        if args.plot:
            from .plots import write_plots

            try:
                for p in write_plots(report, args.out):
                    log.info("wrote %s", p)
            except ImportError:  # pragma: no cover
                log.warning("matplotlib is not installed; skipping plots")
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
