"""``minsurf-index`` command line: one subcommand per pipeline stage.

Exit status: 0 when every check passes, 1 when a check fails (the failing
check ids are printed), 2 for an invalid configuration, 3 when a computation
is numerically inconclusive.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig
from .errors import DomainError, InconclusiveError
from .pipeline import STAGES, Context, run_report, run_stage

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
SUBCOMMANDS = tuple(STAGES) + ("report",)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser():
    parser = _Parser(prog="minsurf-index",
                     description="Index computations and checks for rotationally symmetric minimal hypersurfaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    defaults = RunConfig()
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="file of key=value lines")
        p.add_argument("--quiet", action="store_true", help="print only failures")
        for key in RunConfig.keys():
            p.add_argument(f"--{key}", dest=f"cfg_{key}", default=None, metavar="VALUE",
                           help=f"default: {getattr(defaults, key)}")
    return parser


def load_config(args):
    cfg = RunConfig()
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise DomainError(f"cannot read config: {exc}") from exc
        cfg = RunConfig.from_text(text)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_") and v is not None}
    return cfg.updated(overrides).validate()


def run_subcommand(name, config, out=None, quiet=False):
    """Run one subcommand with ``config``; return ``(exit status, stage results)``."""
    if name not in SUBCOMMANDS:
        raise DomainError(f"unknown subcommand {name!r}")
    out = sys.stdout if out is None else out
    ctx = Context(config)
    results = run_report(ctx) if name == "report" else [run_stage(name, ctx)]
    outdir = Path(config.output_dir)
    for r in results:
        for path in r.write(outdir):
            if not quiet:
                print(f"wrote {path}", file=out)
    checks = results[-1].checks if name == "report" else [c for r in results for c in r.checks]
    if config.n == 3 and config.kind != "plane" and not quiet:
        print("note: n = 3 is outside the theorem regime", file=out)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        if not quiet or not c.passed:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.check_id}", file=out)
    return (EXIT_CHECK_FAILED if failed else EXIT_OK), results


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args)
    except (_UsageError, DomainError) as exc:
        print(f"minsurf-index: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        status, _ = run_subcommand(args.command, config, quiet=args.quiet)
    except InconclusiveError as exc:
        print(f"minsurf-index: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except DomainError as exc:
        print(f"minsurf-index: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return status


if __name__ == "__main__":
    sys.exit(main())
