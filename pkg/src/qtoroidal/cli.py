"""Command-line entry point.

    qtoroidal verify --m 2 --n 1 --weight L0 --degree 3 --ball 1 --window 3 --suite all --out report.json

Exit status: 0 when every check passed, 1 when a check failed or ran out of
budget, 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .report import COMMANDS, ConfigError, SuiteConfig, exit_status, read_config_file, run_suite, write_report

EXIT_FAIL = 1
EXIT_USAGE = 2

log = logging.getLogger("qtoroidal")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtoroidal", description="Exact checks of the free-field realisation "
                     "of the quantum toroidal gl(m|n) superalgebra.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "cartan": "Cartan and skew matrix invariants",
        "contractions": "closed-form contractions against the oscillator computation",
        "verify": "defining relations on a truncated Fock module, plus level and grading",
        "screenings": "screening operator identities",
        "coeffs": "scalar identities behind the evaluation map",
        "all": "every suite above",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--weight", help="L0, L<i> or aLm:<int>")
        p.add_argument("--degree", type=int, help="creation degree D of test vectors")
        p.add_argument("--ball", type=int, help="lattice radius B of test vectors")
        p.add_argument("--window", type=int, help="mode window W")
        p.add_argument("--order", type=int, help="series order R")
        p.add_argument("--rmax", type=int, help="largest level r for coefficient checks")
        p.add_argument("--suite", help="'all' or a comma list of relation names")
        p.add_argument("--jobs", type=int, help="worker processes for the relation suite")
        p.add_argument("--budget", type=float, help="wall-clock seconds per module before stopping")
        p.add_argument("--convention", help="'corrected' (default) or 'literal' sign of F_i")
        p.add_argument("--out", help="report path (stdout when omitted)")
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in ("m", "n", "weight", "degree", "ball", "window", "order", "rmax", "suite", "jobs", "budget",
                "convention", "out"):
        val = getattr(args, key)
        if val is not None:
            values[key] = val
    return SuiteConfig.from_mapping(values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"qtoroidal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    commands = COMMANDS if args.command == "all" else (args.command,)
    log.info("running %s for (m, n) = (%d, %d)", ",".join(commands), cfg.m, cfg.n)
    report = run_suite(cfg, commands)
    write_report(report, cfg.out)
    s = report["summary"]
    print(f"{s['pass']}/{s['total']} checks passed, {s['fail']} failed, {s['incomplete']} incomplete",
          file=sys.stderr)
    return exit_status(report)


if __name__ == "__main__":
    raise SystemExit(main())
