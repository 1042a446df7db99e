"""Command-line parser of the `wemix` tool."""

import argparse
from pathlib import Path

from wemix import __version__
from wemix.commands import cmd_fit, cmd_monitor, cmd_simulate
from wemix.errors import InputError


class WemixArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors surface as InputError (exit code 1)."""

    def error(self, message: str):
        raise InputError(message)


def _column_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_fit_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("fit options")
    group.add_argument("--algorithm", help="wem, wcem, em or cem (default wem)")
    group.add_argument("--raf", help="residual adjustment function, e.g. gkl:0.9, pdm:2, pdm:inf")
    group.add_argument("--kernel", help="folded-normal, gamma or log-transform")
    group.add_argument("--h", type=float, help="kernel bandwidth")
    group.add_argument("--reference", help="raw (chi-square density) or smoothed")
    group.add_argument("--eigen-ratio", type=float, help="eigen-ratio bound c >= 1")
    group.add_argument("--max-iter", type=int)
    group.add_argument("--rel-tol", type=float)
    group.add_argument("--n-starts", type=int)
    group.add_argument("--root-mc-draws", type=int)
    group.add_argument("--unbias-cov", action="store_true", default=None)
    group.add_argument("--seed", type=int)
    group.add_argument("--threads", type=int, help="worker threads (default WEMIX_THREADS)")
    group.add_argument("--config", type=Path, help="JSON file with option values; flags override it")


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("data options")
    group.add_argument("--data", type=Path, help="numeric CSV file")
    group.add_argument("--delimiter", help="field separator (default ',')")
    group.add_argument("--no-header", action="store_true", default=None)
    group.add_argument("--columns", type=_column_list, help="comma list of column names or 1-based positions")


def build_parser() -> argparse.ArgumentParser:
    parser = WemixArgumentParser(prog="wemix", description="Weighted likelihood mixture clustering")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    fit = commands.add_parser("fit", help="fit a mixture to a CSV file")
    _add_data_options(fit)
    _add_fit_options(fit)
    fit.add_argument("--k", type=int, help="number of components")
    fit.add_argument("--detect", action="append", help="detection rule, e.g. chi2:0.01 or weight:0.2 (repeatable)")
    fit.add_argument("--out", type=Path, help="result JSON file")
    fit.set_defaults(func=cmd_fit)

    monitor = commands.add_parser("monitor", help="monitor the fit over grids of h and K")
    _add_data_options(monitor)
    _add_fit_options(monitor)
    monitor.add_argument("--h-grid", help="start:stop:count or a comma list")
    monitor.add_argument("--k-grid", help="comma list or low:high")
    monitor.add_argument("--jump", type=float, help="minimal drop of the downweighting level (default 0.10)")
    monitor.add_argument("--target", type=float, help="fallback downweighting level (default 0.10)")
    monitor.add_argument("--out", type=Path, help="trace CSV file")
    monitor.add_argument("--distances-out", type=Path, help="per-point distances CSV file")
    monitor.set_defaults(func=cmd_monitor)

    simulate = commands.add_parser("simulate", help="run a Monte Carlo study")
    _add_fit_options(simulate)
    simulate.add_argument("--scheme", help="m5 or example4")
    simulate.add_argument("--p", type=int)
    simulate.add_argument("--beta", type=float)
    simulate.add_argument("--eps", type=float)
    simulate.add_argument("--n", type=int, help="total sample size")
    simulate.add_argument("--outlier-quantile", type=float)
    simulate.add_argument("--eps-of-clean", action="store_true", default=None,
                          help="read --eps as a fraction of the clean sample")
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--algorithms", help="comma list, e.g. wem,wcem,em")
    simulate.add_argument("--detect", action="append", help="detection rule (repeatable)")
    simulate.add_argument("--out", type=Path, help="report JSON file")
    simulate.set_defaults(func=cmd_simulate)
    return parser


parser = build_parser()
