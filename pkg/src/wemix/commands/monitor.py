"""`wemix monitor`: sweep the (h, K) grid and suggest a bandwidth."""

import argparse
import logging
from pathlib import Path

from wemix.commands.common import build_fit_config, build_run_config, merge_options, require, resolve_seed
from wemix.dataio import monitor_frames, read_data, write_csv
from wemix.errors import GridTooSmall
from wemix.schemas.documents import MonitorGridSpec
from wemix.selection.monitor import DEFAULT_JUMP, DEFAULT_TARGET, monitor, suggest_h
from wemix.utils.parsing import parse_float_grid, parse_int_grid

logger = logging.getLogger(__name__)


def _grid(value, parser) -> list:
    return parser(value) if isinstance(value, str) else sorted(value)


def distances_path(out_path: Path) -> Path:
    return out_path.with_name(f"{out_path.stem}_distances.csv")


def cmd_monitor(args: argparse.Namespace) -> int:
    """Write the long-format trace and per-point distances, print the suggested h."""
    options = merge_options(args)
    grid = MonitorGridSpec(
        h_values=_grid(require(options, "h_grid"), parse_float_grid),
        k_values=_grid(require(options, "k_grid"), parse_int_grid),
    )
    seed = resolve_seed(options)
    run = build_run_config(options, build_fit_config({**options, "h": grid.h_values[0]}, seed))

    data, _ = read_data(run.data, delimiter=run.delimiter, header=run.header, columns=run.columns)
    result = monitor(data, run.fit, grid, threads=run.threads)

    trace, distances = monitor_frames(result)
    write_csv(trace, run.out)
    write_csv(distances, Path(options.get("distances_out") or distances_path(run.out)))

    try:
        suggestion = suggest_h(result, jump=float(options.get("jump", DEFAULT_JUMP)),
                               target=float(options.get("target", DEFAULT_TARGET)))
        print(f"suggested h={suggestion.h:g} for K={suggestion.k} "
              f"(rationale: {suggestion.rationale}, downweighting {suggestion.downweighting:.4f})")
    except GridTooSmall as e:
        print(f"no suggested h: {e}")
    failed = sum(1 for cell in result.cells if not cell.ok)
    if failed:
        logger.warning("%d of %d monitor cells failed", failed, len(result.cells))
    return 0
