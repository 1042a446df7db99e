"""Monitoring sweeps over the bandwidth h and the number of components K."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from wemix.errors import GridTooSmall, WemixError
from wemix.estimation.engine import fit, fit_once
from wemix.models.fit_result import FitResult
from wemix.schemas.documents import HSuggestion, MonitorCell, MonitorGrid, MonitorGridSpec
from wemix.schemas.options import FitConfig
from wemix.selection.criteria import weighted_ic

logger = logging.getLogger(__name__)

DEFAULT_JUMP = 0.10
DEFAULT_TARGET = 0.10


def _cell(data: np.ndarray, k: int, h: float, result: FitResult) -> MonitorCell:
    p = data.shape[1]
    return MonitorCell(
        k=k,
        h=h,
        downweighting=result.downweighting_level,
        weighted_bic=weighted_ic(result, data, "bic", k, p),
        weighted_aic=weighted_ic(result, data, "aic", k, p),
        wclass_loglik=result.weighted_class_loglik,
        converged=result.converged,
        dist2=result.cond_dist2.tolist(),
    )


def _sweep_k(data: np.ndarray, k: int, config: FitConfig, h_values: list[float],
             threads: int) -> list[MonitorCell]:
    cells = []
    previous: Optional[FitResult] = None
    for h in h_values:
        cell_config = config.model_copy(update={"kernel": config.kernel.model_copy(update={"h": h})})
        try:
            if previous is None:
                result = fit(data, k, cell_config, threads=threads)
            else:
                result = fit_once(data, k, previous.model, cell_config)
        except WemixError as e:
            logger.warning("monitor cell K=%d h=%g failed: %s", k, h, e)
            cells.append(MonitorCell(k=k, h=h, error=str(e)))
            continue
        previous = result
        cells.append(_cell(data, k, h, result))
        logger.info("K=%d h=%g downweighting %.4f", k, h, result.downweighting_level)
    return cells


def monitor(data: np.ndarray, config: FitConfig, grid: MonitorGridSpec,
            threads: Optional[int] = None) -> MonitorGrid:
    """Fit every (K, h) cell and record its statistics.

    Within one K the first cell is a full multi-start fit and each later cell
    is warm-started from the previous solution; different K run concurrently.
    A failing cell is recorded with its error and the sweep goes on.
    """
    data = np.asarray(data, dtype=float)
    threads = max(1, threads or 1)
    outer = min(threads, len(grid.k_values))
    inner = max(1, threads // outer)
    with ThreadPoolExecutor(max_workers=outer) as pool:
        sweeps = list(pool.map(lambda k: _sweep_k(data, k, config, grid.h_values, inner), grid.k_values))
    return MonitorGrid(spec=grid, cells=[cell for sweep in sweeps for cell in sweep])


def suggest_h(grid: MonitorGrid, jump: float = DEFAULT_JUMP, target: float = DEFAULT_TARGET) -> HSuggestion:
    """Bandwidth just before the most abrupt drop of the downweighting level.

    Among the K with at least three successful cells, the largest adjacent
    drop level[j] - level[j+1] exceeding `jump` selects h[j]. Without such a
    drop the cell whose level is closest to `target` is returned with the
    rationale "no-changepoint".

    Raises:
        GridTooSmall: if no K has three or more successful cells
    """
    profiles = {k: grid.profile(k) for k in grid.spec.k_values}
    profiles = {k: cells for k, cells in profiles.items() if len(cells) >= 3}
    if not profiles:
        raise GridTooSmall("need at least 3 successful h cells for some K")

    best: Optional[HSuggestion] = None
    for k, cells in profiles.items():
        levels = np.array([c.downweighting for c in cells])
        drops = levels[:-1] - levels[1:]
        j = int(np.argmax(drops))
        if drops[j] > jump and (best is None or drops[j] > best.drop):
            best = HSuggestion(k=k, h=cells[j].h, rationale="changepoint",
                               downweighting=float(levels[j]), drop=float(drops[j]))
    if best is not None:
        return best

    candidates = [(abs(c.downweighting - target), k, c.h, c) for k, cells in profiles.items() for c in cells]
    _, k, h, cell = min(candidates, key=lambda item: item[:3])
    return HSuggestion(k=k, h=h, rationale="no-changepoint", downweighting=cell.downweighting)
