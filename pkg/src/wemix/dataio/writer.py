"""JSON and CSV writers for result documents, monitor traces and study tables."""

import logging
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from wemix.schemas.documents import MonitorGrid, StudyReport

logger = logging.getLogger(__name__)

MONITOR_COLUMNS = ["k", "h", "downweighting", "weighted_bic", "weighted_aic", "wclass_loglik", "converged"]
DISTANCE_COLUMNS = ["k", "h", "row", "dist2"]


def write_json(document: BaseModel, path: Path) -> None:
    """Write a document as UTF-8 JSON."""
    try:
        Path(path).write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
    except Exception as e:
        logger.error(e, exc_info=True)
        raise


def write_csv(frame: pd.DataFrame, path: Path) -> None:
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except Exception as e:
        logger.error(e, exc_info=True)
        raise


def monitor_frames(grid: MonitorGrid) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Long-format trace (one row per cell) and per-point distances (one row per cell and point)."""
    trace = pd.DataFrame([c.model_dump(include=set(MONITOR_COLUMNS)) for c in grid.cells],
                         columns=MONITOR_COLUMNS)
    distances = pd.DataFrame(
        [(c.k, c.h, i + 1, d) for c in grid.cells for i, d in enumerate(c.dist2)],
        columns=DISTANCE_COLUMNS,
    )
    return trace, distances


def study_frame(report: StudyReport) -> pd.DataFrame:
    """One row per (trial, algorithm, rule)."""
    return pd.DataFrame([r.model_dump() for r in report.records],
                        columns=list(report.records[0].model_dump()) if report.records else None)
