"""CSV ingestion of numeric data matrices."""

import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from wemix.errors import InputError

logger = logging.getLogger(__name__)


def _select_columns(frame: pd.DataFrame, columns: Sequence[str], header: bool) -> pd.DataFrame:
    selected = []
    for column in columns:
        if header and column in frame.columns:
            selected.append(column)
        elif column.isdigit() and 1 <= int(column) <= frame.shape[1]:
            selected.append(frame.columns[int(column) - 1])
        else:
            raise InputError(f"unknown column {column!r}")
    return frame[selected]


def read_data(path: Path, delimiter: str = ",", header: bool = True,
              columns: Optional[Sequence[str]] = None) -> tuple[np.ndarray, list[str]]:
    """Read a numeric CSV into an n x p matrix.

    Args:
        path: CSV file
        delimiter: Field separator; never inferred
        header: Whether the first line holds column names
        columns: Column names, or 1-based positions, to keep (all when omitted)

    Returns:
        (data, column names)

    Raises:
        InputError: for unreadable files, ragged rows, non-numeric or
            non-finite cells (with the offending line number) and empty data
    """
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
        )
    except FileNotFoundError as e:
        raise InputError(f"no such file: {path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputError(f"cannot parse {path}: {e}") from e

    if not header:
        frame.columns = [str(i + 1) for i in range(frame.shape[1])]
    if columns:
        frame = _select_columns(frame, columns, header)
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        raise InputError(f"{path} contains no data rows")

    first_line = 2 if header else 1
    values = np.empty(frame.shape, dtype=float)
    for j, name in enumerate(frame.columns):
        parsed = pd.to_numeric(frame[name].str.strip(), errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(parsed)
        if bad.any():
            i = int(np.argmax(bad))
            raise InputError(f"column {name!r}: non-numeric or non-finite value {frame[name].iloc[i]!r}",
                             line=first_line + i)
        values[:, j] = parsed
    logger.info("read %d rows x %d columns from %s", values.shape[0], values.shape[1], path)
    return values, [str(c) for c in frame.columns]
