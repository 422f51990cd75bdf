# services/export_report.py
"""
Report Export Service

This module renders workbench results for the command line and for files:
1. Key-value text (one `key = value` per line, stable order) for golden tests
2. Human-readable tables from DataFrames
3. CSV export of any result frame
"""

import logging
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import pandas as pd

logger = logging.getLogger(__name__)


def key_values(pairs: Iterable[Tuple[str, object]]) -> str:
    """Render (key, value) pairs as `key = value` lines."""
    return "\n".join(f"{key} = {value}" for key, value in pairs)


def frame_key_values(df: pd.DataFrame, key_column: str, value_columns: Sequence[str],
                     prefix: str = "") -> list:
    """
    Flatten a frame into (key, value) pairs.

    Parameters
    ----------
    df : pd.DataFrame
        Frame to flatten; row order is kept.
    key_column : str
        Column whose text identifies the row, e.g. the environment.
    value_columns : sequence of str
        Columns to emit, each as `<column>[<key>]`.
    prefix : str, optional
        Prepended to every key.

    Returns
    -------
    list of (str, str)
    """
    pairs = []
    for record in df.to_dict("records"):
        for column in value_columns:
            pairs.append((f"{prefix}{column}[{record[key_column]}]", str(record[column])))
    return pairs


def format_table(df: pd.DataFrame) -> str:
    """Plain-text table for human output."""
    if df.empty:
        return "(no rows)"
    return df.to_string(index=False)


def export_frame(df: pd.DataFrame, path) -> Path:
    """
    Write a result frame to CSV.

    Raises
    ------
    ValueError
        If the frame has no columns.
    """
    if df.columns.empty:
        raise ValueError("nothing to export: the frame has no columns")
    path = Path(path)
    df.to_csv(path, index=False)
    logger.debug("wrote %d rows to %s", len(df), path)
    return path
