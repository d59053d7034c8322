"""Deterministic CSV and SVG output."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

import numpy as np

from .logscalar import LogScalar

__all__ = ["fmt", "csv_text", "write_csv", "plot_lines"]

DIGITS = 15


def fmt(value) -> str:
    """Fixed 15-significant-digit rendering; LogScalars out of range print as ``exp(<log>)``."""
    if isinstance(value, LogScalar):
        return value.format(DIGITS)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{DIGITS}g}"
    if isinstance(value, (complex, np.complexfloating)):
        c = complex(value)
        return f"{c.real:.{DIGITS}g}{c.imag:+.{DIGITS}g}j"
    if value is None:
        return ""
    return str(value)


def csv_text(comments: Iterable[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV with ``#`` comment lines, a header row and LF line endings."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(target: Union[str, Path, TextIO, None], comments: Iterable[str], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    text = csv_text(comments, columns, rows)
    if target is None:
        return text
    if isinstance(target, (str, Path)):
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        target.write(text)
    return text


def plot_lines(
    path: Union[str, Path],
    x: Sequence[float],
    series: Mapping[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: Optional[str] = None,
    hline: Optional[float] = None,
) -> None:
    """Line plot saved as SVG with fixed metadata so repeated runs match byte for byte."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "flatbergman", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for label, ys in series.items():
            ax.plot(x, ys, label=label, linewidth=1.2)
        if hline is not None:
            ax.axhline(hline, color="0.4", linestyle="--", linewidth=0.8)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(fontsize=8)
        fig.tight_layout()
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
