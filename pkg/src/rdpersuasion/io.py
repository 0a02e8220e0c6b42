"""CSV ingestion and key = value config files."""

from __future__ import annotations

import configparser
import csv
import math
from pathlib import Path
from typing import Optional

from .core import Observation
from .errors import ConfigError, MissingColumn, NonBinaryValue, ParseError


def _find(header, name, required=True):
    lowered = [h.strip().lower() for h in header]
    try:
        return lowered.index(name.lower())
    except ValueError:
        if required:
            raise MissingColumn(f"column {name!r} not found in header {header}") from None
        return None


def _binary(text, col, row):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"row {row}: cannot parse {col}={text!r} as a number") from None
    if v not in (0.0, 1.0):
        raise NonBinaryValue(f"row {row}: {col} must be 0 or 1, got {text!r}")
    return int(v)


def read_csv(path, y_col: str = "y", d_col: str = "d", w_col: str = "w",
             cluster_col: Optional[str] = None) -> list[Observation]:
    """Read observations from a UTF-8 CSV with a header row.

    Column names match case-insensitively. ``d`` and the cluster column are
    optional; an explicitly requested cluster column must exist. Row numbers
    in error messages count data rows from 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: file is empty") from None
        iy = _find(header, y_col)
        iw = _find(header, w_col)
        id_ = _find(header, d_col, required=False)
        ic = None
        if cluster_col is not None:
            ic = _find(header, cluster_col)
        elif _find(header, "cluster", required=False) is not None:
            ic = _find(header, "cluster")
        out = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
            y = _binary(row[iy].strip(), y_col, row_no)
            try:
                w = float(row[iw])
            except ValueError:
                raise ParseError(f"row {row_no}: cannot parse {w_col}={row[iw]!r}") from None
            if not math.isfinite(w):
                raise ParseError(f"row {row_no}: {w_col} is not finite")
            d = None
            if id_ is not None and row[id_].strip() != "":
                d = _binary(row[id_].strip(), d_col, row_no)
            cl = row[ic].strip() if ic is not None else None
            out.append(Observation(y=y, w=w, d=d, cluster=cl))
    return out


def write_csv(path, sample):
    cols = ["y", "d", "w"] if sample.d is not None else ["y", "w"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for i in range(len(sample)):
            row = [int(sample.y[i])]
            if sample.d is not None:
                row.append(int(sample.d[i]))
            row.append(repr(float(sample.w[i])))
            wr.writerow(row)


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys are normalised
    to lower case with dashes turned into underscores."""
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",),
                                       delimiters=("=",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return {k.replace("-", "_"): v.strip() for k, v in parser["run"].items()}


def example_path(name: str) -> Path:
    """Path of a bundled example file, e.g. ``"sharp_example.csv"``."""
    p = Path(__file__).with_name("data") / name
    if not p.is_file():
        raise FileNotFoundError(f"no bundled example named {name!r}")
    return p
