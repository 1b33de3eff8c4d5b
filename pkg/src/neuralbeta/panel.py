"""Long-format return-panel CSV ingestion and export.

Schema (one row per asset-day)::

    date,asset,y,x_1,...,x_d[,beta_true_1,...,beta_true_d]

`date` is ISO-8601, strictly increasing within an asset; `y` is the response
return and `x_*` the explanatory returns (unitless daily simple returns).
`beta_true_*` columns appear only on synthetic exports. The factor dimension d
must be consistent across the file and no cell may be empty.
"""

from __future__ import annotations

import csv
import re

import numpy as np

from .data import SeriesSample
from .errors import ContractError

__all__ = ["DataFormatError", "ingest_csv", "export_csv"]

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class DataFormatError(ContractError):
    """A panel CSV violates the schema; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _parse_header(header):
    if header[:3] != ["date", "asset", "y"]:
        raise DataFormatError(f"header must start with date,asset,y — got {header[:3]}", line=1)
    xs = [c for c in header if c.startswith("x_")]
    bts = [c for c in header if c.startswith("beta_true_")]
    expected = ["date", "asset", "y"] + [f"x_{i+1}" for i in range(len(xs))] \
        + [f"beta_true_{i+1}" for i in range(len(bts))]
    if header != expected:
        raise DataFormatError(f"columns must be {expected}, got {header}", line=1)
    if not xs:
        raise DataFormatError("need at least one x_ column", line=1)
    if bts and len(bts) != len(xs):
        raise DataFormatError("beta_true_ columns must match x_ columns", line=1)
    return len(xs), bool(bts)


def ingest_csv(path) -> list:
    """Read a return panel into one SeriesSample per asset (order of first
    appearance). Raises DataFormatError with the first offending line."""
    per_asset: dict[str, dict] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", line=1) from None
        d, has_beta = _parse_header(header)
        width = 3 + d + (d if has_beta else 0)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DataFormatError(f"expected {width} cells, got {len(row)}", line=lineno)
            date, asset = row[0], row[1]
            if not _ISO_DATE.match(date):
                raise DataFormatError(f"bad date {date!r}", line=lineno)
            try:
                values = [float(v) for v in row[2:]]
            except ValueError as exc:
                raise DataFormatError(str(exc), line=lineno) from None
            rec = per_asset.setdefault(asset, {"dates": [], "y": [], "x": [], "bt": []})
            if rec["dates"] and date <= rec["dates"][-1]:
                kind = "duplicate" if date == rec["dates"][-1] else "non-monotone"
                raise DataFormatError(f"{kind} date {date} for asset {asset!r}", line=lineno)
            rec["dates"].append(date)
            rec["y"].append(values[0])
            rec["x"].append(values[1:1 + d])
            if has_beta:
                rec["bt"].append(values[1 + d:])
    samples = []
    for asset, rec in per_asset.items():
        samples.append(SeriesSample(
            x=np.asarray(rec["x"]), y=np.asarray(rec["y"]),
            beta_true=np.asarray(rec["bt"]) if has_beta and rec["bt"] else None,
            id=asset, dates=np.asarray(rec["dates"]),
        ))
    if not samples:
        raise DataFormatError("no data rows", line=2)
    return samples


def export_csv(samples, path) -> None:
    """Write samples to the panel schema. Samples without dates get a shared
    synthetic business-day-free calendar starting 2000-01-01."""
    samples = list(samples)
    d = samples[0].d
    has_beta = all(s.beta_true is not None for s in samples)
    header = ["date", "asset", "y"] + [f"x_{i+1}" for i in range(d)] \
        + ([f"beta_true_{i+1}" for i in range(d)] if has_beta else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in samples:
            if s.d != d:
                raise ContractError("mixed factor dimensions in export")
            if s.dates is not None:
                dates = s.dates
            else:
                start = np.datetime64("2000-01-01")
                dates = np.datetime_as_string(start + np.arange(s.length), unit="D")
            for t in range(s.length):
                row = [str(dates[t]), s.id, repr(float(s.y[t]))]
                row += [repr(float(v)) for v in s.x[t]]
                if has_beta:
                    row += [repr(float(v)) for v in s.beta_true[t]]
                writer.writerow(row)
