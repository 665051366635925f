"""Delimited result emission: versioned CSV and JSON with a fixed schema.

CSV layout: a schema comment line, a header line, then one row per sweep
point.  Numbers carry 17 significant digits so both formats round-trip to
identical floats.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .pipeline import COLUMNS, RateReport

SCHEMA = "cvqkd-rates-v1"
SCHEMA_LINE = f"# schema={SCHEMA}"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.17g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def report_to_dict(report: RateReport) -> dict:
    return {name: _json_value(getattr(report, name)) for name in COLUMNS}


def write_csv(path: str | Path, reports: Sequence[RateReport]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as handle:
        handle.write(SCHEMA_LINE + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COLUMNS)
        for report in reports:
            writer.writerow([_cell(getattr(report, name)) for name in COLUMNS])
    return path


def write_json(path: str | Path, reports: Sequence[RateReport]) -> Path:
    """JSON output: an array of row objects keyed by the CSV column names."""
    path = Path(path)
    with open(path, "w") as handle:
        json.dump([report_to_dict(r) for r in reports], handle, indent=2)
        handle.write("\n")
    return path


def write_reports(
    path: str | Path, reports: Sequence[RateReport], fmt: str = "csv"
) -> Path:
    if fmt == "csv":
        return write_csv(path, reports)
    if fmt == "json":
        return write_json(path, reports)
    raise ValueError(f"unknown output format {fmt!r}")


def read_csv(path: str | Path) -> list[dict]:
    """Parse a rates CSV back into row dicts (floats where possible)."""
    rows: list[dict] = []
    with open(path, newline="") as handle:
        first = handle.readline().strip()
        if not first.startswith("# schema="):
            raise ValueError(f"{path} is missing the schema line")
        reader = csv.DictReader(handle)
        for raw in reader:
            row = {}
            for key, text in raw.items():
                if text == "":
                    row[key] = None
                else:
                    try:
                        row[key] = float(text)
                    except ValueError:
                        row[key] = text
            rows.append(row)
    return rows


def read_json(path: str | Path) -> list[dict]:
    with open(path) as handle:
        payload = json.load(handle)
    if not isinstance(payload, list):
        raise ValueError(f"{path}: expected an array of row objects")
    return payload


def format_table(reports: Iterable[RateReport], fields: Sequence[str]) -> str:
    """Plain-text table for terminal display."""
    rows = [[_cell(getattr(r, f)) or "-" for f in fields] for r in reports]
    widths = [
        max(len(f), *(len(row[i]) for row in rows)) if rows else len(f)
        for i, f in enumerate(fields)
    ]
    lines = ["  ".join(f.ljust(w) for f, w in zip(fields, widths))]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
