"""CSV / JSON emission with 17 significant digits, and the matching parsers."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

CENSUS_COLUMNS = ("ell", "count_all", "count_free", "density_all", "density_free")
CURVE_COLUMNS = ("beta", "value", "derivative", "tail_bound")
RATE_COLUMNS = ("x", "value", "eta", "in_domain")
SAMPLE_COLUMNS = ("sample_index", "S")
SPECTRUM_COLUMNS = ("beta", "r", "lambda_plus", "lambda_minus", "overlap_sq")


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


def to_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # out-of-domain markers are serialized as the string "inf"
        return json.dumps(format_value(v)) if math.isinf(v) else format_value(v)
    if v is None:
        return "null"
    return json.dumps(v)


def to_json(rows: Iterable[dict], columns: Sequence[str]) -> str:
    lines = []
    for row in rows:
        fields = ", ".join(f"{json.dumps(c)}: {_json_scalar(row.get(c))}" for c in columns if c in row)
        lines.append("  {" + fields + "}")
    return "[\n" + ",\n".join(lines) + "\n]\n"


def record_to_json(record: dict) -> str:
    return to_json([record], list(record))[2:-3].strip() + "\n"


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    if text in ("inf", "-inf"):
        return text
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return [dict(zip(header, map(_parse_cell, row))) for row in reader]


def parse_json(text: str) -> list[dict]:
    data = json.loads(text)
    return data if isinstance(data, list) else [data]
