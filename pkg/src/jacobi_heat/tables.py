"""CSV and JSON serialization shared by the reports and the command line.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.  JSON uses sorted keys so output is byte-stable.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["format_value", "write_csv", "read_csv", "dumps_json", "restore_floats"]


def format_value(value) -> str:
    """Text form of one CSV cell; floats get 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def write_csv(rows, header, out=None) -> str:
    """Write rows under a header row to ``out`` (path, stream or None) and return the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    text = buf.getvalue()
    if isinstance(out, (str, Path)):
        Path(out).write_text(text, encoding="utf-8")
    elif out is not None:
        out.write(text)
    return text


def _parse(cell: str):
    if cell == "true":
        return True
    if cell == "false":
        return False
    if cell == "":
        return None
    if cell == "-0":
        # only a float prints this way; keep the sign
        return -0.0
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(text: str):
    """Inverse of ``write_csv``: (header, rows) with numbers parsed back."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, [[_parse(c) for c in row] for row in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no infinities; keep them readable and parseable
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(obj) -> str:
    """UTF-8 friendly JSON with sorted keys and a trailing newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


_SPECIAL = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def restore_floats(obj):
    """Undo the string encoding of non-finite floats used by ``dumps_json``."""
    if isinstance(obj, dict):
        return {k: restore_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [restore_floats(v) for v in obj]
    if isinstance(obj, str) and obj in _SPECIAL:
        return _SPECIAL[obj]
    return obj
