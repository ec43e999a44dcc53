"""Plot-ready table output: CSV with a JSON header block, or a JSON document.

CSV layout::

    # dickehubbard <task>
    # {"model": {...}, "grid": {...}}
    col1,col2,...
    v1,v2,...

The JSON format carries the same three parts as ``{"header", "columns", "rows"}``.
Floats are written with ``repr`` so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

__all__ = ["format_value", "render_csv", "render_json", "write_atomic", "read_csv_table"]


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else v
    return str(v)


def render_csv(task: str, header: dict, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# dickehubbard {task}\n")
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def render_json(task: str, header: dict, columns, rows) -> str:
    doc = {"task": task, "header": header, "columns": list(columns),
           "rows": [[_json_value(v) for v in row] for row in rows]}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_atomic(path, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        os.chmod(tmp, 0o644)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv_table(path):
    """Parse a file written by :func:`render_csv` into (header, columns, rows of str)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[1][2:])
    reader = csv.reader(lines[2:])
    columns = next(reader)
    return header, columns, list(reader)
