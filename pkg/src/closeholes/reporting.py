"""Atomic CSV/JSON table writers with schema versioning."""

from __future__ import annotations

import json
import os
import tempfile

SCHEMA_VERSION = 1


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, columns, rows):
    """UTF-8 CSV with a header row and a trailing schema_version column."""
    lines = [",".join(list(columns) + ["schema_version"])]
    for row in rows:
        lines.append(",".join([_cell(v) for v in row] + [str(SCHEMA_VERSION)]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path, payload):
    """JSON mirror carrying the same schema_version field."""
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    _atomic_write(path, json.dumps(body, indent=2, sort_keys=True) + "\n")


def table_payload(columns, rows, **meta):
    return {
        "columns": list(columns),
        "rows": [[_json_cell(v) for v in row] for row in rows],
        **meta,
    }


def _json_cell(v):
    if hasattr(v, "item"):
        return v.item()
    return v
