"""Result tables and their CSV form.

CSV layout, fixed so golden-file comparisons are byte-exact:

    # key = value            metadata comment lines (config echo, version)
    # timestamp = ...        excluded from any byte comparison
    col_a,col_b,...          mandatory header
    ...                      one line per row, LF endings, UTF-8

Floats are written with repr(), the shortest decimal string that round
trips to the same double, so identical runs produce identical bytes.
"""

import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

TIMESTAMP_KEY = "timestamp"


@dataclass
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def format_value(v):
    """Shortest round-trip string for CSV cells."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(table, path, include_timestamp=True):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    lines = []
    for k, v in table.metadata.items():
        lines.append("# %s = %s" % (k, format_value(v)))
    if include_timestamp:
        stamp = datetime.now(timezone.utc).isoformat()
        lines.append("# %s = %s" % (TIMESTAMP_KEY, stamp))
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(format_value(row[c]) for c in table.columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Parse a table back: (metadata, columns, rows of raw strings)."""
    metadata = {}
    columns = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, _, v = body.partition("=")
                    metadata[k.strip()] = v.strip()
                continue
            cells = line.split(",")
            if columns is None:
                columns = tuple(cells)
            else:
                rows.append(dict(zip(columns, cells)))
    if columns is None:
        raise ValueError("no header found in %s" % path)
    return metadata, columns, rows


def csv_fingerprint(path, ignore_columns=()):
    """Canonical bytes for determinism checks.

    Drops the timestamp metadata line and masks the named columns (used
    for wall-clock fields, which legitimately differ between reruns).
    """
    out = []
    columns = None
    drop = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith(TIMESTAMP_KEY) and "=" in body:
                    continue
                out.append(line)
                continue
            cells = line.split(",")
            if columns is None:
                columns = cells
                drop = {i for i, c in enumerate(columns) if c in ignore_columns}
            else:
                cells = ["_" if i in drop else c for i, c in enumerate(cells)]
            out.append(",".join(cells))
    return "\n".join(out).encode("utf-8")
