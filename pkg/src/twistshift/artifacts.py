"""Deterministic CSV/JSON output.

Floats are written with ``repr`` (shortest round-trip form), rows keep
the order they were produced in, and every file is written to a temporary
name in the target directory and then renamed, so a reader never sees a
half-written artifact.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

HEADER = f"# twistshift {__version__}"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows([fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def payload(text: str) -> str:
    """Drop the version header: the part that must be byte-identical across runs."""
    return "".join(line + "\n" for line in text.splitlines() if not line.startswith("#"))


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [jsonable(x.real), jsonable(x.imag)]
    if isinstance(x, Fraction):
        return fmt(x)
    return x


def json_text(record: dict) -> str:
    return json.dumps(jsonable(record), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return write_atomic(path, csv_text(columns, rows))


def write_json(path: Path, record: dict) -> Path:
    return write_atomic(path, json_text(record))
