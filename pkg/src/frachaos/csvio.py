"""Deterministic CSV output: fixed 17-significant-digit encoding, atomic writes."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import InvalidData


def fmt(x) -> str:
    if isinstance(x, str):
        if any(c in x for c in ',"\n'):
            raise InvalidData(f"label {x!r} needs CSV quoting")
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    v = float(x)
    if not np.isfinite(v):
        raise InvalidData(f"refusing to write non-finite value {v}")
    return format(v, ".17g")


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows) -> int:
    """Write rows atomically; returns the number of data rows."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
    return len(lines) - 1
