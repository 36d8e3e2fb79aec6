"""Deterministic text serialization and atomic file output.

All floating point values are rendered with repr-faithful 17 significant
digits so that artifacts are byte-identical across runs and platforms.  The
stdlib json module does not allow custom float formatting, hence the small
emitter here.
"""

from __future__ import annotations

import math
import os
import tempfile
from collections.abc import Mapping, Sequence

import numpy as np

__all__ = [
    "fmt_float",
    "dumps_json",
    "write_text_atomic",
    "write_json_atomic",
    "write_csv_atomic",
]


def fmt_float(x: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _emit(obj, parts: list[str], indent: int) -> None:
    pad = "  " * indent
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(_escape(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(fmt_float(float(obj)))
    elif isinstance(obj, Mapping):
        if not obj:
            parts.append("{}")
            return
        parts.append("{\n")
        keys = sorted(obj.keys())
        for i, k in enumerate(keys):
            parts.append(pad + "  " + _escape(str(k)) + ": ")
            _emit(obj[k], parts, indent + 1)
            parts.append(",\n" if i < len(keys) - 1 else "\n")
        parts.append(pad + "}")
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), parts, indent)
    elif isinstance(obj, Sequence):
        if not obj:
            parts.append("[]")
            return
        parts.append("[\n")
        for i, v in enumerate(obj):
            parts.append(pad + "  ")
            _emit(v, parts, indent + 1)
            parts.append(",\n" if i < len(obj) - 1 else "\n")
        parts.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize object of type {type(obj)!r}")


def dumps_json(obj) -> str:
    """Serialize to JSON with sorted keys and 17-digit floats."""
    parts: list[str] = []
    _emit(obj, parts, 0)
    parts.append("\n")
    return "".join(parts)


def write_text_atomic(path: str, text: str) -> None:
    """Write text to path via a temp file + rename in the same directory."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json_atomic(path: str, obj) -> None:
    write_text_atomic(path, dumps_json(obj))


def write_csv_atomic(path: str, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    """Write columns of equal length as CSV with 17-digit floats."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError("header/column count mismatch")
    nrows = len(cols[0]) if cols else 0
    for c in cols:
        if len(c) != nrows:
            raise ValueError("ragged columns")
    lines = [",".join(header)]
    for i in range(nrows):
        cells = []
        for c in cols:
            v = c[i]
            if isinstance(v, (np.integer, int)):
                cells.append(str(int(v)))
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(fmt_float(float(v)))
        lines.append(",".join(cells))
    write_text_atomic(path, "\n".join(lines) + "\n")
