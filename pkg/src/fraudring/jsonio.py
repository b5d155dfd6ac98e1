"""JSON emission with full-precision reals.

The standard encoder writes floats with shortest round-trip repr; file
formats here pin 17 significant digits instead so that every serialized
real parses back to the identical 64-bit value and files are byte-stable
across runs.
"""

from __future__ import annotations

import json
import math


def _format_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError("cannot serialize non-finite real")
    s = format(v, ".17g")
    if "e" not in s and "." not in s and "inf" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 0) -> str:
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out) + ("\n" if indent else "")


def dump(obj, path, indent: int = 2) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj, indent=indent))


def _emit(obj, out: list[str], indent: int, depth: int) -> None:
    pad = " " * (indent * (depth + 1)) if indent else ""
    end_pad = " " * (indent * depth) if indent else ""
    sep = ",\n" if indent else ","
    nl = "\n" if indent else ""
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(pad + json.dumps(key) + (": " if indent else ":"))
            _emit(value, out, indent, depth + 1)
            if i + 1 < len(obj):
                out.append(sep)
        out.append(nl + end_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        out.append("[" + nl)
        for i, value in enumerate(obj):
            out.append(pad)
            _emit(value, out, indent, depth + 1)
            if i + 1 < len(obj):
                out.append(sep)
        out.append(nl + end_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
