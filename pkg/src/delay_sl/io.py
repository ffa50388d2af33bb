"""Parsing of delay/complex arguments and deterministic JSON/CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
import re

import numpy as np

_DELAY = re.compile(
    r"^\s*(?P<num>[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)?\s*\*?\s*(?P<pi>pi|π)?"
    r"\s*(/\s*(?P<den>\d+(\.\d*)?))?\s*$")


def parse_delay(text) -> float:
    """``"0.35pi"``, ``"pi/3"``, ``"2pi/5"``, ``"0.35*pi"`` or a plain number."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _DELAY.match(str(text).strip().lower())
    if not m or (m.group("num") is None and m.group("pi") is None):
        raise ValueError(f"cannot parse delay {text!r}")
    val = float(m.group("num")) if m.group("num") is not None else 1.0
    if m.group("pi"):
        val *= math.pi
    if m.group("den"):
        val /= float(m.group("den"))
    return val


def parse_complex(text) -> complex:
    """``"3+4i"``, ``"-2"``, ``"1.5i"``, ``"i"`` or ``[re, im]``."""
    if isinstance(text, (list, tuple)):
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").lower().replace("i", "j")
    s = re.sub(r"(^|[+-])j", r"\g<1>1j", s)
    try:
        return complex(s)
    except ValueError:
        raise ValueError(f"cannot parse complex number {text!r}") from None


def parse_complex_list(text) -> list[complex]:
    if isinstance(text, (list, tuple)):
        return [parse_complex(t) for t in text]
    return [parse_complex(t) for t in _split_list(str(text))]


def parse_real_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    return [float(t) for t in _split_list(str(text))]


def _split_list(s: str) -> list[str]:
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return parts


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _emit(obj, out: list, indent: int, level: int):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            out.append(f"{pad}{json.dumps(k)}: ")
            _emit(obj[k], out, indent, level + 1)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    return fmt_float(v)


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    out: list[str] = []
    _emit(_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def loads(text: str):
    return json.loads(text)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(float(v), ".17g") if isinstance(v, (float, np.floating))
                    else v for v in r])
    return buf.getvalue()
