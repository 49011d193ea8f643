"""File formats: couple documents (JSON), curve CSV and dense matrices.

A couple document looks like::

    {"n": 3, "w0": [1, 1, 1], "w1": [1, 1, 1], "p0": 1, "p1": "inf",
     "elements": {"a": [3, 1, 2]}}

``p0``/``p1`` are numbers or the string ``"inf"``; ``w0``/``w1`` may be a
single number, which is broadcast.  Floats are written with ``repr`` so a
parse of an emitted document gives back the same couple bit for bit.
"""

import hashlib
import io
import json
import math

import numpy as np

from .couple import INF, Couple
from .exceptions import CoupleError


class CoupleFileError(ValueError):
    """A couple document that cannot be parsed or validated."""


def _parse_exponent(value, key):
    if isinstance(value, str):
        if value.strip().lower() == "inf":
            return INF
        raise CoupleFileError(f"{key}: expected a number or \"inf\", got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CoupleFileError(f"{key}: expected a number or \"inf\", got {value!r}")
    return float(value)


def _parse_vector(value, key, n=None):
    if isinstance(value, (int, float)) and not isinstance(value, bool) and n is not None:
        return np.full(n, float(value))
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise CoupleFileError(f"{key}: expected a list of numbers")
    out = np.array(value, dtype=float)
    if n is not None and out.size != n:
        raise CoupleFileError(f"{key}: expected length {n}, got {out.size}")
    return out


def parse_couple_document(text):
    """Parse a couple document; returns ``(couple, elements)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CoupleFileError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CoupleFileError("top level must be an object")
    missing = [k for k in ("n", "w0", "w1", "p0", "p1") if k not in doc]
    if missing:
        raise CoupleFileError(f"missing keys: {', '.join(missing)}")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise CoupleFileError(f"n must be a positive integer, got {n!r}")
    try:
        couple = Couple(
            n,
            _parse_vector(doc["w0"], "w0", n),
            _parse_vector(doc["w1"], "w1", n),
            _parse_exponent(doc["p0"], "p0"),
            _parse_exponent(doc["p1"], "p1"),
        )
    except CoupleError as exc:
        raise CoupleFileError(str(exc)) from None
    elements = {}
    raw = doc.get("elements", {})
    if not isinstance(raw, dict):
        raise CoupleFileError("elements must be an object of named vectors")
    for name, vec in raw.items():
        v = _parse_vector(vec, f"elements.{name}", n)
        if not np.all(np.isfinite(v)):
            raise CoupleFileError(f"elements.{name}: entries must be finite")
        elements[name] = v
    return couple, elements


def load_couple_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CoupleFileError(f"cannot read {path}: {exc.strerror}") from None
    return parse_couple_document(text)


def _emit_exponent(p):
    return "inf" if math.isinf(p) else float(p)


def couple_to_dict(couple, elements=None):
    doc = {
        "n": couple.n,
        "w0": [float(w) for w in couple.w0],
        "w1": [float(w) for w in couple.w1],
        "p0": _emit_exponent(couple.p0),
        "p1": _emit_exponent(couple.p1),
    }
    if elements:
        doc["elements"] = {k: [float(x) for x in v] for k, v in elements.items()}
    return doc


def emit_couple(couple, elements=None):
    """The couple document as text (``parse_couple_document`` inverts it)."""
    return json.dumps(couple_to_dict(couple, elements), indent=2)


def couple_hash(couple):
    """SHA-256 of the canonical document without elements."""
    text = json.dumps(couple_to_dict(couple), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# curve CSV


def write_curve_csv(stream, ts, values, meta):
    """``# key: value`` lines, then the ``t,value`` header and rows."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.size > 1 and np.any(np.diff(ts) <= 0):
        raise ValueError("t must be strictly increasing")
    for key, val in meta.items():
        stream.write(f"# {key}: {val}\n")
    stream.write("t,value\n")
    for t, v in zip(ts, values):
        stream.write(f"{float(t)!r},{float(v)!r}\n")


def curve_csv(ts, values, meta):
    buf = io.StringIO()
    write_curve_csv(buf, ts, values, meta)
    return buf.getvalue()


def read_curve_csv(text):
    """Returns ``(meta, ts, values)``."""
    meta, rows, header = {}, [], False
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif not header:
            if line.strip() != "t,value":
                raise ValueError(f"unexpected header {line!r}")
            header = True
        else:
            t, v = line.split(",")
            rows.append((float(t), float(v)))
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return meta, arr[:, 0], arr[:, 1]


# dense matrices


def write_matrix(stream, matrix):
    """One row per line, entries separated by single spaces."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    for row in m:
        stream.write(" ".join(repr(float(x)) for x in row) + "\n")


def matrix_text(matrix):
    buf = io.StringIO()
    write_matrix(buf, matrix)
    return buf.getvalue()


def read_matrix(text):
    rows = [
        [float(x) for x in line.split()]
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix")
    return np.array(rows, dtype=float)
