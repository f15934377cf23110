"""Plain-text frame serialization.

Format (UTF-8, LF newlines), one file per frame::

    telet-frame v1 field=<real|complex> d=<d> N=<N>
    <entry>,<entry>,...,<entry>      # one line per vector, d entries each

Complex entries are written ``<re>:<im>``; all numbers carry 17 significant
digits so a write/read round trip is exact.  Lines starting with ``#`` are
comments.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .frame import COMPLEX, REAL, Frame

FORMAT_TAG = "telet-frame"
FORMAT_VERSION = "v1"


class FrameFormatError(ValueError):
    """Raised on malformed frame files."""


def _format_entry(value, field: str) -> str:
    if field == COMPLEX:
        return f"{value.real:.17g}:{value.imag:.17g}"
    return f"{value:.17g}"


def write_frame(frame: Frame, path) -> None:
    """Write ``frame`` to ``path`` in the v1 text format."""
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION} field={frame.field} d={frame.d} N={frame.n}"]
    for col in range(frame.n):
        lines.append(",".join(_format_entry(v, frame.field) for v in frame.data[:, col]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _parse_header(line: str) -> tuple[str, int, int]:
    tokens = line.split()
    if len(tokens) != 5 or tokens[0] != FORMAT_TAG or tokens[1] != FORMAT_VERSION:
        raise FrameFormatError(f"malformed header: {line!r}")
    fields = {}
    for token in tokens[2:]:
        key, _, value = token.partition("=")
        if not value:
            raise FrameFormatError(f"malformed header token: {token!r}")
        fields[key] = value
    if set(fields) != {"field", "d", "N"}:
        raise FrameFormatError(f"header must carry field, d, N: {line!r}")
    if fields["field"] not in (REAL, COMPLEX):
        raise FrameFormatError(f"unknown scalar field in header: {fields['field']!r}")
    try:
        d = int(fields["d"])
        n = int(fields["N"])
    except ValueError as exc:
        raise FrameFormatError(f"non-integer dimensions in header: {line!r}") from exc
    if d < 1 or n < 1:
        raise FrameFormatError(f"dimensions must be positive: {line!r}")
    return fields["field"], d, n


def _parse_entry(token: str, field: str) -> complex | float:
    token = token.strip()
    if field == COMPLEX:
        parts = token.split(":")
        if len(parts) != 2:
            raise FrameFormatError(f"complex entry must be re:im, got {token!r}")
        try:
            value = complex(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise FrameFormatError(f"unparseable entry {token!r}") from exc
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise FrameFormatError(f"non-finite entry {token!r}")
        return value
    if ":" in token:
        raise FrameFormatError(f"real frame file carries an imaginary part: {token!r}")
    try:
        value = float(token)
    except ValueError as exc:
        raise FrameFormatError(f"unparseable entry {token!r}") from exc
    if not math.isfinite(value):
        raise FrameFormatError(f"non-finite entry {token!r}")
    return value


def read_frame(path) -> Frame:
    """Read a frame from ``path``, validating format and frame invariants."""
    lines = [
        line
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise FrameFormatError("empty frame file")
    field, d, n = _parse_header(lines[0])
    body = lines[1:]
    if len(body) != n:
        raise FrameFormatError(f"expected {n} vector lines, found {len(body)}")
    dtype = np.complex128 if field == COMPLEX else np.float64
    data = np.empty((d, n), dtype=dtype)
    for col, line in enumerate(body):
        tokens = line.split(",")
        if len(tokens) != d:
            raise FrameFormatError(f"vector line {col} has {len(tokens)} entries, expected {d}")
        for row, token in enumerate(tokens):
            data[row, col] = _parse_entry(token, field)
    return Frame(field, data)
