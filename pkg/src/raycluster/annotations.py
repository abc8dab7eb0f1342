"""Readers and writers for line-oriented annotation and detection files.

Every parser is total: a bad line becomes a :class:`MalformedLine` entry in
the result and parsing carries on with the next line.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidPolygon
from .geometry import Polygon

SOURCES = ("icdar2015", "ctw1500", "msra-td500", "synth", "polygon")
DONT_CARE = "###"
_INT = re.compile(r"^[+-]?\d+$")


@dataclass(frozen=True)
class AnnotationRecord:
    polygon: Polygon
    ignore: bool = False
    source: str = "polygon"
    text: str = ""


@dataclass(frozen=True)
class MalformedLine:
    line: int
    message: str

    def __str__(self):
        return f"line {self.line}: {self.message}"


class ParseResult(NamedTuple):
    records: list
    errors: list


class _Bad(Exception):
    pass


def _lines(text):
    if isinstance(text, bytes):
        text = text.decode("utf-8-sig")
    text = text.lstrip("﻿")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            yield number, line


def _ints(fields):
    out = []
    for f in fields:
        f = f.strip()
        if not _INT.match(f):
            raise _Bad(f"expected an integer, got {f!r}")
        out.append(int(f))
    return out


def _floats(fields):
    try:
        out = [float(f) for f in fields]
    except ValueError as exc:
        raise _Bad(str(exc)) from None
    if not all(math.isfinite(v) for v in out):
        raise _Bad("non-finite coordinate")
    return out


def _polygon(coords):
    try:
        return Polygon(list(zip(coords[0::2], coords[1::2])))
    except InvalidPolygon as exc:
        raise _Bad(str(exc)) from None


def _run(text, parse_line):
    records, errors = [], []
    for number, line in _lines(text):
        try:
            records.append(parse_line(line))
        except _Bad as exc:
            errors.append(MalformedLine(number, str(exc)))
    return ParseResult(records, errors)


def parse_icdar2015(text) -> ParseResult:
    """``x1,y1,...,x4,y4,transcription`` per line; ``###`` marks don't-care."""

    def line(s):
        fields = s.split(",")
        if len(fields) < 9:
            raise _Bad(f"expected 8 coordinates and a transcription, got {len(fields)} fields")
        coords = _ints(fields[:8])
        text = ",".join(fields[8:])
        return AnnotationRecord(_polygon(coords), text == DONT_CARE, "icdar2015", text)

    return _run(text, line)


def parse_ctw1500(text, mode: str = "absolute") -> ParseResult:
    """14-point curved-text polygons.

    ``absolute``: 28 integers. ``bbox-offset``: ``xmin,ymin,xmax,ymax`` then
    28 offsets from ``(xmin, ymin)``. A trailing transcription field is
    accepted; ``###`` marks don't-care.
    """
    if mode not in ("absolute", "bbox-offset"):
        raise ValueError("mode must be 'absolute' or 'bbox-offset'")
    want = 28 if mode == "absolute" else 32

    def line(s):
        fields = s.split(",")
        text = ""
        if len(fields) == want + 1 and not _INT.match(fields[-1].strip()):
            text = fields.pop().strip()
        if len(fields) != want:
            raise _Bad(f"expected {want} integers, got {len(fields)} fields")
        vals = _ints(fields)
        if mode == "bbox-offset":
            x0, y0 = vals[0], vals[1]
            vals = [v + (x0 if k % 2 == 0 else y0) for k, v in enumerate(vals[4:])]
        return AnnotationRecord(_polygon(vals), text.startswith(DONT_CARE), "ctw1500", text)

    return _run(text, line)


def msra_box(x, y, w, h, theta):
    """Corners of the ``w x h`` box at ``(x, y)`` rotated by ``theta`` about its center."""
    cx, cy = x + w / 2.0, y + h / 2.0
    c, s = math.cos(theta), math.sin(theta)
    corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]
    return [(cx + c * (px - cx) - s * (py - cy), cy + s * (px - cx) + c * (py - cy)) for px, py in corners]


def parse_msra_td500(text) -> ParseResult:
    """``index difficulty x y w h rotation`` per line (spaces or commas)."""

    def line(s):
        fields = re.split(r"[\s,]+", s)
        if len(fields) != 7:
            raise _Bad(f"expected 7 fields, got {len(fields)}")
        _ints(fields[:2])
        difficulty = int(fields[1])
        x, y, w, h, theta = _floats(fields[2:])
        if w <= 0 or h <= 0:
            raise _Bad("box width and height must be positive")
        return AnnotationRecord(Polygon(msra_box(x, y, w, h, theta)), difficulty == 1, "msra-td500")

    return _run(text, line)


def parse_polygons(text, source: str = "polygon") -> ParseResult:
    """Generic ``x1,y1,...,xk,yk[,transcription]`` lines with k >= 3."""

    def line(s):
        fields = s.split(",")
        text = ""
        if len(fields) % 2 == 1:
            text = fields.pop().strip()
        if len(fields) < 6:
            raise _Bad(f"need at least 3 points, got {len(fields) // 2}")
        return AnnotationRecord(_polygon(_floats(fields)), text == DONT_CARE, source, text)

    return _run(text, line)


def parse_annotations(text, fmt: str, ctw_mode: str = "absolute") -> ParseResult:
    if fmt == "icdar2015":
        return parse_icdar2015(text)
    if fmt == "ctw1500":
        return parse_ctw1500(text, ctw_mode)
    if fmt == "msra-td500":
        return parse_msra_td500(text)
    if fmt in ("synth", "polygon"):
        return parse_polygons(text, fmt)
    raise ValueError(f"unknown annotation format {fmt!r}; expected one of {SOURCES}")


def fmt4(value) -> str:
    """Fixed 4-decimal text; never emits a negative zero."""
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def _coords(poly):
    return ",".join(f"{fmt4(x)},{fmt4(y)}" for x, y in poly.vertices)


def format_polygons(records) -> str:
    out = []
    for rec in records:
        tail = f",{rec.text}" if rec.text else (f",{DONT_CARE}" if rec.ignore else "")
        out.append(_coords(rec.polygon) + tail + "\n")
    return "".join(out)


class Detection(NamedTuple):
    id: int
    score: float
    polygon: Polygon


def format_detections(polygons, scores) -> str:
    return "".join(
        f"{k},{fmt4(score)},{_coords(poly)}\n" for k, (poly, score) in enumerate(zip(polygons, scores))
    )


def parse_detections(text) -> ParseResult:
    """``id,score,x1,y1,...`` lines as written by the ``decode`` command."""

    def line(s):
        fields = s.split(",")
        if len(fields) < 8 or len(fields) % 2 != 0:
            raise _Bad("expected id, score and at least 3 points")
        (ident,) = _ints(fields[:1])
        score, *coords = _floats(fields[1:])
        return Detection(ident, score, _polygon(coords))

    return _run(text, line)
