"""Polygons and binary rasters.

Coordinates are image pixels: ``x`` grows right, ``y`` grows down. Pixel
``(r, c)`` covers ``[c, c+1) x [r, r+1)`` and is sampled at its center
``(c + 0.5, r + 0.5)``. A point lying on a polygon edge (within
:data:`~raycluster.kernels.TOL`) counts as inside.
"""
from __future__ import annotations

import math
from typing import Iterable, NamedTuple

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import (
    DegenerateShrink,
    DimensionMismatch,
    GeometryError,
    InvalidPolygon,
    OriginOutside,
)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)
MAX_SHRINK_HALVINGS = 8
DEFAULT_SHRINK_RATIO = 0.4


class Point2(NamedTuple):
    x: float
    y: float


class Polygon:
    """Closed polygon stored as a read-only ``(n, 2)`` float64 array.

    Repeated consecutive vertices (including a closing copy of the first
    vertex) are dropped on construction.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=np.float64).reshape(-1, 2)
        if v.shape[0] and not np.isfinite(v).all():
            raise InvalidPolygon("polygon vertices must be finite")
        if v.shape[0] > 1:
            keep = np.any(v != np.roll(v, 1, axis=0), axis=1)
            v = v[keep] if keep.any() else v[:1]
        if v.shape[0] < 3:
            raise InvalidPolygon(f"polygon needs at least 3 distinct vertices, got {v.shape[0]}")
        if _signed_area(v) == 0.0:
            raise InvalidPolygon("polygon has zero area")
        v = np.ascontiguousarray(v)
        v.flags.writeable = False
        self.vertices = v

    def __len__(self):
        return self.vertices.shape[0]

    def __iter__(self):
        return (Point2(float(x), float(y)) for x, y in self.vertices)

    def __repr__(self):
        return f"Polygon(n={len(self)}, area={self.area:.4f})"

    def __eq__(self, other):
        if not isinstance(other, Polygon):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.array_equal(self.vertices, other.vertices)
        )

    __hash__ = None

    @property
    def area(self) -> float:
        return polygon_area(self)

    @property
    def perimeter(self) -> float:
        d = np.diff(self.vertices, axis=0, append=self.vertices[:1])
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    @property
    def bounds(self):
        """``(xmin, ymin, xmax, ymax)``."""
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def translated(self, dx, dy) -> "Polygon":
        return Polygon(self.vertices + np.array([dx, dy]))

    def reversed(self) -> "Polygon":
        return Polygon(self.vertices[::-1])


def as_polygon(poly) -> Polygon:
    return poly if isinstance(poly, Polygon) else Polygon(poly)


def _signed_area(v):
    x = v[:, 0]
    y = v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_area(poly) -> float:
    """Absolute shoelace area in square pixels."""
    return abs(_signed_area(as_polygon(poly).vertices))


def point_in_polygon(p, poly) -> bool:
    """Even-odd rule; points on an edge are inside."""
    v = as_polygon(poly).vertices
    return kernels.point_in_polygon(float(p[0]), float(p[1]), v)


def point_segment_distance(p, a, b) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    t = 0.0 if l2 == 0.0 else min(max(((px - ax) * dx + (py - ay) * dy) / l2, 0.0), 1.0)
    return math.hypot(ax + t * dx - px, ay + t * dy - py)


def boundary_distance(p, poly) -> float:
    """Distance from ``p`` to the nearest edge of ``poly``."""
    v = as_polygon(poly).vertices
    a = v
    b = np.roll(v, -1, axis=0)
    d = b - a
    l2 = (d * d).sum(axis=1)
    p = np.asarray(p, dtype=np.float64)
    t = np.clip(((p - a) * d).sum(axis=1) / l2, 0.0, 1.0)
    q = a + t[:, None] * d - p
    return float(np.sqrt((q * q).sum(axis=1)).min())


def ray_polygon_first_hit(origin, angle: float, poly) -> float:
    """Distance along the ray at ``angle`` to the first boundary crossing.

    When the ray meets the contour several times (curved text), the nearest
    positive hit wins.
    """
    v = as_polygon(poly).vertices
    ox, oy = float(origin[0]), float(origin[1])
    if not kernels.point_in_polygon(ox, oy, v):
        raise OriginOutside(f"ray origin ({ox}, {oy}) is outside the polygon")
    dist = kernels.cast_rays(
        np.array([[ox, oy]]), np.array([math.cos(angle)]), np.array([math.sin(angle)]), v
    )[0, 0]
    if not math.isfinite(dist):
        raise GeometryError("ray from an interior origin did not hit the boundary")
    return float(dist)


# --------------------------------------------------------------------------
# simplicity


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test, touching included."""
    o1 = _orient(*p1, *p2, *q1)
    o2 = _orient(*p1, *p2, *q2)
    o3 = _orient(*q1, *q2, *p1)
    o4 = _orient(*q1, *q2, *p2)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True

    def on(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return (
        (o1 == 0 and on(p1, p2, q1))
        or (o2 == 0 and on(p1, p2, q2))
        or (o3 == 0 and on(q1, q2, p1))
        or (o4 == 0 and on(q1, q2, p2))
    )


def is_simple(poly) -> bool:
    """Brute-force check that no two edges meet except adjacent ones at their shared vertex."""
    v = as_polygon(poly).vertices
    n = len(v)
    a = v
    b = np.roll(v, -1, axis=0)
    # adjacent edges must not fold back onto each other
    prev = v - np.roll(v, 1, axis=0)
    nxt = b - v
    cross = prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]
    dot = (prev * nxt).sum(axis=1)
    if np.any((cross == 0) & (dot < 0)):
        return False
    if n == 3:
        return True
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    return not segment_pairs_intersect(a[i], b[i], a[j], b[j]).any()


def segment_pairs_intersect(p1, p2, q1, q2) -> np.ndarray:
    """Vectorized closed-segment test for row-aligned ``(k, 2)`` endpoint arrays."""

    def orient(s, t, u):
        return (t[:, 0] - s[:, 0]) * (u[:, 1] - s[:, 1]) - (t[:, 1] - s[:, 1]) * (u[:, 0] - s[:, 0])

    def on(s, t, u):
        return (
            (np.minimum(s[:, 0], t[:, 0]) <= u[:, 0]) & (u[:, 0] <= np.maximum(s[:, 0], t[:, 0]))
            & (np.minimum(s[:, 1], t[:, 1]) <= u[:, 1]) & (u[:, 1] <= np.maximum(s[:, 1], t[:, 1]))
        )

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    touch = (
        ((o1 == 0) & on(p1, p2, q1)) | ((o2 == 0) & on(p1, p2, q2))
        | ((o3 == 0) & on(q1, q2, p1)) | ((o4 == 0) & on(q1, q2, p2))
    )
    return proper | touch


# --------------------------------------------------------------------------
# shrinking


def shrink_distance(poly, ratio: float) -> float:
    """Inward offset ``A * (1 - ratio**2) / L`` for area ``A`` and perimeter ``L``."""
    poly = as_polygon(poly)
    return poly.area * (1.0 - ratio * ratio) / poly.perimeter


def _line_join(pi, ui, pj, uj):
    """Intersection of the lines ``pi + s*ui`` and ``pj + t*uj`` or None if parallel."""
    denom = ui[0] * uj[1] - ui[1] * uj[0]
    if abs(denom) < 1e-12:
        return None
    w = pj - pi
    s = (w[0] * uj[1] - w[1] * uj[0]) / denom
    return pi + s * ui


def offset_inward(poly, d: float) -> Polygon:
    """Move every edge inward by ``d`` and rejoin neighbours.

    Convex corners take the intersection of the displaced edges. Reflex
    corners take the miter point when it lies within ``2 d`` of the original
    vertex and a bevel otherwise. Displaced edges that reverse direction are
    dropped one at a time, most reversed first.
    """
    poly = as_polygon(poly)
    if d == 0.0:
        return poly
    v = poly.vertices
    flipped = _signed_area(v) < 0
    if flipped:
        v = v[::-1]
    n = len(v)
    e = np.roll(v, -1, axis=0) - v
    length = np.hypot(e[:, 0], e[:, 1])
    u = e / length[:, None]
    normal = np.stack([-u[:, 1], u[:, 0]], axis=1)
    base = v + d * normal

    active = list(range(n))
    while True:
        if len(active) < 3:
            raise DegenerateShrink(f"offset {d:.4g} collapses the polygon")
        k = len(active)
        starts = [None] * k
        ends = [None] * k
        out = []
        for a in range(k):
            i, j = active[a], active[(a + 1) % k]
            corner = v[j]
            turn = u[i, 0] * u[j, 1] - u[i, 1] * u[j, 0]
            hit = _line_join(base[i], u[i], base[j], u[j])
            if hit is None:
                if np.dot(u[i], u[j]) > 0:
                    pts = [base[j]]
                else:
                    pts = [corner + d * normal[i], corner + d * normal[j]]
            elif turn >= 0 or np.hypot(*(hit - corner)) <= 2.0 * d:
                pts = [hit]
            else:
                pts = [corner + d * normal[i], corner + d * normal[j]]
            ends[a] = pts[0]
            starts[(a + 1) % k] = pts[-1]
            out.extend(pts)
        runs = np.array([np.dot(ends[a] - starts[a], u[active[a]]) for a in range(k)])
        worst = int(np.argmin(runs))
        if runs[worst] < -1e-12:
            del active[worst]
            continue
        break

    out = np.array(out)
    if flipped:
        out = out[::-1]
    try:
        shrunk = Polygon(out)
    except InvalidPolygon as exc:
        raise DegenerateShrink(str(exc)) from exc
    if _signed_area(shrunk.vertices) * _signed_area(poly.vertices) <= 0:
        raise DegenerateShrink("offset polygon flipped orientation")
    if shrunk.area >= poly.area or not is_simple(shrunk):
        raise DegenerateShrink("offset polygon is not a simple interior polygon")
    for p in shrunk.vertices:
        if not point_in_polygon(p, poly) or boundary_distance(p, poly) <= kernels.TOL:
            raise DegenerateShrink("offset polygon leaves the source polygon")
    return shrunk


def shrink_polygon(poly, ratio: float = DEFAULT_SHRINK_RATIO) -> Polygon:
    """Shrink by the inward offset ``d = A (1 - ratio^2) / L``.

    If the full offset annihilates the polygon, ``d`` is halved up to
    :data:`MAX_SHRINK_HALVINGS` times before giving up.
    """
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"shrink ratio must be in (0, 1], got {ratio}")
    poly = as_polygon(poly)
    d = shrink_distance(poly, ratio)
    if d <= 0.0:
        return poly
    for _ in range(MAX_SHRINK_HALVINGS + 1):
        try:
            return offset_inward(poly, d)
        except DegenerateShrink:
            d *= 0.5
    raise DegenerateShrink(f"polygon {poly!r} cannot be shrunk with ratio {ratio}")


# --------------------------------------------------------------------------
# rasters


def rasterize(poly, height: int, width: int, window=None) -> np.ndarray:
    """Binary mask with 1 where the pixel center is inside ``poly``.

    ``window = (top, left, h, w)`` restricts the output to that sub-grid of
    the canvas without changing any pixel decision.
    """
    if height < 1 or width < 1:
        raise ValueError("mask dimensions must be positive")
    v = as_polygon(poly).vertices
    if window is None:
        window = (0, 0, int(height), int(width))
    return kernels.rasterize(v, tuple(int(k) for k in window))


def rasterize_union(polys: Iterable, height: int, width: int) -> np.ndarray:
    out = np.zeros((height, width), dtype=bool)
    for poly in polys:
        out |= rasterize(poly, height, width)
    return out


def _drop_collinear(v):
    prev = v - np.roll(v, 1, axis=0)
    nxt = np.roll(v, -1, axis=0) - v
    cross = prev[:, 0] * nxt[:, 1] - prev[:, 1] * nxt[:, 0]
    return v[cross != 0]


def label_components(mask):
    """8-connected labels numbered in raster order of each component's first pixel."""
    labels, count = ndimage.label(np.asarray(mask, dtype=bool), structure=EIGHT_CONNECTED)
    return labels, count


def trace_component(blob) -> Polygon:
    """Outer boundary of a single 8-connected blob (a boolean crop)."""
    padded = np.pad(np.asarray(blob, dtype=np.uint8), 1)
    first = int(np.argmax(padded.ravel()))
    r0, c0 = divmod(first, padded.shape[1])
    loop = kernels.trace_boundary(padded, r0, c0)
    return Polygon(_drop_collinear(loop) - 1.0)


def trace_outer_contours(mask) -> list[Polygon]:
    """One outer contour per 8-connected component, raster order.

    Vertices sit on pixel-edge midpoints between foreground and background,
    so re-rasterizing a contour reproduces its component with holes filled.
    """
    mask = np.asarray(mask)
    labels, count = label_components(mask)
    polys = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        contour = trace_component(labels[sl] == k)
        polys.append(contour.translated(sl[1].start, sl[0].start))
    return polys


def mask_iou(a, b) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union
