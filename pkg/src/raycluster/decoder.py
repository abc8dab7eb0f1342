"""Reconstruct text polygons from shrink-probability and ray-distance maps.

Per shrink-mask component: sample centers, read a ray cluster at each
center, turn every cluster into a piecewise contour, bridge adjacent
contours with an interval region (contour connecting), then merge all
regions on the raster and trace the outline.
"""
from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .encoder import AXES, DEFAULT_N, RayCluster, sample_centers_fit
from .errors import (
    CoincidentCenters,
    Degenerate,
    DimensionMismatch,
    EmptyUnion,
    GeometryError,
    InvalidPolygon,
    OutOfBounds,
)
from .geometry import Point2, Polygon, label_components, rasterize, trace_component

MIN_RAY = 0.5
READ_MODES = ("nearest", "mean3")
STAGES = ("components", "centers", "rays", "cc", "union", "trace")
# slack on the projection parameter; cos(pi/2) is not exactly zero
_PROJ_TOL = 1e-9


@dataclass
class PredictionMaps:
    shrink_prob: np.ndarray
    distance_maps: np.ndarray

    def __post_init__(self):
        self.shrink_prob = np.asarray(self.shrink_prob, dtype=np.float64)
        self.distance_maps = np.asarray(self.distance_maps, dtype=np.float64)
        if self.shrink_prob.ndim != 2 or self.distance_maps.ndim != 3:
            raise DimensionMismatch("expected an (H, W) probability map and (M, H, W) distances")
        if self.distance_maps.shape[1:] != self.shrink_prob.shape:
            raise DimensionMismatch(
                f"distance maps {self.distance_maps.shape[1:]} vs shrink map {self.shrink_prob.shape}"
            )

    @property
    def m(self) -> int:
        return self.distance_maps.shape[0]

    @property
    def shape(self):
        return self.shrink_prob.shape


@dataclass(frozen=True)
class DecodeConfig:
    threshold: float = 0.5
    min_area: int = 16
    n: int = DEFAULT_N
    read_mode: str = "nearest"
    axis: str = "x"
    trace: bool = False

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.read_mode not in READ_MODES:
            raise ValueError(f"read_mode must be one of {READ_MODES}")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")


@dataclass
class InstanceTrace:
    component: int
    centers: list
    clusters: list
    piecewise: list
    intervals: list


@dataclass
class DetectionResult:
    polygons: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    debug: list = field(default_factory=list)

    def __len__(self):
        return len(self.polygons)


class StageTimer:
    """Accumulates wall-clock seconds per decode stage."""

    def __init__(self):
        self.seconds = dict.fromkeys(STAGES, 0.0)

    @contextmanager
    def __call__(self, stage):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[stage] += time.perf_counter() - t0


@contextmanager
def _untimed(stage):
    yield


# --------------------------------------------------------------------------
# steps


def _component_slices(shrink_prob, threshold, min_area):
    labels, _ = label_components(np.asarray(shrink_prob) >= threshold)
    found = []
    for k, sl in enumerate(ndimage.find_objects(labels), start=1):
        blob = labels[sl] == k
        if np.count_nonzero(blob) >= min_area:
            found.append((sl, blob))
    return found


def binarize_components(shrink_prob, threshold: float = 0.5, min_area: int = 16) -> list[np.ndarray]:
    """8-connected components of ``shrink_prob >= threshold`` with at least ``min_area`` pixels.

    Components come back as full-size boolean masks in raster order of their
    first pixel.
    """
    shrink_prob = np.asarray(shrink_prob)
    out = []
    for sl, blob in _component_slices(shrink_prob, threshold, min_area):
        full = np.zeros(shrink_prob.shape, dtype=bool)
        full[sl] = blob
        out.append(full)
    return out


def read_cluster(center, distance_maps, mode: str = "nearest") -> RayCluster:
    """Ray cluster from the distance channels at the pixel holding ``center``."""
    distance_maps = np.asarray(distance_maps)
    _, height, width = distance_maps.shape
    r = math.floor(center[1])
    c = math.floor(center[0])
    if not (0 <= r < height and 0 <= c < width):
        raise OutOfBounds(f"center {tuple(center)} lies outside the {height}x{width} maps")
    if mode == "nearest":
        d = distance_maps[:, r, c]
    elif mode == "mean3":
        d = distance_maps[:, max(r - 1, 0):r + 2, max(c - 1, 0):c + 2].mean(axis=(1, 2))
    else:
        raise ValueError(f"read mode must be one of {READ_MODES}")
    return RayCluster(Point2(float(center[0]), float(center[1])), np.maximum(d, MIN_RAY))


def piecewise_contour(cluster: RayCluster) -> Polygon:
    """Ray endpoints joined in direction order."""
    return Polygon(cluster.endpoints())


def select_interval_points(a: RayCluster, b: RayCluster) -> np.ndarray:
    """Endpoints of either cluster whose projection falls between the two centers.

    Falls back to every endpoint of both clusters when fewer than three
    qualify.
    """
    ca = np.asarray(a.center)
    cb = np.asarray(b.center)
    span = cb - ca
    length = math.hypot(*span)
    if length < 1e-6:
        raise CoincidentCenters(f"cluster centers {a.center} and {b.center} coincide")
    pts = np.concatenate([a.endpoints(), b.endpoints()])
    t = ((pts - ca) @ span) / (length * length)
    chosen = pts[(t >= -_PROJ_TOL) & (t <= 1.0 + _PROJ_TOL)]
    if len(chosen) < 3:
        return pts
    return chosen


def cc_connect(points) -> Polygon:
    """Order unordered points by descending angle about their centroid and close them.

    Ties in angle go to the point nearer the centroid.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        raise Degenerate(f"need 3 distinct points, got {len(pts)}")
    center = pts.mean(axis=0)
    rel = pts - center
    ref = pts[1:] - pts[0]
    cross = ref[:, 0, None] * ref[None, :, 1] - ref[:, 1, None] * ref[None, :, 0]
    scale = max(float(np.abs(ref).max()), 1.0)
    if np.abs(cross).max() <= 1e-12 * scale * scale:
        raise Degenerate("interval points are collinear")
    angle = np.arctan2(rel[:, 1], rel[:, 0])
    radius = np.hypot(rel[:, 0], rel[:, 1])
    order = np.lexsort((radius, -angle))
    try:
        return Polygon(pts[order])
    except InvalidPolygon as exc:
        raise Degenerate(str(exc)) from exc


def _window(polys, height, width):
    lo = np.min([p.vertices.min(axis=0) for p in polys], axis=0)
    hi = np.max([p.vertices.max(axis=0) for p in polys], axis=0)
    r0 = max(0, int(math.floor(lo[1])) - 1)
    c0 = max(0, int(math.floor(lo[0])) - 1)
    r1 = min(height, int(math.ceil(hi[1])) + 2)
    c1 = min(width, int(math.ceil(hi[0])) + 2)
    return r0, r1, c0, c1


def merge_regions(piecewise, intervals, height: int, width: int, timer=None) -> Polygon:
    """Union every region on an ``height x width`` raster and trace the largest outline.

    A lone polygon is returned unchanged.
    """
    timer = timer or _untimed
    polys = list(piecewise) + list(intervals)
    if not polys:
        raise EmptyUnion("no regions to merge")
    with timer("union"):
        r0, r1, c0, c1 = _window(polys, height, width)
        if r0 >= r1 or c0 >= c1:
            raise EmptyUnion("all regions lie outside the canvas")
        window = (r0, c0, r1 - r0, c1 - c0)
        union = np.zeros((r1 - r0, c1 - c0), dtype=bool)
        for p in polys:
            union |= rasterize(p, height, width, window)
    if not union.any():
        raise EmptyUnion("regions cover no pixel center")
    if len(polys) == 1:
        return polys[0]
    with timer("trace"):
        labels, count = label_components(union)
        if count == 1:
            blob = labels.astype(bool)
            off = (0, 0)
        else:
            sizes = np.bincount(labels.ravel())[1:]
            k = int(np.argmax(sizes)) + 1
            sl = ndimage.find_objects(labels)[k - 1]
            blob = labels[sl] == k
            off = (sl[1].start, sl[0].start)
        contour = trace_component(blob)
    return contour.translated(c0 + off[0], r0 + off[1])


def decode(maps: PredictionMaps, cfg: Optional[DecodeConfig] = None, timer=None) -> DetectionResult:
    """Full post-processing of one image's prediction maps.

    Components that fail are dropped and recorded in ``diagnostics`` as
    ``(component, stage, message)``; an interval that cannot be built is
    recorded but does not drop its component.
    """
    cfg = cfg or DecodeConfig()
    timer = timer or _untimed
    height, width = maps.shape
    result = DetectionResult()
    with timer("components"):
        comps = _component_slices(maps.shrink_prob, cfg.threshold, cfg.min_area)
    for idx, (sl, blob) in enumerate(comps):
        oy, ox = sl[0].start, sl[1].start
        try:
            with timer("centers"):
                local = sample_centers_fit(blob, cfg.n, cfg.axis)
                centers = [Point2(p.x + ox, p.y + oy) for p in local]
            with timer("rays"):
                clusters = [read_cluster(c, maps.distance_maps, cfg.read_mode) for c in centers]
                pieces = [piecewise_contour(c) for c in clusters]
        except GeometryError as exc:
            result.diagnostics.append((idx, "clusters", str(exc)))
            continue
        intervals = []
        with timer("cc"):
            for a, b in zip(clusters, clusters[1:]):
                try:
                    intervals.append(cc_connect(select_interval_points(a, b)))
                except GeometryError as exc:
                    result.diagnostics.append((idx, "cc", str(exc)))
        try:
            polygon = merge_regions(pieces, intervals, height, width, timer)
        except GeometryError as exc:
            result.diagnostics.append((idx, "merge", str(exc)))
            continue
        result.polygons.append(polygon)
        result.scores.append(float(maps.shrink_prob[sl][blob].mean()))
        if cfg.trace:
            result.debug.append(InstanceTrace(idx, centers, clusters, pieces, intervals))
    return result


def decode_gt(gt, cfg: Optional[DecodeConfig] = None) -> DetectionResult:
    """Decode ground-truth maps as if they were predictions."""
    return decode(PredictionMaps(gt.shrink_mask.astype(np.float64), gt.distance_maps), cfg)

