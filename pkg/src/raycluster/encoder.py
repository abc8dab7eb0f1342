"""Ray-cluster encoding of text contours and ground-truth map generation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    DegenerateShrink,
    EmptyMask,
    GeometryError,
    InvalidPolygon,
    OriginOutside,
    TooNarrow,
)
from .geometry import (
    DEFAULT_SHRINK_RATIO,
    Point2,
    Polygon,
    as_polygon,
    rasterize,
    shrink_polygon,
)

log = logging.getLogger(__name__)

DEFAULT_N = 5
DEFAULT_M = 8
AXES = ("x", "principal")


def ray_angles(m: int) -> np.ndarray:
    """Directions ``i * 2pi / m`` in image coordinates (y down)."""
    return np.arange(m) * (2.0 * math.pi / m)


@dataclass(frozen=True)
class RayCluster:
    center: Point2
    distances: np.ndarray

    def __post_init__(self):
        d = np.array(self.distances, dtype=np.float64).ravel()
        if d.size < 3:
            raise ValueError("a ray cluster needs at least 3 rays")
        if not (np.isfinite(d).all() and (d > 0).all()):
            raise ValueError("ray distances must be finite and positive")
        d.flags.writeable = False
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "center", Point2(float(self.center[0]), float(self.center[1])))

    @property
    def m(self) -> int:
        return self.distances.size

    def endpoints(self) -> np.ndarray:
        theta = ray_angles(self.m)
        cx, cy = self.center
        return np.stack(
            [cx + self.distances * np.cos(theta), cy + self.distances * np.sin(theta)], axis=1
        )


@dataclass(frozen=True)
class InstanceEncoding:
    clusters: tuple
    source_polygon_id: Optional[object] = None

    def __post_init__(self):
        clusters = tuple(self.clusters)
        if not clusters:
            raise ValueError("an instance needs at least one cluster")
        if len({c.m for c in clusters}) != 1:
            raise ValueError("all clusters of an instance must share M")
        object.__setattr__(self, "clusters", clusters)

    @property
    def n(self) -> int:
        return len(self.clusters)

    @property
    def m(self) -> int:
        return self.clusters[0].m


@dataclass
class GtMaps:
    """Binary shrink mask plus ``M`` dense ray-distance channels ``(M, H, W)``."""

    shrink_mask: np.ndarray
    distance_maps: np.ndarray
    owner: np.ndarray
    skipped: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.distance_maps.shape[0]


# --------------------------------------------------------------------------
# center sampling


def _nearest_column(target, columns):
    """Closest available column to ``target``; the lower index wins ties."""
    pos = int(np.searchsorted(columns, target))
    best = None
    for idx in (pos - 1, pos):
        if 0 <= idx < len(columns):
            gap = abs(columns[idx] - target)
            if best is None or gap < best[0]:
                best = (gap, idx)
    return best[1]


def _column_samples(cols, rows, n):
    """Indices of the sampled (column, median row) points among pixel coordinates."""
    present = np.unique(cols)
    if present.size < n:
        raise TooNarrow(f"{present.size} foreground columns for {n} centers", present.size)
    xmin, xmax = present[0], present[-1]
    step = (xmax - xmin + 1) / n
    picked = []
    used = set()
    for k in range(n):
        target = xmin + (k + 0.5) * step
        col = present[_nearest_column(target, present)]
        if col in used:
            raise TooNarrow("sampled columns collide", present.size)
        used.add(col)
        in_col = np.flatnonzero(cols == col)
        order = in_col[np.argsort(rows[in_col], kind="stable")]
        picked.append(order[(order.size - 1) // 2])
    return picked


def principal_angle(mask) -> float:
    """Angle of the dominant axis of the foreground pixel cloud."""
    rows, cols = np.nonzero(mask)
    pts = np.stack([cols + 0.5, rows + 0.5], axis=1)
    if len(pts) < 2:
        return 0.0
    cov = np.cov(pts, rowvar=False)
    w, vecs = np.linalg.eigh(cov)
    major = vecs[:, int(np.argmax(w))]
    if major[0] < 0 or (major[0] == 0 and major[1] < 0):
        major = -major
    return math.atan2(major[1], major[0])


def sample_centers(mask, n: int = DEFAULT_N, axis: str = "x") -> list[Point2]:
    """Pick ``n`` centers from a binary mask.

    Abscissas are spread evenly across the foreground columns at
    ``xmin + (k + 0.5) * width / n`` and snapped to the nearest occupied
    column; the ordinate is the lower median foreground row of that column.
    With ``axis="principal"`` the same rule runs in a frame rotated so the
    dominant axis of the blob is horizontal, using unit-wide bins along it.
    Every center is the center of a foreground pixel.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise EmptyMask("cannot sample centers from an empty mask")
    if axis == "x":
        picked = _column_samples(cols, rows, n)
    else:
        phi = principal_angle(mask)
        px = cols + 0.5
        py = rows + 0.5
        c, s = math.cos(phi), math.sin(phi)
        u = c * px + s * py
        w = -s * px + c * py
        bins = np.floor(u - u.min()).astype(np.int64)
        picked = _column_samples(bins, w, n)
    return [Point2(float(cols[i]) + 0.5, float(rows[i]) + 0.5) for i in picked]


def sample_centers_fit(mask, n: int = DEFAULT_N, axis: str = "x") -> list[Point2]:
    """:func:`sample_centers`, reducing ``n`` when the mask is too narrow."""
    while True:
        try:
            return sample_centers(mask, n, axis)
        except TooNarrow as exc:
            if n <= 1:
                raise
            n = max(1, min(n - 1, exc.columns))


# --------------------------------------------------------------------------
# clusters


def cast_cluster(center, contour, m: int = DEFAULT_M) -> RayCluster:
    """Cast ``m`` evenly spaced rays from ``center`` to their first hit on ``contour``."""
    contour = as_polygon(contour)
    if m < 3:
        raise ValueError("m must be >= 3")
    v = contour.vertices
    cx, cy = float(center[0]), float(center[1])
    if not kernels.point_in_polygon(cx, cy, v):
        raise OriginOutside(f"cluster center ({cx}, {cy}) is outside the contour")
    theta = ray_angles(m)
    d = kernels.cast_rays(np.array([[cx, cy]]), np.cos(theta), np.sin(theta), v)[0]
    if not np.isfinite(d).all():
        raise GeometryError("ray from an interior center missed the contour")
    return RayCluster(Point2(cx, cy), d)


def encode_instance(
    contour,
    n: int = DEFAULT_N,
    m: int = DEFAULT_M,
    shrink_ratio: float = DEFAULT_SHRINK_RATIO,
    mask_dims: Optional[tuple] = None,
    axis: str = "x",
    source_polygon_id=None,
) -> InstanceEncoding:
    """Shrink, rasterize, sample ``n`` centers, cast rays at the original contour."""
    contour = as_polygon(contour)
    if mask_dims is None:
        _, _, xmax, ymax = contour.bounds
        mask_dims = (int(math.ceil(ymax)) + 1, int(math.ceil(xmax)) + 1)
    height, width = mask_dims
    shrunk = shrink_polygon(contour, shrink_ratio)
    mask = rasterize(shrunk, height, width)
    centers = sample_centers_fit(mask, n, axis)
    clusters = [cast_cluster(c, contour, m) for c in centers]
    return InstanceEncoding(tuple(clusters), source_polygon_id)


# --------------------------------------------------------------------------
# ground truth


def generate_gt_maps(
    contours: Sequence,
    height: int,
    width: int,
    m: int = DEFAULT_M,
    shrink_ratio: float = DEFAULT_SHRINK_RATIO,
) -> GtMaps:
    """Shrink-mask target and dense ray-distance targets for an image.

    Each shrink-mask pixel stores, per direction, the first-hit distance from
    its center to the contour that owns it. Overlapping shrink regions go to
    the later instance. Instances that fail to shrink or rasterize to
    nothing are skipped and listed in ``skipped``.
    """
    owner = np.full((height, width), -1, dtype=np.int64)
    polys = []
    skipped = []
    for idx, contour in enumerate(contours):
        try:
            contour = as_polygon(contour)
            shrunk = shrink_polygon(contour, shrink_ratio)
        except (DegenerateShrink, InvalidPolygon) as exc:
            log.warning("instance %d skipped: %s", idx, exc)
            skipped.append((idx, str(exc)))
            polys.append(None)
            continue
        region = rasterize(shrunk, height, width)
        if not region.any():
            skipped.append((idx, "shrink region covers no pixel center"))
            polys.append(None)
            continue
        owner[region] = idx
        polys.append(contour)

    theta = ray_angles(m)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    dist = np.zeros((m, height, width), dtype=np.float64)
    for idx, contour in enumerate(polys):
        if contour is None:
            continue
        rows, cols = np.nonzero(owner == idx)
        if rows.size == 0:
            skipped.append((idx, "shrink region fully overwritten by later instances"))
            continue
        origins = np.stack([cols + 0.5, rows + 0.5], axis=1)
        d = kernels.cast_rays(origins, cos_t, sin_t, contour.vertices)
        dist[:, rows, cols] = d.T
    return GtMaps(owner >= 0, dist, owner, skipped)
