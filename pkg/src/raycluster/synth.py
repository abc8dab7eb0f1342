"""Seeded generator of curved ribbon-shaped text instances."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annotations import AnnotationRecord
from .errors import CannotPlace
from .geometry import Polygon, point_in_polygon, segment_pairs_intersect

CENTERLINE_POINTS = 20
PLACEMENT_ATTEMPTS = 100


@dataclass(frozen=True)
class SynthParams:
    seed: int = 0
    count: int = 1
    amplitude: float = 16.0
    wavelength: float = 160.0
    half_width: float = 12.0
    length: float = 240.0
    height: int = 736
    width: int = 736
    max_rotation: float = 30.0  # degrees, uniform in [-max, max]
    spacing: float = 8.0  # minimum gap between instances, pixels

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.count < 0:
            raise ValueError("count must be >= 0")
        if self.amplitude < 0 or self.half_width <= 0 or self.length <= 0:
            raise ValueError("amplitude >= 0, half_width > 0 and length > 0 required")
        if self.wavelength < 4 * self.amplitude or self.wavelength <= 0:
            raise ValueError("wavelength must be at least 4 * amplitude")
        if self.amplitude > 0:
            # tightest bend of the centerline must stay wider than the ribbon
            radius = self.wavelength**2 / (4 * math.pi**2 * self.amplitude)
            if self.half_width >= radius:
                raise ValueError(f"half_width {self.half_width} >= min bend radius {radius:.3f}")


def ribbon_polygon(amplitude, wavelength, half_width, length, points=CENTERLINE_POINTS) -> np.ndarray:
    """Sine-centerline ribbon centred on the origin, upper edge then lower edge reversed."""
    x = np.linspace(0.0, length, points)
    k = 2 * math.pi / wavelength
    y = amplitude * np.sin(k * x)
    slope = amplitude * k * np.cos(k * x)
    normal = np.stack([-slope, np.ones_like(slope)], axis=1)
    normal /= np.hypot(normal[:, 0], normal[:, 1])[:, None]
    center = np.stack([x - length / 2.0, y], axis=1)
    return np.concatenate([center + half_width * normal, (center - half_width * normal)[::-1]])


def _gap(a: Polygon, b: Polygon) -> float:
    """Smallest distance between two polygon boundaries; 0 if they touch, cross or nest."""
    if point_in_polygon(a.vertices[0], b) or point_in_polygon(b.vertices[0], a):
        return 0.0
    sa, sb = a.vertices, b.vertices
    i, j = np.meshgrid(np.arange(len(sa)), np.arange(len(sb)), indexing="ij")
    i, j = i.ravel(), j.ravel()
    ea, eb = np.roll(sa, -1, axis=0), np.roll(sb, -1, axis=0)
    if segment_pairs_intersect(sa[i], ea[i], sb[j], eb[j]).any():
        return 0.0

    def one_way(pts, s):
        e = np.roll(s, -1, axis=0) - s
        l2 = (e * e).sum(axis=1)
        rel = pts[:, None, :] - s[None, :, :]
        t = np.clip((rel * e[None]).sum(axis=2) / l2[None], 0.0, 1.0)
        q = rel - t[..., None] * e[None]
        return np.sqrt((q * q).sum(axis=2)).min()

    return float(min(one_way(sa, sb), one_way(sb, sa)))


def synth_generate(params: SynthParams = SynthParams()) -> list[AnnotationRecord]:
    """Place ``count`` randomly rotated ribbons on the canvas without overlaps."""
    rng = np.random.default_rng(params.seed)
    base = ribbon_polygon(params.amplitude, params.wavelength, params.half_width, params.length)
    placed: list[Polygon] = []
    margin = params.spacing
    for idx in range(params.count):
        for _ in range(PLACEMENT_ATTEMPTS):
            theta = math.radians(rng.uniform(-params.max_rotation, params.max_rotation))
            c, s = math.cos(theta), math.sin(theta)
            pts = base @ np.array([[c, s], [-s, c]])
            lo = pts.min(axis=0)
            hi = pts.max(axis=0)
            room = np.array([params.width, params.height]) - 2 * margin - (hi - lo)
            if (room < 0).any():
                raise CannotPlace(f"instance {idx} does not fit a {params.width}x{params.height} canvas")
            shift = margin - lo + rng.uniform(0.0, 1.0, 2) * room
            poly = Polygon(pts + shift)
            if all(_gap(poly, other) >= params.spacing for other in placed):
                placed.append(poly)
                break
        else:
            raise CannotPlace(f"instance {idx} found no free spot after {PLACEMENT_ATTEMPTS} attempts")
    return [AnnotationRecord(p, False, "synth") for p in placed]
