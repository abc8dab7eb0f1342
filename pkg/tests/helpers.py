"""Shape generators and brute-force oracles shared by the tests."""
import itertools
import math

import numpy as np
from scipy.spatial import ConvexHull
from shapely.geometry import Point as ShPoint
from shapely.geometry import Polygon as ShPolygon

from raycluster.geometry import Polygon


def regular_polygon(k, radius=1.0, center=(0.0, 0.0), phase=0.0):
    t = phase + 2 * math.pi * np.arange(k) / k
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def rect(x0, y0, x1, y1):
    return Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def random_convex(rng, center=(60.0, 60.0), scale=(40.0, 20.0), points=24):
    """Convex hull of an anisotropic Gaussian cloud, rotated at random."""
    pts = rng.normal(size=(points, 2)) * np.asarray(scale) / 2
    a = rng.uniform(0, math.pi)
    rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    pts = pts @ rot.T + np.asarray(center)
    hull = ConvexHull(pts)
    return Polygon(pts[hull.vertices])


def random_star(rng, center=(60.0, 60.0), r_min=10.0, r_max=30.0, points=16):
    """Star-shaped (hence simple) polygon with random radii at sorted angles."""
    t = np.sort(rng.uniform(0, 2 * math.pi, points))
    r = rng.uniform(r_min, r_max, points)
    return Polygon(np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)]))


def brute_raster(poly, height, width):
    """Pixel-center containment by shapely, boundary inclusive."""
    sh = ShPolygon(np.asarray(poly.vertices))
    out = np.zeros((height, width), dtype=bool)
    for r in range(height):
        for c in range(width):
            out[r, c] = sh.covers(ShPoint(c + 0.5, r + 0.5))
    return out


def shapely_polygon(poly):
    return ShPolygon(np.asarray(poly.vertices))


def brute_simple(verts):
    """O(n^2) check that no two non-adjacent edges touch (plain float geometry)."""
    v = np.asarray(verts, dtype=float)
    n = len(v)

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, p):
        return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])

    def inter(p1, p2, q1, q2):
        d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
        d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
        if ((d1 > 0) != (d2 > 0)) and d1 != 0 and d2 != 0 and ((d3 > 0) != (d4 > 0)) and d3 != 0 and d4 != 0:
            return True
        return (
            (d1 == 0 and on_seg(q1, q2, p1))
            or (d2 == 0 and on_seg(q1, q2, p2))
            or (d3 == 0 and on_seg(p1, p2, q1))
            or (d4 == 0 and on_seg(p1, p2, q2))
        )

    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if inter(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return False
    return True


def exhaustive_best(iou, threshold):
    """Largest number of one-to-one pairs at or above ``threshold``, by brute force."""
    nd, ng = iou.shape
    for k in range(min(nd, ng), 0, -1):
        for ds in itertools.combinations(range(nd), k):
            for gs in itertools.permutations(range(ng), k):
                if all(iou[d, g] >= threshold for d, g in zip(ds, gs)):
                    return k
    return 0


# one line per acceptance criterion, printed by the terminal summary hook in conftest
ACCEPTANCE = {}


def record(key, ok, text):
    ACCEPTANCE[key] = f"[{'PASS' if ok else 'FAIL'}] {key} {text}"
    return ok
