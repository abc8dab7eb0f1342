"""Hot inner loops: rasterization, ray casting and boundary tracing.

Each kernel exists twice: a loop version compiled with numba (``*_nb``) and
a vectorized numpy version (``*_np``). Both produce the same values; the
active pair is chosen from ``RAYCLUSTER_BACKEND`` at import time and can be
switched with :func:`use_backend`.

Vertex arrays are ``(n, 2)`` float64, C-contiguous, ``x`` then ``y``.
"""
import math

import numpy as np

from ._accel import BACKENDS, HAS_NUMBA, default_backend, njit

# distance tolerance for "on the boundary", pixels
TOL = 1e-9


# --------------------------------------------------------------------------
# scalar helpers


def _on_segment_py(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        t = 0.0
    else:
        t = ((px - ax) * dx + (py - ay) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return qx * qx + qy * qy <= TOL * TOL


def _point_in_polygon_py(px, py, verts):
    n = verts.shape[0]
    inside = False
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        xi = verts[i, 0]
        yi = verts[i, 1]
        xj = verts[j, 0]
        yj = verts[j, 1]
        if _on_segment(px, py, xi, yi, xj, yj):
            return True
        if (yi > py) != (yj > py):
            xc = (xj - xi) * (py - yi) / (yj - yi) + xi
            if px < xc:
                inside = not inside
    return inside


# the compiled helper must be referenced by name from other jitted code
_on_segment = njit(_on_segment_py)
point_in_polygon_nb = njit(_point_in_polygon_py)


def point_in_polygon_np(px, py, verts):
    return bool(points_in_polygon_np(np.array([px]), np.array([py]), verts)[0])


def points_in_polygon_np(px, py, verts):
    """Even-odd test for arrays of points; boundary points count as inside."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    inside = np.zeros(px.shape, dtype=bool)
    on_edge = np.zeros(px.shape, dtype=bool)
    n = verts.shape[0]
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        xi, yi = verts[i, 0], verts[i, 1]
        xj, yj = verts[j, 0], verts[j, 1]
        on_edge |= _on_segment_np(px, py, xi, yi, xj, yj)
        if yi == yj:
            continue
        crosses = (yi > py) != (yj > py)
        xc = (xj - xi) * (py - yi) / (yj - yi) + xi
        inside ^= crosses & (px < xc)
    return inside | on_edge


def _on_segment_np(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        t = np.zeros_like(px)
    else:
        t = np.clip(((px - ax) * dx + (py - ay) * dy) / l2, 0.0, 1.0)
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return qx * qx + qy * qy <= TOL * TOL


# --------------------------------------------------------------------------
# rasterization


def _raster_window(verts, window):
    """Row/column range of ``window`` that can hold pixel centers of the polygon."""
    top, left, height, width = window
    r0 = max(top, int(math.floor(verts[:, 1].min() - 1.0)))
    r1 = min(top + height - 1, int(math.ceil(verts[:, 1].max() + 1.0)))
    c0 = max(left, int(math.floor(verts[:, 0].min() - 1.0)))
    c1 = min(left + width - 1, int(math.ceil(verts[:, 0].max() + 1.0)))
    return r0, r1, c0, c1


@njit
def _rasterize_nb(verts, top, left, height, width, r0, r1, c0, c1):
    out = np.zeros((height, width), np.uint8)
    n = verts.shape[0]
    xs = np.empty(n)
    lo_clip = c0 - 1.0
    hi_clip = c1 + 2.0
    for r in range(r0, r1 + 1):
        yc = r + 0.5
        k = 0
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            xi = verts[i, 0]
            yi = verts[i, 1]
            xj = verts[j, 0]
            yj = verts[j, 1]
            if (yi > yc) != (yj > yc):
                xs[k] = (xj - xi) * (yc - yi) / (yj - yi) + xi
                k += 1
        row = np.sort(xs[:k])
        # pixel inside iff xs[2p] <= center < xs[2p+1]
        for p in range(0, k - 1, 2):
            xa = max(row[p], lo_clip)
            xb = min(row[p + 1], hi_clip)
            if xa >= xb:
                continue
            cs = int(math.ceil(xa - 0.5))
            while cs + 0.5 < xa:
                cs += 1
            while cs - 0.5 >= xa:
                cs -= 1
            ce = int(math.ceil(xb - 0.5)) - 1
            while ce + 0.5 >= xb:
                ce -= 1
            while ce + 1.5 < xb:
                ce += 1
            for c in range(max(cs, c0), min(ce, c1) + 1):
                out[r - top, c - left] = 1
        # centers lying on the boundary itself
        for i in range(n):
            j = i + 1 if i + 1 < n else 0
            xi = verts[i, 0]
            yi = verts[i, 1]
            xj = verts[j, 0]
            yj = verts[j, 1]
            if yc < min(yi, yj) - TOL or yc > max(yi, yj) + TOL:
                continue
            if yi == yj:
                xlo = min(xi, xj)
                xhi = max(xi, xj)
            else:
                ta = min(max((yc - TOL - yi) / (yj - yi), 0.0), 1.0)
                tb = min(max((yc + TOL - yi) / (yj - yi), 0.0), 1.0)
                xa = xi + ta * (xj - xi)
                xb = xi + tb * (xj - xi)
                xlo = min(xa, xb)
                xhi = max(xa, xb)
            lo = max(c0, int(math.floor(xlo - 0.5)) - 1)
            hi = min(c1, int(math.ceil(xhi - 0.5)) + 1)
            for c in range(lo, hi + 1):
                if out[r - top, c - left] == 0 and _on_segment(c + 0.5, yc, xi, yi, xj, yj):
                    out[r - top, c - left] = 1
    return out


def rasterize_nb(verts, window):
    """Pixel-center mask of the polygon over ``window = (top, left, height, width)``."""
    top, left, height, width = window
    if verts.shape[0] == 0:
        return np.zeros((height, width), dtype=bool)
    r0, r1, c0, c1 = _raster_window(verts, window)
    if r0 > r1 or c0 > c1:
        return np.zeros((height, width), dtype=bool)
    return _rasterize_nb(verts, top, left, height, width, r0, r1, c0, c1).view(bool)


def rasterize_np(verts, window):
    top, left, height, width = window
    out = np.zeros((height, width), dtype=bool)
    if verts.shape[0] == 0:
        return out
    r0, r1, c0, c1 = _raster_window(verts, window)
    if r0 > r1 or c0 > c1:
        return out
    ys = np.arange(r0, r1 + 1) + 0.5
    xs = np.arange(c0, c1 + 1) + 0.5
    Y, X = np.meshgrid(ys, xs, indexing="ij")
    out[r0 - top:r1 - top + 1, c0 - left:c1 - left + 1] = points_in_polygon_np(X, Y, verts)
    return out


# --------------------------------------------------------------------------
# ray casting


@njit
def cast_rays_nb(origins, cos_t, sin_t, verts):
    """First positive boundary hit for every (origin, direction) pair.

    Returns a ``(P, M)`` array; ``inf`` where a ray misses every edge.
    """
    n_orig = origins.shape[0]
    m = cos_t.shape[0]
    n = verts.shape[0]
    ex = np.empty(n)
    ey = np.empty(n)
    slack = np.empty(n)
    tiny = np.empty(n)
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        ex[i] = verts[j, 0] - verts[i, 0]
        ey[i] = verts[j, 1] - verts[i, 1]
        elen = math.sqrt(ex[i] * ex[i] + ey[i] * ey[i])
        slack[i] = TOL / elen
        tiny[i] = 1e-12 * elen
    out = np.empty((n_orig, m))
    for p in range(n_orig):
        ox = origins[p, 0]
        oy = origins[p, 1]
        for a in range(m):
            ux = cos_t[a]
            uy = sin_t[a]
            best = np.inf
            for i in range(n):
                denom = ux * ey[i] - uy * ex[i]
                if abs(denom) <= tiny[i]:
                    continue
                wx = verts[i, 0] - ox
                wy = verts[i, 1] - oy
                t = (wx * ey[i] - wy * ex[i]) / denom
                if t <= TOL or t >= best:
                    continue
                u = (wx * uy - wy * ux) / denom
                if u >= -slack[i] and u <= 1.0 + slack[i]:
                    best = t
            out[p, a] = best
    return out


def cast_rays_np(origins, cos_t, sin_t, verts):
    ox = origins[:, 0][:, None]
    oy = origins[:, 1][:, None]
    ux = cos_t[None, :]
    uy = sin_t[None, :]
    best = np.full((origins.shape[0], cos_t.shape[0]), np.inf)
    n = verts.shape[0]
    for i in range(n):
        j = i + 1 if i + 1 < n else 0
        ax, ay = verts[i, 0], verts[i, 1]
        ex = verts[j, 0] - ax
        ey = verts[j, 1] - ay
        elen = math.sqrt(ex * ex + ey * ey)
        denom = ux * ey - uy * ex
        ok = np.abs(denom) > 1e-12 * elen
        safe = np.where(ok, denom, 1.0)
        wx = ax - ox
        wy = ay - oy
        t = (wx * ey - wy * ex) / safe
        s = (wx * uy - wy * ux) / safe
        slack = TOL / elen
        hit = ok & (t > TOL) & (s >= -slack) & (s <= 1.0 + slack) & (t < best)
        best = np.where(hit, t, best)
    return best


# --------------------------------------------------------------------------
# boundary tracing


def _trace_boundary_py(mask, r0, c0):
    """Follow the outer crack boundary of the 8-connected blob at (r0, c0).

    ``mask`` is a uint8 image with a zero border and ``(r0, c0)`` must be the
    first foreground pixel of the blob in raster order. The walk keeps the
    foreground on its right-hand side (image coordinates, y down) and emits
    the midpoint of every pixel edge it crosses, so the returned loop passes
    strictly between foreground and background pixel centers.
    """
    out = np.empty((4 * mask.shape[0] * mask.shape[1] + 4, 2))
    x = c0
    y = r0
    dx = 1
    dy = 0
    k = 0
    while True:
        out[k, 0] = x + 0.5 * dx
        out[k, 1] = y + 0.5 * dy
        k += 1
        x += dx
        y += dy
        sx = -dy
        sy = dx
        # pixel ahead, away from the foreground side
        ax = dx - sx
        ay = dy - sy
        col = x if ax > 0 else x - 1
        row = y if ay > 0 else y - 1
        if mask[row, col] != 0:
            dx = -sx
            dy = -sy
        else:
            ax = dx + sx
            ay = dy + sy
            col = x if ax > 0 else x - 1
            row = y if ay > 0 else y - 1
            if mask[row, col] == 0:
                dx = sx
                dy = sy
        if x == c0 and y == r0 and dx == 1 and dy == 0:
            break
    return out[:k]


trace_boundary_nb = njit(_trace_boundary_py)
trace_boundary_np = _trace_boundary_py


# --------------------------------------------------------------------------
# dispatch

_IMPLS = {
    "numba": {
        "rasterize": rasterize_nb,
        "cast_rays": cast_rays_nb,
        "trace_boundary": trace_boundary_nb,
        "point_in_polygon": point_in_polygon_nb,
    },
    "numpy": {
        "rasterize": rasterize_np,
        "cast_rays": cast_rays_np,
        "trace_boundary": trace_boundary_np,
        "point_in_polygon": point_in_polygon_np,
    },
}

_active = {}


def use_backend(name):
    """Switch the active kernel set; returns the previous backend name."""
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    previous = _active.get("name")
    _active.clear()
    _active.update(_IMPLS[name])
    _active["name"] = name
    return previous


def get_backend():
    return _active["name"]


use_backend(default_backend())


def rasterize(verts, window):
    return _active["rasterize"](verts, window)


def cast_rays(origins, cos_t, sin_t, verts):
    return _active["cast_rays"](origins, cos_t, sin_t, verts)


def trace_boundary(mask, r0, c0):
    return _active["trace_boundary"](mask, r0, c0)


def point_in_polygon(px, py, verts):
    return bool(_active["point_in_polygon"](px, py, verts))
