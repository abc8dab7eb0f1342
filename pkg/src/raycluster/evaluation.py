"""Precision / recall / F-measure by greedy raster-IoU matching, and round-trip fidelity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .decoder import DecodeConfig, decode_gt
from .encoder import DEFAULT_M, DEFAULT_N, encode_instance, generate_gt_maps
from .geometry import DEFAULT_SHRINK_RATIO, as_polygon, mask_iou, rasterize

CANVAS_PAD = 8


@dataclass
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    matched_pairs: list = field(default_factory=list)
    n_dets: int = 0
    n_gts: int = 0
    n_ignored_gts: int = 0
    n_dets_on_ignored: int = 0

    @property
    def n_matched(self) -> int:
        return len(self.matched_pairs)

    def format(self) -> str:
        return f"P {self.precision:.4f} R {self.recall:.4f} F {self.f_measure:.4f}"


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _rates(matched, counted_dets, counted_gts):
    if counted_dets == 0 and counted_gts == 0:
        return 1.0, 1.0
    p = matched / counted_dets if counted_dets else 0.0
    r = matched / counted_gts if counted_gts else 0.0
    return p, r


def iou_matrix(dets: Sequence, gts: Sequence) -> np.ndarray:
    """Raster IoU of every (det, gt) pair on a shared canvas padded by 8 px."""
    dets = [as_polygon(p) for p in dets]
    gts = [as_polygon(p) for p in gts]
    if not dets or not gts:
        return np.zeros((len(dets), len(gts)))
    verts = np.concatenate([p.vertices for p in dets + gts])
    top = int(math.floor(verts[:, 1].min())) - CANVAS_PAD
    left = int(math.floor(verts[:, 0].min())) - CANVAS_PAD
    height = int(math.ceil(verts[:, 1].max())) + CANVAS_PAD - top
    width = int(math.ceil(verts[:, 0].max())) + CANVAS_PAD - left
    window = (top, left, height, width)

    def stack(polys):
        return np.stack([kernels.rasterize(p.vertices, window).ravel() for p in polys]).astype(np.float32)

    d = stack(dets)
    g = stack(gts)
    inter = d @ g.T
    union = d.sum(axis=1)[:, None] + g.sum(axis=1)[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, inter / union, 0.0).astype(np.float64)


def greedy_match(iou: np.ndarray, threshold: float):
    """One-to-one matching by descending IoU among pairs at or above ``threshold``."""
    di, gi = np.nonzero(iou >= threshold)
    order = np.lexsort((gi, di, -iou[di, gi]))
    used_d, used_g, pairs = set(), set(), []
    for k in order:
        d, g = int(di[k]), int(gi[k])
        if d in used_d or g in used_g:
            continue
        used_d.add(d)
        used_g.add(g)
        pairs.append((d, g, float(iou[d, g])))
    return pairs


def match_and_score(
    dets: Sequence,
    gts: Sequence,
    ignored: Optional[Sequence[bool]] = None,
    iou_threshold: float = 0.5,
) -> EvalReport:
    """Score detections against ground truth for one image.

    Detections matched to a don't-care ground truth drop out of both
    precision and recall; don't-care ground truths never count as misses.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError("iou_threshold must be in (0, 1)")
    ignored = [False] * len(gts) if ignored is None else [bool(x) for x in ignored]
    if len(ignored) != len(gts):
        raise ValueError("one ignore flag per ground-truth polygon")
    pairs = greedy_match(iou_matrix(dets, gts), iou_threshold)
    counted = [p for p in pairs if not ignored[p[1]]]
    on_ignored = len(pairs) - len(counted)
    n_ign = sum(ignored)
    return _report(counted, len(dets), len(gts), n_ign, on_ignored)


def _report(pairs, n_dets, n_gts, n_ign, on_ignored):
    p, r = _rates(len(pairs), n_dets - on_ignored, n_gts - n_ign)
    return EvalReport(p, r, f_measure(p, r), pairs, n_dets, n_gts, n_ign, on_ignored)


def combine(reports: Sequence[EvalReport]) -> EvalReport:
    """Dataset-level report from per-image reports (counts are summed)."""
    matched = sum(r.n_matched for r in reports)
    n_dets = sum(r.n_dets for r in reports)
    n_gts = sum(r.n_gts for r in reports)
    n_ign = sum(r.n_ignored_gts for r in reports)
    on_ign = sum(r.n_dets_on_ignored for r in reports)
    p, r = _rates(matched, n_dets - on_ign, n_gts - n_ign)
    pairs = [pair for rep in reports for pair in rep.matched_pairs]
    return EvalReport(p, r, f_measure(p, r), pairs, n_dets, n_gts, n_ign, on_ign)


# --------------------------------------------------------------------------
# representation fidelity


def roundtrip_canvas(contour):
    """Shift ``contour`` by whole pixels to sit 8 px from the origin; return it and the canvas."""
    contour = as_polygon(contour)
    xmin, ymin, _, _ = contour.bounds
    shifted = contour.translated(CANVAS_PAD - math.floor(xmin), CANVAS_PAD - math.floor(ymin))
    _, _, xmax, ymax = shifted.bounds
    return shifted, (int(math.ceil(ymax)) + CANVAS_PAD, int(math.ceil(xmax)) + CANVAS_PAD)


def roundtrip_fidelity(
    contour,
    n: int = DEFAULT_N,
    m: int = DEFAULT_M,
    shrink_ratio: float = DEFAULT_SHRINK_RATIO,
    canvas: Optional[tuple] = None,
    axis: str = "x",
) -> float:
    """IoU between a contour and its own encode-then-decode reconstruction.

    Without an explicit ``(height, width)`` canvas the contour is moved onto
    a tight canvas padded by 8 px. Returns 0 when decoding yields nothing.
    """
    contour = as_polygon(contour)
    if canvas is None:
        contour, canvas = roundtrip_canvas(contour)
    height, width = canvas
    encode_instance(contour, n, m, shrink_ratio, (height, width), axis)
    gt = generate_gt_maps([contour], height, width, m, shrink_ratio)
    result = decode_gt(gt, DecodeConfig(n=n, min_area=1, axis=axis))
    if not result.polygons:
        return 0.0
    source = rasterize(contour, height, width)
    decoded = np.zeros_like(source)
    for poly in result.polygons:
        decoded |= rasterize(poly, height, width)
    return mask_iou(source, decoded)
