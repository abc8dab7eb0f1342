"""Shrink-mask dice loss, log-ratio ray loss, and a finite-difference checker."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionMismatch, NonPositiveDistance

DEFAULT_RAY_WEIGHT = 0.25


@dataclass(frozen=True)
class LossConfig:
    ray_weight: float = DEFAULT_RAY_WEIGHT

    def __post_init__(self):
        if not self.ray_weight > 0:
            raise ValueError("ray_weight must be positive")


def dice_loss(pred, gt):
    """Smoothed soft dice ``1 - (2|P.G| + 1) / (|P| + |G| + 1)`` and its gradient in ``pred``."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    inter = float(np.sum(pred * gt))
    denom = float(pred.sum() + gt.sum()) + 1.0
    num = 2.0 * inter + 1.0
    loss = 1.0 - num / denom
    grad = -(2.0 * gt * denom - num) / (denom * denom)
    return loss, grad


def _check_rays(pred, gt):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    if pred.ndim != 2:
        raise DimensionMismatch("ray batches are N x M")
    if not ((pred > 0).all() and (gt > 0).all()):
        raise NonPositiveDistance("ray distances must be strictly positive")
    return pred, gt


def ray_loss(pred, gt):
    """``(1/N) sum |ln pred - ln gt|`` over an ``N x M`` batch, with its gradient in ``pred``.

    The gradient at ``pred == gt`` is taken as 0.
    """
    pred, gt = _check_rays(pred, gt)
    n = pred.shape[0]
    diff = np.log(pred) - np.log(gt)
    loss = float(np.abs(diff).sum()) / n
    grad = np.sign(diff) / (n * pred)
    return loss, grad


def total_loss(shrink_loss: float, ray_loss_value: float, cfg: Optional[LossConfig] = None) -> float:
    cfg = cfg or LossConfig()
    return shrink_loss + cfg.ray_weight * ray_loss_value


class FiniteDiffReport(NamedTuple):
    max_rel_error: float
    checked: int
    excluded: int


def finite_diff_check(loss_id: str, inputs, epsilon: float = 1e-6) -> FiniteDiffReport:
    """Compare the analytic gradient with central differences, coordinate by coordinate.

    ``inputs`` is ``(pred, gt)``. For the ray loss, coordinates within
    ``10 * epsilon`` of the ``pred == gt`` kink are skipped and counted in
    ``excluded``.
    """
    if loss_id not in ("dice", "ray"):
        raise ValueError("loss_id must be 'dice' or 'ray'")
    if not 1e-9 < epsilon < 1e-3:
        raise ValueError("epsilon must be in (1e-9, 1e-3)")
    fn = dice_loss if loss_id == "dice" else ray_loss
    pred, gt = (np.array(a, dtype=np.float64) for a in inputs)
    _, grad = fn(pred, gt)
    worst = 0.0
    checked = excluded = 0
    for idx in np.ndindex(pred.shape):
        if loss_id == "ray" and abs(pred[idx] - gt[idx]) <= 10 * epsilon:
            excluded += 1
            continue
        x0 = pred[idx]
        pred[idx] = x0 + epsilon
        up, _ = fn(pred, gt)
        pred[idx] = x0 - epsilon
        down, _ = fn(pred, gt)
        pred[idx] = x0
        numeric = (up - down) / (2 * epsilon)
        err = abs(grad[idx] - numeric) / max(abs(numeric), 1e-12)
        worst = max(worst, err)
        checked += 1
    return FiniteDiffReport(float(worst), checked, excluded)
