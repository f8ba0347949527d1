"""Evaluation metrics for depth, surface normals, and semantic segmentation.

Depth follows the standard monocular-depth convention: threshold accuracies
delta_i (ratio max(pred/gt, gt/pred) < 1.25**i), mean relative error with the
ground truth in the denominator, RMS, and mean absolute log10 error.  Normal
metrics are angular: the fraction of pixels within 11.5/22.5/30 degrees plus
mean and median error (median = lower middle value for even counts).
Segmentation accumulates a confusion matrix; per-class IOU = TP/(TP+FP+FN),
mean IOU averages classes present in gt or pred, and a micro-averaged
(global pixel) IOU is reported alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EvalError


@dataclass
class DepthMetrics:
    delta1: float
    delta2: float
    delta3: float
    rel: float
    rms: float
    log10: float
    count: int

    def as_dict(self) -> dict:
        return {
            "delta1": self.delta1, "delta2": self.delta2, "delta3": self.delta3,
            "rel": self.rel, "rms": self.rms, "log10": self.log10, "count": self.count,
        }


@dataclass
class NormalMetrics:
    pct_11_5: float
    pct_22_5: float
    pct_30: float
    mean_deg: float
    median_deg: float
    count: int

    def as_dict(self) -> dict:
        return {
            "pct_11_5": self.pct_11_5, "pct_22_5": self.pct_22_5, "pct_30": self.pct_30,
            "mean_deg": self.mean_deg, "median_deg": self.median_deg, "count": self.count,
        }


@dataclass
class SegMetrics:
    iou: list  # per-class IOU, None where the class is absent from gt and pred
    mean_iou: float
    micro_iou: float  # global-pixel (micro-averaged) IOU
    confusion: np.ndarray  # (classes, classes), rows = gt, cols = pred
    count: int

    def as_dict(self) -> dict:
        return {
            "iou": [None if v is None else float(v) for v in self.iou],
            "mean_iou": self.mean_iou,
            "micro_iou": self.micro_iou,
            "count": self.count,
        }


def _masked(pred, gt, mask):
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise EvalError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    if mask is None:
        mask = np.ones(pred.shape[: gt.ndim if gt.ndim <= 2 else 2], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    return pred[mask], gt[mask]


def depth_metrics(pred, gt, mask=None) -> DepthMetrics:
    """Depth metrics over masked pixels (meters in, dimensionless out)."""
    p, g = _masked(pred, gt, mask)
    if p.size == 0:
        raise EvalError("empty mask")
    if np.any(p <= 0) or np.any(g <= 0):
        raise EvalError("masked depth values must be positive")
    ratio = np.maximum(p / g, g / p)
    rel = float(np.mean(np.abs(p - g) / g))
    rms = float(np.sqrt(np.mean((p - g) ** 2)))
    log10 = float(np.mean(np.abs(np.log10(p) - np.log10(g))))
    return DepthMetrics(
        delta1=float(np.mean(ratio < 1.25)),
        delta2=float(np.mean(ratio < 1.25**2)),
        delta3=float(np.mean(ratio < 1.25**3)),
        rel=rel,
        rms=rms,
        log10=log10,
        count=int(p.size),
    )


def normal_metrics(pred, gt, mask=None) -> NormalMetrics:
    """Angular-error metrics between unit-normal images (any (..., 3) shape)."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape or pred.shape[-1] != 3:
        raise EvalError("normal images must share a (..., 3) shape")
    if mask is None:
        mask = np.ones(pred.shape[:-1], dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    p = pred[mask].reshape(-1, 3)
    g = gt[mask].reshape(-1, 3)
    if p.size == 0:
        raise EvalError("empty mask")
    pn = np.linalg.norm(p, axis=1)
    gn = np.linalg.norm(g, axis=1)
    if np.any(pn == 0) or np.any(gn == 0):
        raise EvalError("masked normals must be decodable (non-zero)")
    dots = np.clip(np.sum(p * g, axis=1) / (pn * gn), -1.0, 1.0)
    ang = np.degrees(np.arccos(dots))
    ordered = np.sort(ang)
    median = float(ordered[(len(ordered) - 1) // 2])
    return NormalMetrics(
        pct_11_5=float(np.mean(ang <= 11.5)),
        pct_22_5=float(np.mean(ang <= 22.5)),
        pct_30=float(np.mean(ang <= 30.0)),
        mean_deg=float(np.mean(ang)),
        median_deg=median,
        count=int(len(ang)),
    )


def confusion_matrix(pred, gt, n_classes: int) -> np.ndarray:
    p = np.asarray(pred).reshape(-1).astype(np.int64)
    g = np.asarray(gt).reshape(-1).astype(np.int64)
    if p.shape != g.shape:
        raise EvalError("shape mismatch between pred and gt labels")
    if p.size and (p.min() < 0 or p.max() >= n_classes):
        raise EvalError("pred label out of range")
    if g.size and (g.min() < 0 or g.max() >= n_classes):
        raise EvalError("gt label out of range")
    counts = np.bincount(g * n_classes + p, minlength=n_classes * n_classes)
    return counts.reshape(n_classes, n_classes)


def seg_metrics_from_confusion(confusion: np.ndarray) -> SegMetrics:
    confusion = np.asarray(confusion, dtype=np.int64)
    n = confusion.shape[0]
    tp = np.diag(confusion).astype(np.float64)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    union = tp + fp + fn
    iou = [None if union[c] == 0 else float(tp[c] / union[c]) for c in range(n)]
    present = [v for v in iou if v is not None]
    mean_iou = float(np.mean(present)) if present else 0.0
    micro = float(tp.sum() / union.sum()) if union.sum() else 0.0
    return SegMetrics(
        iou=iou,
        mean_iou=mean_iou,
        micro_iou=micro,
        confusion=confusion,
        count=int(confusion.sum()),
    )


def seg_metrics(pred, gt, n_classes: int) -> SegMetrics:
    """Segmentation metrics for one prediction/gt pair (or stacked frames)."""
    return seg_metrics_from_confusion(confusion_matrix(pred, gt, n_classes))


# ---------------------------------------------------------------------------
# report formatting


def _parse_scenario_id(sid: str):
    parts = sid.split("/")
    if len(parts) != 3:
        return None
    return tuple(parts)


def goal_tag(train_id: str, test_id: str) -> str:
    """SC / L / M / F tag from the train->test scenario pair.

    Multiple differences list multiple tags (M, then L, then F); a fidelity
    change only counts as F when the test side is the higher preset.
    """
    a = _parse_scenario_id(train_id)
    b = _parse_scenario_id(test_id)
    if a is None or b is None:
        return "-"
    if a == b:
        return "SC"
    tags = []
    if a[0] != b[0]:
        tags.append("M")
    if a[1] != b[1]:
        tags.append("L")
    if a[2] != b[2] and (a[2], b[2]) == ("low", "high"):
        tags.append("F")
    return "+".join(tags) if tags else "-"


_DEPTH_COLS = ["delta1", "delta2", "delta3", "rel", "rms", "log10"]
_NORMAL_COLS = ["pct_11_5", "pct_22_5", "pct_30", "mean_deg", "median_deg"]
_SEG_COLS = ["mean_iou", "micro_iou"]


def _columns_for(metrics) -> list:
    if isinstance(metrics, DepthMetrics):
        return _DEPTH_COLS
    if isinstance(metrics, NormalMetrics):
        return _NORMAL_COLS
    if isinstance(metrics, SegMetrics):
        return _SEG_COLS
    raise EvalError(f"unknown metrics type {type(metrics).__name__}")


def report_row(metrics, train_id: str, test_id: str, goal: str | None = None) -> str:
    """One table row: train | test | goal | metric columns (4 decimals)."""
    tag = goal if goal is not None else goal_tag(train_id, test_id)
    vals = metrics.as_dict()
    cols = " ".join(f"{vals[c]:.4f}" for c in _columns_for(metrics))
    return f"{train_id} | {test_id} | {tag} | {cols}"


def report_table(rows: list, kind: str) -> str:
    headers = {
        "depth": _DEPTH_COLS,
        "normal": _NORMAL_COLS,
        "seg": _SEG_COLS,
    }[kind]
    head = "train | test | goal | " + " ".join(headers)
    return "\n".join([head, "-" * len(head)] + rows)


def write_report_sidecar(path: str | Path, entries: list) -> Path:
    """Machine-readable full-precision sidecar (JSON)."""
    path = Path(path)
    payload = []
    for e in entries:
        item = dict(e)
        m = item.pop("metrics")
        item["metrics"] = m.as_dict()
        payload.append(item)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path
