"""Coverage metrics between an attention heatmap and a ground-truth mask.

The heatmap is binarized at its own mean value (ties count as foreground),
then compared to the object mask by set arithmetic.  MSE is taken on the
continuous heatmap against the 0/1 mask and reported scaled by 100, like
the percentage metrics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exchange import BinaryMask, Heatmap


@dataclass(frozen=True)
class AlignmentScore:
    """Percentages rounded to 2 decimals; None marks an empty denominator."""

    precision: float | None
    recall: float | None
    iou: float | None
    mse: float


def binarize_mean(h: Heatmap) -> BinaryMask:
    """Threshold a heatmap at its mean; cells equal to the mean are kept."""
    values = h.values
    return BinaryMask(values >= values.mean())


def align_masks(
    pred: BinaryMask, gt: BinaryMask
) -> tuple[float | None, float | None, float | None]:
    """Unrounded precision/recall/IoU fractions between two masks."""
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise ValueError(
            f"mask dimensions differ: {pred.height}x{pred.width} vs "
            f"{gt.height}x{gt.width}"
        )
    inter = int((pred.bits & gt.bits).sum())
    n_pred = pred.popcount()
    n_gt = gt.popcount()
    union = n_pred + n_gt - inter
    precision = inter / n_pred if n_pred > 0 else None
    recall = inter / n_gt if n_gt > 0 else None
    iou = inter / union if union > 0 else None
    return precision, recall, iou


def align(h: Heatmap, gt: BinaryMask) -> AlignmentScore:
    """Score a heatmap against a ground-truth mask."""
    if (h.height, h.width) != (gt.height, gt.width):
        raise ValueError(
            f"heatmap {h.height}x{h.width} does not match mask "
            f"{gt.height}x{gt.width}"
        )
    pred = binarize_mean(h)
    precision, recall, iou = align_masks(pred, gt)
    mse = float(np.mean((h.values - gt.bits.astype(np.float64)) ** 2))
    return AlignmentScore(
        precision=None if precision is None else round(100.0 * precision, 2),
        recall=None if recall is None else round(100.0 * recall, 2),
        iou=None if iou is None else round(100.0 * iou, 2),
        mse=round(100.0 * mse, 2),
    )


@dataclass(frozen=True)
class AlignmentRecord:
    """One scored (image, label) pair, as emitted to JSON-lines."""

    image_id: int | str
    label: str
    h_vlm: str
    score: AlignmentScore


def record_to_dict(rec: AlignmentRecord) -> dict:
    return {
        "image_id": rec.image_id,
        "label": rec.label,
        "h_vlm": rec.h_vlm,
        "precision": rec.score.precision,
        "recall": rec.score.recall,
        "iou": rec.score.iou,
        "mse": rec.score.mse,
    }


def record_from_dict(d: dict) -> AlignmentRecord:
    return AlignmentRecord(
        image_id=d["image_id"],
        label=d["label"],
        h_vlm=d["h_vlm"],
        score=AlignmentScore(
            precision=d["precision"],
            recall=d["recall"],
            iou=d["iou"],
            mse=d["mse"],
        ),
    )


def write_records(records: list[AlignmentRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_dict(rec), sort_keys=True) + "\n")


def read_records(path: str | Path) -> list[AlignmentRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records
