"""COCO instance annotations: parsing, mask decoding, and rasterization.

Segmentations arrive either as polygon vertex lists or as uncompressed
run-length counts (column-major, zero-run first).  Crowd regions using the
compressed string encoding are out of scope and are dropped with a warning.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .exchange import BinaryMask, Heatmap, save_heatmap

# The 80 instance categories, keyed by official category id (ids 1..90 with
# gaps).  Iteration order of COCO_LABELS is ascending id and is the canonical
# label order everywhere in this package.
COCO_CATEGORIES: dict[int, str] = {
    1: "person", 2: "bicycle", 3: "car", 4: "motorcycle", 5: "airplane",
    6: "bus", 7: "train", 8: "truck", 9: "boat", 10: "traffic light",
    11: "fire hydrant", 13: "stop sign", 14: "parking meter", 15: "bench",
    16: "bird", 17: "cat", 18: "dog", 19: "horse", 20: "sheep", 21: "cow",
    22: "elephant", 23: "bear", 24: "zebra", 25: "giraffe", 27: "backpack",
    28: "umbrella", 31: "handbag", 32: "tie", 33: "suitcase", 34: "frisbee",
    35: "skis", 36: "snowboard", 37: "sports ball", 38: "kite",
    39: "baseball bat", 40: "baseball glove", 41: "skateboard",
    42: "surfboard", 43: "tennis racket", 44: "bottle", 46: "wine glass",
    47: "cup", 48: "fork", 49: "knife", 50: "spoon", 51: "bowl",
    52: "banana", 53: "apple", 54: "sandwich", 55: "orange", 56: "broccoli",
    57: "carrot", 58: "hot dog", 59: "pizza", 60: "donut", 61: "cake",
    62: "chair", 63: "couch", 64: "potted plant", 65: "bed",
    67: "dining table", 70: "toilet", 72: "tv", 73: "laptop", 74: "mouse",
    75: "remote", 76: "keyboard", 77: "cell phone", 78: "microwave",
    79: "oven", 80: "toaster", 81: "sink", 82: "refrigerator", 84: "book",
    85: "clock", 86: "vase", 87: "scissors", 88: "teddy bear",
    89: "hair drier", 90: "toothbrush",
}

COCO_LABELS: tuple[str, ...] = tuple(COCO_CATEGORIES.values())

assert len(COCO_LABELS) == 80


class AnnotationError(ValueError):
    """Raised for malformed or inconsistent annotation files."""


@dataclass(frozen=True)
class CocoObject:
    """One annotated object instance."""

    ann_id: int
    image_id: int
    category: str
    segmentation: tuple  # polygons: tuple of coord tuples; RLE: (counts tuple,)
    seg_kind: str  # "polygon" | "rle"
    declared_area: float
    image_size: tuple[int, int]  # (height, width)

    def mask(self) -> BinaryMask:
        """Rasterize this object's segmentation at image size."""
        if self.seg_kind == "rle":
            return decode_rle(list(self.segmentation[0]), self.image_size)
        return rasterize_polygon(
            [list(poly) for poly in self.segmentation], self.image_size
        )


@dataclass(frozen=True)
class ParsedAnnotations:
    objects: tuple[CocoObject, ...]
    present_labels: dict[int, set[str]]
    image_sizes: dict[int, tuple[int, int]]


def parse_annotations(text: str) -> ParsedAnnotations:
    """Parse a COCO instances JSON document.

    Returns every supported annotation as a :class:`CocoObject` plus the
    deduplicated present-label set per image.  Unknown category ids and
    annotations on unlisted images are errors; crowd regions with
    compressed RLE are skipped with a warning.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"malformed annotations JSON: {exc}") from exc

    categories: dict[int, str] = {}
    for cat in doc.get("categories", []):
        categories[int(cat["id"])] = str(cat["name"])
    if not categories:
        categories = dict(COCO_CATEGORIES)

    image_sizes: dict[int, tuple[int, int]] = {}
    for img in doc.get("images", []):
        image_sizes[int(img["id"])] = (int(img["height"]), int(img["width"]))

    objects: list[CocoObject] = []
    present: dict[int, set[str]] = {img_id: set() for img_id in image_sizes}
    for ann in doc.get("annotations", []):
        ann_id = int(ann["id"])
        image_id = int(ann["image_id"])
        cat_id = int(ann["category_id"])
        if cat_id not in categories:
            raise AnnotationError(
                f"annotation {ann_id}: unknown category id {cat_id}"
            )
        category = categories[cat_id]
        if category not in COCO_LABELS:
            raise AnnotationError(
                f"annotation {ann_id}: category {category!r} is not one of "
                f"the 80 instance labels"
            )
        if image_id not in image_sizes:
            raise AnnotationError(
                f"annotation {ann_id}: missing image record for id {image_id}"
            )
        size = image_sizes[image_id]
        seg = ann.get("segmentation")
        if isinstance(seg, dict):
            counts = seg.get("counts")
            if isinstance(counts, str):
                warnings.warn(
                    f"annotation {ann_id}: compressed crowd RLE is unsupported, "
                    f"skipping",
                    stacklevel=2,
                )
                continue
            segmentation: tuple = (tuple(int(c) for c in counts),)
            kind = "rle"
        elif isinstance(seg, list) and seg:
            segmentation = tuple(tuple(float(v) for v in poly) for poly in seg)
            kind = "polygon"
        else:
            raise AnnotationError(f"annotation {ann_id}: unsupported segmentation")
        objects.append(
            CocoObject(
                ann_id=ann_id,
                image_id=image_id,
                category=category,
                segmentation=segmentation,
                seg_kind=kind,
                declared_area=float(ann.get("area", 0.0)),
                image_size=size,
            )
        )
        present[image_id].add(category)

    return ParsedAnnotations(
        objects=tuple(objects), present_labels=present, image_sizes=image_sizes
    )


def decode_rle(counts: list[int], size: tuple[int, int]) -> BinaryMask:
    """Decode column-major run-length counts, zero-run first."""
    h, w = size
    total = sum(counts)
    if total != h * w:
        raise ValueError(
            f"RLE counts sum to {total}, mask of size {h}x{w} requires {h * w}"
        )
    if any(c < 0 for c in counts):
        raise ValueError("RLE counts must be non-negative")
    values = np.repeat(np.arange(len(counts)) % 2 == 1, counts)
    return BinaryMask(values.reshape((h, w), order="F"))


def encode_rle(mask: BinaryMask) -> list[int]:
    """Inverse of :func:`decode_rle`: column-major runs, zero-run first."""
    flat = mask.bits.ravel(order="F")
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    boundaries = np.concatenate(([0], changes, [flat.size]))
    counts = np.diff(boundaries).tolist()
    if flat[0]:
        counts.insert(0, 0)
    return [int(c) for c in counts]


def rasterize_polygon(
    polygons: list[list[float]], size: tuple[int, int]
) -> BinaryMask:
    """Even-odd fill of a polygon union, sampled at pixel centers.

    Each polygon is a flat [x0, y0, x1, y1, ...] vertex list; the mask is the
    union of the individually filled polygons.
    """
    h, w = size
    out = np.zeros((h, w), dtype=bool)
    for poly in polygons:
        if len(poly) < 6 or len(poly) % 2 != 0:
            raise ValueError(
                f"polygon needs at least 3 (x, y) vertices, got {len(poly)} coords"
            )
        xs = np.asarray(poly[0::2], dtype=np.float64)
        ys = np.asarray(poly[1::2], dtype=np.float64)
        out |= _fill_even_odd(xs, ys, h, w)
    return BinaryMask(out)


def _fill_even_odd(xs: np.ndarray, ys: np.ndarray, h: int, w: int) -> np.ndarray:
    """Crossing-number test for every pixel center against one polygon."""
    py = np.arange(h, dtype=np.float64) + 0.5
    px = np.arange(w, dtype=np.float64) + 0.5
    inside = np.zeros((h, w), dtype=bool)
    n = len(xs)
    for k in range(n):
        x1, y1 = xs[k], ys[k]
        x2, y2 = xs[(k + 1) % n], ys[(k + 1) % n]
        if y1 == y2:
            continue
        # Half-open span so a center level with a shared vertex toggles once.
        crosses = (y1 <= py) != (y2 <= py)
        if not crosses.any():
            continue
        x_hit = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside[crosses] ^= px[None, :] < x_hit[crosses, None]
    return inside


def object_mask(obj: CocoObject) -> BinaryMask:
    return obj.mask()


def object_size_fraction(obj: CocoObject) -> float:
    """Rasterized mask area as a fraction of the image area."""
    h, w = obj.image_size
    return obj.mask().popcount() / float(h * w)


def category_mask(
    objects: list[CocoObject],
    image_id: int,
    label: str,
    multi: str = "union",
) -> BinaryMask:
    """Ground-truth mask for one (image, label) pair.

    Multiple instances are unioned by default; ``multi="largest"`` keeps
    only the instance with the largest rasterized mask.
    """
    if multi not in ("union", "largest"):
        raise ValueError(f"multi must be 'union' or 'largest', got {multi!r}")
    matching = [
        o for o in objects if o.image_id == image_id and o.category == label
    ]
    if not matching:
        raise ValueError(f"no objects of category {label!r} on image {image_id}")
    masks = [o.mask() for o in matching]
    if multi == "largest":
        return max(masks, key=lambda m: m.popcount())
    bits = masks[0].bits.copy()
    for m in masks[1:]:
        bits |= m.bits
    return BinaryMask(bits)


def mask_to_png(mask: BinaryMask, path: str | Path) -> None:
    """Write a mask as an 8-bit PNG with values 0/255."""
    Image.fromarray(mask.bits.astype(np.uint8) * 255, mode="L").save(
        path, format="PNG"
    )


def mask_to_manifest(mask: BinaryMask, path: str | Path, source: str = "coco") -> None:
    """Write a mask as a 0.0/1.0 heatmap tensor in the exchange format."""
    heat = Heatmap(mask.bits.astype(np.float64))
    save_heatmap(heat, {"source_model": source, "layer_indices": "-"}, path)
