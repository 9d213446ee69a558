"""Turn a patch grid into a prompted image.

Pipeline: 3x3 mean smoothing, separable Lanczos-3 resize to image size,
minimum cutoff, then per-pixel blending against a black or gray base.
Every step is pure and deterministic so a corpus run is bytewise
reproducible.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .attribution import normalize_map
from .exchange import BinaryMask, Heatmap, PatchGrid, RgbImage

OVERLAY_BASES = {"black": 0.0, "gray": 128.0}

_LANCZOS_A = 3.0


def smooth3(grid: PatchGrid) -> PatchGrid:
    """3x3 uniform-mean convolution with replicate (clamp-to-edge) padding."""
    p = grid.side
    padded = np.pad(grid.values, 1, mode="edge")
    acc = np.zeros_like(grid.values)
    for di in range(3):
        for dj in range(3):
            acc += padded[di : di + p, dj : dj + p]
    return PatchGrid(acc / 9.0)


def _lanczos3(x: np.ndarray) -> np.ndarray:
    # sinc(x) * sinc(x/a) on |x| < a, 0 outside; np.sinc is the normalized sinc.
    out = np.sinc(x) * np.sinc(x / _LANCZOS_A)
    return np.where(np.abs(x) < _LANCZOS_A, out, 0.0)


def _resample_weights(n_src: int, n_dst: int) -> np.ndarray:
    """Dense (n_dst, n_src) weight matrix for one axis.

    Uses the half-pixel-center mapping src = (dst + 0.5) * scale - 0.5.  When
    downsampling the kernel is stretched by the scale factor so it acts as an
    anti-aliasing filter.  Windows are clipped to the valid index range and
    renormalized, so weights always sum to one and constants are preserved.
    """
    scale = n_src / n_dst
    stretch = max(scale, 1.0)
    support = _LANCZOS_A * stretch
    weights = np.zeros((n_dst, n_src), dtype=np.float64)
    for i in range(n_dst):
        center = (i + 0.5) * scale - 0.5
        lo = max(int(np.ceil(center - support)), 0)
        hi = min(int(np.floor(center + support)), n_src - 1)
        taps = np.arange(lo, hi + 1)
        w = _lanczos3((taps - center) / stretch)
        total = w.sum()
        if total == 0.0 or hi < lo:
            # Degenerate window; fall back to the nearest source sample.
            nearest = min(max(int(round(center)), 0), n_src - 1)
            weights[i, nearest] = 1.0
        else:
            weights[i, lo : hi + 1] = w / total
    return weights


def resize_lanczos(grid: PatchGrid, height: int, width: int) -> Heatmap:
    """Separable Lanczos-3 resample of a grid to H x W, clamped to [0, 1]."""
    if height < 1 or width < 1:
        raise ValueError(f"target dimensions must be positive, got {height}x{width}")
    p = grid.side
    w_cols = _resample_weights(p, width)
    w_rows = _resample_weights(p, height)
    resized = w_rows @ grid.values @ w_cols.T
    return Heatmap(np.clip(resized, 0.0, 1.0))


def min_cutoff(h: Heatmap, theta: float) -> Heatmap:
    """Raise every value below ``theta`` up to ``theta``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"cutoff must lie in [0, 1], got {theta}")
    return Heatmap(np.maximum(h.values, theta))


def mask_to_heatmap(mask: BinaryMask) -> Heatmap:
    """Binary mask as a 0.0/1.0 heatmap."""
    return Heatmap(mask.bits.astype(np.float64))


def overlay(img: RgbImage, h: Heatmap, mode: str) -> RgbImage:
    """Blend each pixel toward a base color by the heatmap weight.

    out = round(pix * h + base * (1 - h)) per channel, base 0 for ``black``
    and 128 for ``gray``.  Rounding is half-away-from-zero so outputs are
    identical across platforms.
    """
    if mode not in OVERLAY_BASES:
        raise ValueError(f"mode must be one of {sorted(OVERLAY_BASES)}, got {mode!r}")
    if (h.height, h.width) != (img.height, img.width):
        raise ValueError(
            f"heatmap {h.height}x{h.width} does not match image "
            f"{img.height}x{img.width}"
        )
    base = OVERLAY_BASES[mode]
    weight = h.values[:, :, None]
    blended = img.pixels.astype(np.float64) * weight + base * (1.0 - weight)
    return RgbImage(np.floor(blended + 0.5).astype(np.uint8))


def compose(
    grid: PatchGrid,
    img: RgbImage,
    mode: str = "black",
    cutoff: float = 0.0,
    renormalize: bool = False,
) -> RgbImage:
    """Full prompting pipeline from patch grid to overlaid image."""
    heat = prompt_heatmap(grid, img.height, img.width, renormalize=renormalize)
    heat = min_cutoff(heat, cutoff)
    return overlay(img, heat, mode)


def prompt_heatmap(
    grid: PatchGrid, height: int, width: int, renormalize: bool = False
) -> Heatmap:
    """The smoothed, resized heatmap the pipeline overlays (before cutoff)."""
    smoothed = smooth3(grid)
    if renormalize:
        smoothed = normalize_map(smoothed)
    return resize_lanczos(smoothed, height, width)


def read_png(path: str | Path) -> RgbImage:
    with Image.open(path) as im:
        return RgbImage(np.asarray(im.convert("RGB")))


def write_png(img: RgbImage, path: str | Path) -> None:
    Image.fromarray(img.pixels, mode="RGB").save(path, format="PNG")
