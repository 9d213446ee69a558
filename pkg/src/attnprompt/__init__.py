"""Attention-driven visual prompting and object-hallucination evaluation."""

from .exchange import (
    BinaryMask,
    Heatmap,
    ManifestError,
    PatchGrid,
    RgbImage,
    TensorBundle,
    TensorManifest,
    load_manifest,
    save_manifest,
)

__all__ = [
    "BinaryMask",
    "Heatmap",
    "ManifestError",
    "PatchGrid",
    "RgbImage",
    "TensorBundle",
    "TensorManifest",
    "load_manifest",
    "save_manifest",
]

__version__ = "0.1.0"
