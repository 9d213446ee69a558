"""Array containers and the on-disk tensor exchange format.

Tensors cross the model/toolkit boundary as a directory holding a
``manifest.json`` plus one raw file per tensor.  Raw files are headerless
little-endian float32, row-major, so the format can be produced bit-exactly
from any language or framework.  Only dtype ``f32le`` exists in v1; callers
holding wider dtypes downcast before saving.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1

# Metadata keys every manifest must carry.
REQUIRED_METADATA = ("source_model", "layer_indices")

# Single-tensor manifests produced by the attribute/compose pipeline use this
# tensor name; the "kind" metadata key says whether it is a patch grid or an
# image-sized heatmap.
MAP_TENSOR_NAME = "map"
KIND_KEY = "kind"
KIND_GRID = "grid"
KIND_HEATMAP = "heatmap"


class ManifestError(ValueError):
    """Raised for malformed manifests or tensors that violate the format."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TensorSpec:
    """One tensor entry in a manifest."""

    name: str
    dtype: str
    shape: tuple[int, ...]
    file: str

    def nbytes(self) -> int:
        return 4 * math.prod(self.shape)


@dataclass(frozen=True)
class TensorManifest:
    version: int
    tensors: tuple[TensorSpec, ...]
    metadata: dict[str, str]

    def __post_init__(self) -> None:
        names = [t.name for t in self.tensors]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ManifestError(f"duplicate tensor names: {sorted(dupes)}")
        for spec in self.tensors:
            if spec.dtype != "f32le":
                raise ManifestError(
                    f"tensor {spec.name!r}: unknown dtype {spec.dtype!r}"
                )
            if not spec.shape or any(d <= 0 for d in spec.shape):
                raise ManifestError(
                    f"tensor {spec.name!r}: shape must be positive, got {spec.shape}"
                )
        for key in REQUIRED_METADATA:
            if key not in self.metadata:
                raise ManifestError(f"metadata missing required key {key!r}")


@dataclass(frozen=True)
class TensorBundle:
    """A manifest together with its memory-resident arrays."""

    manifest: TensorManifest
    arrays: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.arrays[name]
        except KeyError:
            raise ManifestError(f"manifest has no tensor named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self.arrays

    @property
    def metadata(self) -> dict[str, str]:
        return self.manifest.metadata


def load_manifest(path: str | Path) -> TensorBundle:
    """Load a manifest directory and every tensor it declares.

    Byte lengths are checked exactly against ``4 * prod(shape)``; loading
    never truncates or pads.  Arrays come back row-major float32, read-only.
    """
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise ManifestError(f"no {MANIFEST_NAME} in {root}")
    try:
        raw = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"unparseable manifest {manifest_path}: {exc}") from exc

    try:
        specs = tuple(
            TensorSpec(
                name=t["name"],
                dtype=t["dtype"],
                shape=tuple(int(d) for d in t["shape"]),
                file=t["file"],
            )
            for t in raw["tensors"]
        )
        manifest = TensorManifest(
            version=int(raw["version"]),
            tensors=specs,
            metadata=dict(raw["metadata"]),
        )
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"manifest {manifest_path} missing field: {exc}") from exc

    arrays: dict[str, np.ndarray] = {}
    for spec in manifest.tensors:
        tensor_path = root / spec.file
        if not tensor_path.is_file():
            raise ManifestError(f"tensor {spec.name!r}: file {tensor_path} missing")
        data = tensor_path.read_bytes()
        if len(data) != spec.nbytes():
            raise ManifestError(
                f"tensor {spec.name!r}: file holds {len(data)} bytes, "
                f"shape {spec.shape} requires {spec.nbytes()}"
            )
        arr = np.frombuffer(data, dtype="<f4").reshape(spec.shape)
        arrays[spec.name] = _freeze(arr)
    return TensorBundle(manifest=manifest, arrays=arrays)


def save_manifest(
    tensors: dict[str, np.ndarray],
    metadata: dict[str, str],
    path: str | Path,
) -> TensorManifest:
    """Write tensors plus metadata so that :func:`load_manifest` inverts it.

    Values are downcast to little-endian float32.  Non-finite values are
    rejected up front rather than silently written.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    specs = []
    casted: dict[str, np.ndarray] = {}
    for name, value in tensors.items():
        arr = np.ascontiguousarray(value, dtype="<f4")
        if arr.ndim == 0:
            arr = arr.reshape(1)
        if not np.isfinite(arr).all():
            raise ManifestError(f"tensor {name!r} contains non-finite values")
        filename = name.replace("/", "_") + ".f32"
        specs.append(
            TensorSpec(name=name, dtype="f32le", shape=arr.shape, file=filename)
        )
        casted[name] = arr

    manifest = TensorManifest(
        version=MANIFEST_VERSION, tensors=tuple(specs), metadata=dict(metadata)
    )

    for spec in manifest.tensors:
        (root / spec.file).write_bytes(casted[spec.name].tobytes())
    doc = {
        "version": manifest.version,
        "tensors": [
            {
                "name": s.name,
                "dtype": s.dtype,
                "shape": list(s.shape),
                "file": s.file,
            }
            for s in manifest.tensors
        ],
        "metadata": manifest.metadata,
    }
    (root / MANIFEST_NAME).write_text(json.dumps(doc, indent=2, sort_keys=True))
    return manifest


@dataclass(frozen=True)
class PatchGrid:
    """A square per-patch score grid, one value per image patch."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"patch grid must be square 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("patch grid side must be >= 1")
        if not np.isfinite(arr).all():
            raise ValueError("patch grid contains non-finite values")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def side(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Heatmap:
    """A continuous H x W mask with values in [0, 1]."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"heatmap must be 2-D, got shape {arr.shape}")
        if arr.size == 0:
            raise ValueError("heatmap must be non-empty")
        if not np.isfinite(arr).all():
            raise ValueError("heatmap contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("heatmap values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RgbImage:
    """An 8-bit RGB image, shape H x W x 3."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.pixels, dtype=np.uint8, copy=True)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"image must be H x W x 3, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    """A boolean H x W mask."""

    bits: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.bits)
        if arr.dtype != np.bool_:
            raise ValueError(f"mask must be boolean, got dtype {arr.dtype}")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask must be 2-D and non-empty, got shape {arr.shape}")
        object.__setattr__(self, "bits", _freeze(arr.copy()))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def popcount(self) -> int:
        return int(self.bits.sum())


def save_grid(grid: PatchGrid, metadata: dict[str, str], path: str | Path) -> None:
    """Write a patch grid as a single-tensor map manifest."""
    meta = dict(metadata)
    meta[KIND_KEY] = KIND_GRID
    save_manifest({MAP_TENSOR_NAME: grid.values}, meta, path)


def save_heatmap(h: Heatmap, metadata: dict[str, str], path: str | Path) -> None:
    """Write an image-sized heatmap as a single-tensor map manifest."""
    meta = dict(metadata)
    meta[KIND_KEY] = KIND_HEATMAP
    save_manifest({MAP_TENSOR_NAME: h.values}, meta, path)


def load_map(path: str | Path) -> PatchGrid | Heatmap:
    """Load a map manifest back as a grid or heatmap.

    The "kind" metadata key decides; manifests without it fall back to shape:
    square arrays are grids, anything else a heatmap.
    """
    bundle = load_manifest(path)
    values = bundle[MAP_TENSOR_NAME]
    kind = bundle.metadata.get(KIND_KEY)
    if kind is None:
        kind = KIND_GRID if values.shape[0] == values.shape[1] else KIND_HEATMAP
    if kind == KIND_GRID:
        return PatchGrid(values)
    if kind == KIND_HEATMAP:
        return Heatmap(values)
    raise ManifestError(f"unknown map kind {kind!r}")
