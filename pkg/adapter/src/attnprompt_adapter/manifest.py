"""Writer for the tensor-exchange manifest format.

The format is the integration contract with the core toolkit, so it is
implemented here from its documentation rather than imported: a directory
holding ``manifest.json`` (version 1) plus one headerless raw file per
tensor, little-endian float32, row-major, with required metadata keys
``source_model`` and ``layer_indices``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

DTYPE = "f32le"
VERSION = 1
REQUIRED_METADATA = ("source_model", "layer_indices")


def write_manifest(
    tensors: dict[str, np.ndarray], metadata: dict[str, str], out_dir: str | Path
) -> Path:
    """Validate and write tensors plus manifest.json; returns the directory."""
    for key in REQUIRED_METADATA:
        if key not in metadata:
            raise ValueError(f"metadata must include {key!r}")
    entries = []
    payloads = {}
    for name in sorted(tensors):
        arr = np.asarray(tensors[name], dtype=np.float32)
        if arr.ndim == 0:
            raise ValueError(f"tensor {name!r} must have at least one dimension")
        if not np.isfinite(arr).all():
            raise ValueError(f"tensor {name!r} contains non-finite values")
        filename = f"{name}.f32"
        entries.append(
            {
                "dtype": DTYPE,
                "file": filename,
                "name": name,
                "shape": list(arr.shape),
            }
        )
        payloads[filename] = np.ascontiguousarray(arr).astype("<f4").tobytes()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for filename, payload in payloads.items():
        (out / filename).write_bytes(payload)
    doc = {
        "metadata": {k: str(v) for k, v in metadata.items()},
        "tensors": entries,
        "version": VERSION,
    }
    (out / "manifest.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out
