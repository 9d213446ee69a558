"""Attribution maps over image patches, from exported model tensors.

Two extraction routes are supported.  The CLIP route decomposes the
image-text similarity into per-token cosine terms against the text
embedding and combines a cls-side map with a complementary map by
probabilistic OR.  The LLaVA route averages cross-attention weights from
generated answer tokens onto image tokens.

Token index t and grid cell (i, j) relate by t = j + P*(i-1) with 1-based
i, j, i.e. a plain row-major reshape of the image-token axis to P x P.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exchange import ManifestError, PatchGrid, TensorBundle

# Layer choices used when an export does not say otherwise.
DEFAULT_CLIP_LAYER = 22
DEFAULT_LLAVA_LAYER = 20

# Reserved tensor names in exchange manifests.
CLIP_CONTRIBUTIONS = "clip.contributions"
CLIP_FINAL_TOKENS = "clip.final_tokens"
CLIP_TEXT_EMBEDDING = "clip.text_embedding"
LLAVA_ATTENTION = "llava.attention"

NORMALIZE_STAGES = ("pre", "post", "both")


@dataclass(frozen=True)
class ClipExport:
    """Tensors extracted from a CLIP-style model for one (image, text) pair.

    ``contributions[l][t]`` is image token t's additive contribution to the
    cls output of attention layer ``layers[l]``, already projected into the
    joint embedding space.  ``final_tokens[t]`` is the projected last-layer
    representation of token t.  ``text_embedding`` is the unit-norm text
    vector the cosines are taken against.
    """

    patch_side: int
    layers: tuple[int, ...]
    contributions: np.ndarray = field(repr=False)
    final_tokens: np.ndarray = field(repr=False)
    text_embedding: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = self.patch_side
        if p < 1:
            raise ValueError("patch_side must be >= 1")
        if not self.layers:
            raise ValueError("layers must be non-empty")
        if any(b <= a for a, b in zip(self.layers, self.layers[1:])):
            raise ValueError(f"layers must be strictly increasing: {self.layers}")
        contrib = np.asarray(self.contributions, dtype=np.float64)
        finals = np.asarray(self.final_tokens, dtype=np.float64)
        text = np.asarray(self.text_embedding, dtype=np.float64)
        n_tokens = p * p
        if contrib.ndim != 3 or contrib.shape[0] != len(self.layers):
            raise ValueError(
                f"contributions must be [layers x tokens x dim], got {contrib.shape}"
            )
        if contrib.shape[1] != n_tokens:
            raise ValueError(
                f"contributions cover {contrib.shape[1]} tokens, "
                f"patch side {p} requires {n_tokens}"
            )
        if finals.shape != (n_tokens, contrib.shape[2]):
            raise ValueError(
                f"final_tokens shape {finals.shape} does not match "
                f"[{n_tokens} x {contrib.shape[2]}]"
            )
        if text.shape != (contrib.shape[2],):
            raise ValueError(
                f"text_embedding length {text.shape} does not match dim "
                f"{contrib.shape[2]}"
            )
        norm = float(np.linalg.norm(text))
        if abs(norm - 1.0) > 1e-5:
            raise ValueError(f"text_embedding norm {norm} is not 1 within 1e-5")
        object.__setattr__(self, "contributions", contrib)
        object.__setattr__(self, "final_tokens", finals)
        object.__setattr__(self, "text_embedding", text)

    @property
    def embed_dim(self) -> int:
        return self.contributions.shape[2]


@dataclass(frozen=True)
class LlavaExport:
    """Cross-attention weights from answer tokens onto image tokens.

    ``attention[m][h][t]`` is the weight from output token m, head h, to
    image token t at the chosen decoder layer.
    """

    patch_side: int
    layer: int
    attention: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = self.patch_side
        if p < 1:
            raise ValueError("patch_side must be >= 1")
        attn = np.asarray(self.attention, dtype=np.float64)
        if attn.ndim != 3:
            raise ValueError(
                f"attention must be [tokens x heads x image_tokens], got {attn.shape}"
            )
        if attn.shape[2] != p * p:
            raise ValueError(
                f"attention covers {attn.shape[2]} image tokens, "
                f"patch side {p} requires {p * p}"
            )
        if attn.size and attn.min() < 0.0:
            raise ValueError("attention weights must be non-negative")
        object.__setattr__(self, "attention", attn)

    @property
    def output_tokens(self) -> int:
        return self.attention.shape[0]

    @property
    def heads(self) -> int:
        return self.attention.shape[1]


def _cosine_rows(vectors: np.ndarray, unit: np.ndarray) -> np.ndarray:
    """Cosine of each row against a fixed vector; zero rows score 0."""
    norms = np.linalg.norm(vectors, axis=-1)
    dots = vectors @ unit
    unit_norm = float(np.linalg.norm(unit))
    out = np.zeros_like(dots)
    nonzero = norms > 0.0
    if unit_norm > 0.0:
        out[nonzero] = dots[nonzero] / (norms[nonzero] * unit_norm)
    return out


def normalize_map(grid: PatchGrid) -> PatchGrid:
    """Min-max rescale to [0, 1]; a constant grid maps to all zeros."""
    v = grid.values
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return PatchGrid(np.zeros_like(v))
    return PatchGrid((v - lo) / (hi - lo))


def clip_cls_map(export: ClipExport, normalize: bool = True) -> PatchGrid:
    """Per-token share of the cls-route similarity, summed over layers.

    Each token scores the sum over exported layers of the cosine between
    its projected contribution and the text embedding.
    """
    p = export.patch_side
    cosines = np.zeros(p * p, dtype=np.float64)
    for layer_idx in range(len(export.layers)):
        cosines += _cosine_rows(export.contributions[layer_idx], export.text_embedding)
    grid = PatchGrid(cosines.reshape(p, p))
    return normalize_map(grid) if normalize else grid


def clip_comp_map(export: ClipExport, normalize: bool = True) -> PatchGrid:
    """Complementary map: one minus the final-token cosine, per token.

    The token stream offset that skips the cls token is resolved by the
    exporter; ``final_tokens`` holds image tokens only, so cell (i, j) reads
    position j + P*(i-1) directly.
    """
    p = export.patch_side
    cosines = _cosine_rows(export.final_tokens, export.text_embedding)
    grid = PatchGrid((1.0 - cosines).reshape(p, p))
    return normalize_map(grid) if normalize else grid


def combine_maps(cls_map: PatchGrid, comp_map: PatchGrid) -> PatchGrid:
    """Probabilistic OR of two [0, 1] grids: a + b - a*b elementwise.

    The result is pinned into [max(a, b), 1] so float rounding can never
    break the OR-dominance or range guarantees.
    """
    a = cls_map.values
    b = comp_map.values
    if cls_map.side != comp_map.side:
        raise ValueError(
            f"grid sides differ: {cls_map.side} vs {comp_map.side}"
        )
    for name, v in (("cls", a), ("comp", b)):
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError(f"{name} grid values must lie in [0, 1]")
    out = a + b - a * b
    np.maximum(out, a, out=out)
    np.maximum(out, b, out=out)
    np.minimum(out, 1.0, out=out)
    return PatchGrid(out)


def llava_map(export: LlavaExport, normalize: bool = True) -> PatchGrid:
    """Mean attention onto each image token across answer tokens and heads."""
    if export.output_tokens == 0:
        raise ValueError("export has no output tokens to average over")
    if export.heads == 0:
        raise ValueError("export has no attention heads to average over")
    p = export.patch_side
    mean = export.attention.mean(axis=(0, 1))
    grid = PatchGrid(mean.reshape(p, p))
    return normalize_map(grid) if normalize else grid


def clip_map(export: ClipExport, normalize_stage: str = "pre") -> PatchGrid:
    """Full CLIP attribution map: cls and comp routes joined by OR.

    ``normalize_stage`` places the min-max rescale before the OR (``pre``,
    the default), after it (``post``), or at both points (``both``).
    """
    if normalize_stage not in NORMALIZE_STAGES:
        raise ValueError(
            f"normalize_stage must be one of {NORMALIZE_STAGES}, got {normalize_stage!r}"
        )
    pre = normalize_stage in ("pre", "both")
    cls_grid = clip_cls_map(export, normalize=pre)
    comp_grid = clip_comp_map(export, normalize=pre)
    if pre:
        combined = combine_maps(cls_grid, comp_grid)
    else:
        # Raw routes can leave [0, 1]; apply the OR formula as-is and let the
        # trailing rescale land the result in range.
        a, b = cls_grid.values, comp_grid.values
        combined = PatchGrid(a + b - a * b)
    if normalize_stage in ("post", "both"):
        combined = normalize_map(combined)
    return combined


def clip_export_from_bundle(bundle: TensorBundle) -> ClipExport:
    """Build a :class:`ClipExport` from the reserved manifest tensor names."""
    contrib = bundle[CLIP_CONTRIBUTIONS]
    finals = bundle[CLIP_FINAL_TOKENS]
    text = bundle[CLIP_TEXT_EMBEDDING]
    n_tokens = contrib.shape[1] if contrib.ndim == 3 else -1
    side = _square_side(n_tokens, CLIP_CONTRIBUTIONS)
    layers = _parse_layers(bundle.metadata.get("layer_indices", ""))
    if not layers:
        layers = (DEFAULT_CLIP_LAYER,)
    if len(layers) != contrib.shape[0]:
        raise ManifestError(
            f"metadata lists {len(layers)} layers but {CLIP_CONTRIBUTIONS} "
            f"holds {contrib.shape[0]}"
        )
    return ClipExport(
        patch_side=side,
        layers=layers,
        contributions=contrib,
        final_tokens=finals,
        text_embedding=text,
    )


def llava_export_from_bundle(bundle: TensorBundle) -> LlavaExport:
    """Build a :class:`LlavaExport` from the reserved manifest tensor name."""
    attn = bundle[LLAVA_ATTENTION]
    if attn.ndim != 3:
        raise ManifestError(
            f"{LLAVA_ATTENTION} must be [tokens x heads x image_tokens], "
            f"got shape {attn.shape}"
        )
    side = _square_side(attn.shape[2], LLAVA_ATTENTION)
    layers = _parse_layers(bundle.metadata.get("layer_indices", ""))
    layer = layers[0] if layers else DEFAULT_LLAVA_LAYER
    return LlavaExport(patch_side=side, layer=layer, attention=attn)


def _square_side(n_tokens: int, tensor_name: str) -> int:
    side = round(n_tokens**0.5) if n_tokens > 0 else 0
    if side < 1 or side * side != n_tokens:
        raise ManifestError(
            f"{tensor_name}: token count {n_tokens} is not a perfect square"
        )
    return side


def _parse_layers(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",")]
    try:
        return tuple(int(p) for p in parts if p and p != "-")
    except ValueError:
        return ()
