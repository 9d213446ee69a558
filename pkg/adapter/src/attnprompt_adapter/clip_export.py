"""Per-token attribution exports from a CLIP checkpoint.

The contribution of image token t to the pooled representation is read off
the residual stream: at each requested encoder layer, the attention block's
output at the cls position is an exact sum over key tokens of
``A[h, cls, t] * (v[h, t] @ Wo[h])`` plus the output bias.  Each token's
summand rides the residual stream unchanged, so its direct effect on the
final embedding is that vector passed through the closing LayerNorm and the
visual projection.  LayerNorm is affine once its normalization statistics
are fixed, so we apply it with the statistics realized by the full cls
vector; the output bias and the LayerNorm shift belong to no token and are
dropped.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .manifest import write_manifest

CONTRIBUTIONS = "clip.contributions"
FINAL_TOKENS = "clip.final_tokens"
TEXT_EMBEDDING = "clip.text_embedding"

DEFAULT_LAYERS = (22,)


def _check_eager(attentions) -> None:
    if attentions is None or any(a is None for a in attentions):
        raise RuntimeError(
            "attention weights unavailable; load the model with "
            'attn_implementation="eager"'
        )


@torch.no_grad()
def layer_token_terms(
    layer, hidden_in: torch.Tensor, attn_probs: torch.Tensor
) -> torch.Tensor:
    """Per-key-token summands of the attention output at the cls position.

    ``hidden_in`` is the residual stream entering the layer, ``attn_probs``
    its softmaxed attention ``[1 x H x N x N]``.  Returns ``[N x D]`` whose
    sum plus the output-projection bias equals the block's cls output.
    """
    attn = layer.self_attn
    normed = layer.layer_norm1(hidden_in)
    bsz, n_tok, dim = normed.shape
    heads, head_dim = attn.num_heads, attn.head_dim
    values = attn.v_proj(normed).view(bsz, n_tok, heads, head_dim).transpose(1, 2)
    cls_row = attn_probs[:, :, 0, :]  # [1, H, N]
    per_token = torch.einsum("bhk,bhkd->bkhd", cls_row, values)
    per_token = per_token.reshape(bsz, n_tok, dim) @ attn.out_proj.weight.T
    return per_token[0]


@torch.no_grad()
def token_contributions(
    model, pixel_values: torch.Tensor, layers: tuple[int, ...]
) -> tuple[np.ndarray, np.ndarray]:
    """Per-layer token contributions and final tokens, both in joint space.

    Returns ``(contributions [L x P^2 x d], final_tokens [P^2 x d])``.
    """
    vision = model.vision_model
    n_layers = len(vision.encoder.layers)
    bad = [i for i in layers if not 0 <= i < n_layers]
    if bad:
        raise ValueError(f"layer indices {bad} outside 0..{n_layers - 1}")

    out = vision(
        pixel_values=pixel_values,
        output_attentions=True,
        output_hidden_states=True,
    )
    _check_eager(out.attentions)
    # hidden_states[i] is the input to encoder layer i; [-1] is the raw
    # encoder output, before the closing LayerNorm.
    final_raw = out.hidden_states[-1]
    post_ln = vision.post_layernorm
    gamma = post_ln.weight
    cls_vec = final_raw[0, 0]
    sigma = torch.sqrt(cls_vec.var(correction=0) + post_ln.eps)
    proj = model.visual_projection.weight  # [d_joint, D]

    per_layer = []
    for idx in layers:
        terms = layer_token_terms(
            vision.encoder.layers[idx], out.hidden_states[idx], out.attentions[idx]
        )
        contrib = terms[1:]  # drop the cls token itself
        centered = contrib - contrib.mean(dim=-1, keepdim=True)
        per_layer.append((centered * gamma / sigma) @ proj.T)

    final_tokens = post_ln(final_raw)[0, 1:] @ proj.T
    contributions = torch.stack(per_layer).cpu().numpy().astype(np.float32)
    return contributions, final_tokens.cpu().numpy().astype(np.float32)


@torch.no_grad()
def text_embedding(
    model, input_ids: torch.Tensor, attention_mask: torch.Tensor | None = None
) -> np.ndarray:
    """Unit-norm joint-space embedding of a text prompt."""
    feats = model.get_text_features(
        input_ids=input_ids, attention_mask=attention_mask
    )
    if not torch.is_tensor(feats):  # newer versions return an output object
        feats = feats.pooler_output
    vec = feats[0]
    norm = vec.norm()
    if norm == 0:
        raise ValueError("text embedding has zero norm")
    return (vec / norm).cpu().numpy().astype(np.float32)


def export_clip(
    model,
    pixel_values: torch.Tensor,
    text_input_ids: torch.Tensor,
    out_dir: str | Path,
    layers: tuple[int, ...] = DEFAULT_LAYERS,
    source_model: str = "clip",
    text_attention_mask: torch.Tensor | None = None,
) -> Path:
    """Write a tensor-exchange manifest for one (image, text) pair."""
    contributions, final_tokens = token_contributions(model, pixel_values, layers)
    n_tokens = contributions.shape[1]
    side = round(n_tokens ** 0.5)
    if side * side != n_tokens:
        raise ValueError(f"{n_tokens} image tokens do not form a square grid")
    text = text_embedding(model, text_input_ids, text_attention_mask)
    return write_manifest(
        {
            CONTRIBUTIONS: contributions,
            FINAL_TOKENS: final_tokens,
            TEXT_EMBEDDING: text,
        },
        {
            "source_model": source_model,
            "layer_indices": ",".join(str(i) for i in layers),
        },
        out_dir,
    )


def export_clip_image(
    model, processor, image, text: str, out_dir: str | Path, **kwargs
) -> Path:
    """Processor-based convenience wrapper around :func:`export_clip`."""
    batch = processor(
        images=image, text=[text], return_tensors="pt", padding=True
    )
    return export_clip(
        model,
        batch["pixel_values"],
        batch["input_ids"],
        out_dir,
        text_attention_mask=batch.get("attention_mask"),
        **kwargs,
    )
