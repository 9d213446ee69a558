"""Cross-attention exports from a LLaVA-style checkpoint.

For every generated answer token the decoder's self-attention row over the
expanded image-token positions is recorded at one chosen layer, giving the
``[M x H x P^2]`` tensor the core toolkit averages into an attribution map.
Image-token columns keep their absolute positions under KV caching, so the
same column index set applies to every generation step.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .manifest import write_manifest

ATTENTION = "llava.attention"

DEFAULT_LAYER = 20


@dataclass(frozen=True)
class LlavaExportResult:
    path: Path
    new_token_ids: tuple[int, ...]
    attention: np.ndarray


def _image_columns(model, input_ids: torch.Tensor) -> torch.Tensor:
    image_token = model.config.image_token_index
    cols = (input_ids[0] == image_token).nonzero(as_tuple=True)[0]
    if cols.numel() == 0:
        raise ValueError("input_ids contain no image tokens")
    side = round(cols.numel() ** 0.5)
    if side * side != cols.numel():
        raise ValueError(f"{cols.numel()} image tokens do not form a square grid")
    return cols


@torch.no_grad()
def export_llava(
    model,
    input_ids: torch.Tensor,
    pixel_values: torch.Tensor,
    out_dir: str | Path,
    layer: int = DEFAULT_LAYER,
    source_model: str = "llava",
    max_new_tokens: int = 8,
    greedy: bool = False,
    temperature: float = 0.8,
    top_p: float = 0.9,
    seed: int | None = None,
    attention_mask: torch.Tensor | None = None,
) -> LlavaExportResult:
    """Generate an answer and write its per-token image attention."""
    n_layers = model.config.text_config.num_hidden_layers
    if not 0 <= layer < n_layers:
        raise ValueError(f"layer {layer} outside 0..{n_layers - 1}")
    cols = _image_columns(model, input_ids)
    if seed is not None:
        torch.manual_seed(seed)
    sampling = {} if greedy else {"temperature": temperature, "top_p": top_p}
    out = model.generate(
        input_ids=input_ids,
        pixel_values=pixel_values,
        attention_mask=attention_mask,
        max_new_tokens=max_new_tokens,
        min_new_tokens=1,
        do_sample=not greedy,
        output_attentions=True,
        return_dict_in_generate=True,
        use_cache=True,
        **sampling,
    )
    if out.attentions is None or out.attentions[0][layer] is None:
        raise RuntimeError(
            "attention weights unavailable; load the model with "
            'attn_implementation="eager"'
        )
    rows = []
    for step in out.attentions:
        # prefill exposes every prompt row; later steps a single row. The
        # last query row is always the token being generated from.
        rows.append(step[layer][0, :, -1, :].index_select(1, cols))
    attention = torch.stack(rows).cpu().numpy().astype(np.float32)
    if attention.min() < 0:
        raise ValueError("attention weights must be nonnegative")
    path = write_manifest(
        {ATTENTION: attention},
        {"source_model": source_model, "layer_indices": str(layer)},
        out_dir,
    )
    new_ids = out.sequences[0, input_ids.shape[1]:]
    return LlavaExportResult(
        path=path,
        new_token_ids=tuple(int(t) for t in new_ids),
        attention=attention,
    )


def export_llava_image(
    model, processor, image, question: str, out_dir: str | Path, **kwargs
) -> LlavaExportResult:
    """Processor-based convenience wrapper around :func:`export_llava`."""
    batch = processor(images=image, text=question, return_tensors="pt")
    return export_llava(
        model,
        batch["input_ids"],
        batch["pixel_values"],
        out_dir,
        attention_mask=batch.get("attention_mask"),
        **kwargs,
    )
