"""Free-text answering of presence questions over prompted images.

Consumes the question JSON-lines emitted by the core CLI and writes the
answer JSON-lines it expects back: one ``{"question_id", "raw_text"}``
record per line, generation text recorded verbatim.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable

import torch

PROMPT_SUFFIX = "Answer Yes, No, or Not Sure"


@torch.no_grad()
def answer_pope(
    model,
    processor,
    image,
    prompt: str,
    greedy: bool = False,
    temperature: float = 0.8,
    top_p: float = 0.9,
    seed: int | None = None,
    max_new_tokens: int = 16,
) -> str:
    """Generate a raw answer; the sent prompt always carries the suffix."""
    prompt = prompt.rstrip()
    if not prompt.endswith(PROMPT_SUFFIX):
        prompt = f"{prompt} {PROMPT_SUFFIX}"
    batch = processor(images=image, text=prompt, return_tensors="pt")
    if seed is not None:
        torch.manual_seed(seed)
    sampling = {} if greedy else {"temperature": temperature, "top_p": top_p}
    out = model.generate(
        input_ids=batch["input_ids"],
        pixel_values=batch["pixel_values"],
        attention_mask=batch.get("attention_mask"),
        max_new_tokens=max_new_tokens,
        min_new_tokens=1,
        do_sample=not greedy,
        use_cache=True,
        **sampling,
    )
    new_ids = out[0, batch["input_ids"].shape[1]:]
    text = processor.decode(new_ids, skip_special_tokens=True).strip()
    if not text:
        text = processor.decode(new_ids, skip_special_tokens=False).strip()
    return text


def answer_questions(
    model,
    processor,
    questions_path: str | Path,
    image_for: Callable[[object], object],
    out_path: str | Path,
    **kwargs,
) -> int:
    """Answer every question in a JSON-lines file; returns the count."""
    records = []
    with open(questions_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    with open(out_path, "w", encoding="utf-8") as fh:
        for rec in records:
            text = answer_pope(
                model, processor, image_for(rec["image_id"]), rec["prompt"], **kwargs
            )
            fh.write(
                json.dumps(
                    {"question_id": rec["question_id"], "raw_text": text},
                    sort_keys=True,
                )
                + "\n"
            )
    return len(records)
