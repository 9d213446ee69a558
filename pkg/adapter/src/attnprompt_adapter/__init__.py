"""Live-model exporters feeding the attnprompt tensor-exchange format."""

from .answering import PROMPT_SUFFIX, answer_pope, answer_questions
from .clip_export import (
    export_clip,
    export_clip_image,
    layer_token_terms,
    text_embedding,
    token_contributions,
)
from .llava_export import LlavaExportResult, export_llava, export_llava_image
from .manifest import write_manifest

__all__ = [
    "PROMPT_SUFFIX",
    "LlavaExportResult",
    "answer_pope",
    "answer_questions",
    "export_clip",
    "export_clip_image",
    "export_llava",
    "export_llava_image",
    "layer_token_terms",
    "text_embedding",
    "token_contributions",
    "write_manifest",
]
