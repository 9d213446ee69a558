"""Tiny randomly initialized models so the suite runs offline on CPU.

The vision tower uses a 48px image with 2px patches, giving the same 576
image tokens (24x24 grid) as a full-size checkpoint.
"""

import numpy as np
import pytest
import torch
from transformers import (
    CLIPConfig,
    CLIPModel,
    CLIPTextConfig,
    CLIPVisionConfig,
    LlamaConfig,
    LlavaConfig,
    LlavaForConditionalGeneration,
)

IMAGE_SIZE = 48
PATCH_SIZE = 2
N_IMAGE_TOKENS = (IMAGE_SIZE // PATCH_SIZE) ** 2
IMAGE_TOKEN = 120
JOINT_DIM = 8


def _vision_config():
    return CLIPVisionConfig(
        hidden_size=16,
        intermediate_size=32,
        num_hidden_layers=3,
        num_attention_heads=4,
        image_size=IMAGE_SIZE,
        patch_size=PATCH_SIZE,
        projection_dim=JOINT_DIM,
    )


@pytest.fixture(scope="session")
def tiny_clip():
    text = CLIPTextConfig(
        hidden_size=12,
        intermediate_size=24,
        num_hidden_layers=2,
        num_attention_heads=2,
        max_position_embeddings=32,
        vocab_size=100,
        projection_dim=JOINT_DIM,
        bos_token_id=1,
        eos_token_id=2,
    )
    cfg = CLIPConfig(
        vision_config=_vision_config().to_dict(),
        text_config=text.to_dict(),
        projection_dim=JOINT_DIM,
    )
    torch.manual_seed(0)
    return CLIPModel._from_config(cfg, attn_implementation="eager").eval()


@pytest.fixture(scope="session")
def tiny_llava():
    text = LlamaConfig(
        hidden_size=32,
        intermediate_size=64,
        num_hidden_layers=2,
        num_attention_heads=4,
        num_key_value_heads=4,
        vocab_size=128,
        max_position_embeddings=2048,
        bos_token_id=1,
        eos_token_id=2,
        pad_token_id=0,
    )
    cfg = LlavaConfig(
        vision_config=_vision_config().to_dict(),
        text_config=text.to_dict(),
        image_token_index=IMAGE_TOKEN,
        vision_feature_select_strategy="default",
        vision_feature_layer=-1,
    )
    torch.manual_seed(1)
    return LlavaForConditionalGeneration._from_config(
        cfg, attn_implementation="eager"
    ).eval()


class TinyLlavaProcessor:
    """Whitespace-free stand-in for a multimodal processor."""

    special_ids = frozenset({0, 1, 2, IMAGE_TOKEN})

    def __call__(self, images=None, text=None, return_tensors="pt"):
        ids = [1] + [IMAGE_TOKEN] * N_IMAGE_TOKENS
        ids += [20 + (ord(c) % 60) for c in text[:12]]
        input_ids = torch.tensor([ids])
        arr = np.asarray(images, dtype=np.float32) / 255.0
        pixel_values = torch.from_numpy(arr).permute(2, 0, 1).unsqueeze(0)
        return {
            "input_ids": input_ids,
            "pixel_values": pixel_values,
            "attention_mask": torch.ones_like(input_ids),
        }

    def decode(self, ids, skip_special_tokens=True):
        words = []
        for t in ids.tolist():
            if skip_special_tokens and t in self.special_ids:
                continue
            words.append(f"w{t}")
        return " ".join(words)


@pytest.fixture
def tiny_processor():
    return TinyLlavaProcessor()


@pytest.fixture
def sample_image():
    rng = np.random.default_rng(3)
    return rng.integers(0, 256, size=(IMAGE_SIZE, IMAGE_SIZE, 3), dtype=np.uint8)


@pytest.fixture
def pixel_values():
    torch.manual_seed(2)
    return torch.randn(1, 3, IMAGE_SIZE, IMAGE_SIZE)
