"""Convolutional image encoder.

Uses a ResNet-50 tapped at the final pre-classification pooled
activations (2048-dim).  Pretrained ImageNet weights are loaded when the
environment can fetch them; otherwise the network falls back to a
seeded, deterministic initialization so embeddings stay reproducible.
Either way the map from pixels to vectors is fixed for a given adapter
version, which is all the distance-based scoring downstream needs.
"""

from __future__ import annotations

import io

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from torchvision import transforms
from torchvision.models import ResNet50_Weights, resnet50

FALLBACK_SEED = 2021
EMBEDDING_DIM = 2048

_PREPROCESS = transforms.Compose(
    [
        transforms.Resize((224, 224)),
        transforms.ToTensor(),
        transforms.Normalize(
            mean=[0.485, 0.456, 0.406], std=[0.229, 0.224, 0.225]
        ),
    ]
)


class ImageEncoder:
    def __init__(self):
        torch.set_num_threads(1)  # keeps CPU inference bit-reproducible
        try:
            model = resnet50(weights=ResNet50_Weights.IMAGENET1K_V2)
            self.weights = "imagenet"
        except Exception:
            torch.manual_seed(FALLBACK_SEED)
            model = resnet50(weights=None)
            self.weights = f"seeded-{FALLBACK_SEED}"
        model.fc = torch.nn.Identity()
        model.eval()
        self.model = model

    def embed(self, data: bytes) -> np.ndarray:
        """1-D embedding of encoded image bytes; raster formats only."""
        try:
            with Image.open(io.BytesIO(data)) as img:
                rgb = img.convert("RGB")
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            raise ValueError(f"cannot decode image: {exc}") from None
        batch = _PREPROCESS(rgb).unsqueeze(0)
        with torch.no_grad():
            features = self.model(batch)
        vector = features.squeeze(0).numpy().astype(float)
        if vector.shape != (EMBEDDING_DIM,):
            raise RuntimeError(f"unexpected embedding shape {vector.shape}")
        return vector


_SHARED: ImageEncoder | None = None


def shared_encoder() -> ImageEncoder:
    global _SHARED
    if _SHARED is None:
        _SHARED = ImageEncoder()
    return _SHARED


def encoder_status() -> str | None:
    """Weights tag of the shared encoder, or None if never instantiated."""
    return _SHARED.weights if _SHARED is not None else None


def extract_image_vector(data: bytes) -> np.ndarray:
    return shared_encoder().embed(data)
