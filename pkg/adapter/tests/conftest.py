from __future__ import annotations

import io
import math
import struct
import wave

import pytest
from PIL import Image


def png_bytes(draw, size=(48, 48)) -> bytes:
    """Render an image from a pixel function (x, y) -> (r, g, b)."""
    img = Image.new("RGB", size)
    for x in range(size[0]):
        for y in range(size[1]):
            img.putpixel((x, y), draw(x, y))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def sine_wav_bytes(freq: float, duration: float, rate: int, channels: int = 1) -> bytes:
    n = int(duration * rate)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as handle:
        handle.setnchannels(channels)
        handle.setsampwidth(2)
        handle.setframerate(rate)
        frames = bytearray()
        for i in range(n):
            value = int(20000 * math.sin(2 * math.pi * freq * i / rate))
            frames += struct.pack("<h", value) * channels
        handle.writeframes(bytes(frames))
    return buf.getvalue()


@pytest.fixture(scope="session")
def encoder():
    from scratch_creativity_adapter import shared_encoder

    return shared_encoder()
