"""Synthesizes tiny .sb3 archives (block stacks, PNG costumes, WAV
sounds) so tests control every count and digest by construction."""

from __future__ import annotations

import hashlib
import io
import json
import math
import struct
import wave
import zipfile
from pathlib import Path

from PIL import Image


def solid_png(color: tuple[int, int, int], size: tuple[int, int] = (8, 8)) -> bytes:
    img = Image.new("RGB", size, color)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def split_png(
    left: tuple[int, int, int],
    right: tuple[int, int, int],
    size: tuple[int, int] = (8, 8),
) -> bytes:
    img = Image.new("RGB", size, left)
    for x in range(size[0] // 2, size[0]):
        for y in range(size[1]):
            img.putpixel((x, y), right)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def sine_wav(
    freq: float,
    duration: float,
    rate: int = 11025,
    amplitude: float = 0.5,
    channels: int = 1,
) -> bytes:
    n = int(duration * rate)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(channels)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        frames = bytearray()
        for i in range(n):
            value = int(32000 * amplitude * math.sin(2 * math.pi * freq * i / rate))
            frames += struct.pack("<h", value) * channels
        wav.writeframes(bytes(frames))
    return buf.getvalue()


def silence_wav(duration: float, rate: int = 11025) -> bytes:
    n = int(duration * rate)
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(b"\x00\x00" * n)
    return buf.getvalue()


class _BlockBuilder:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.counter = 0
        self.blocks: dict[str, dict] = {}

    def new_id(self) -> str:
        self.counter += 1
        return f"{self.prefix}{self.counter}"

    def add(self, opcode: str, **extra) -> str:
        bid = self.new_id()
        block = {
            "opcode": opcode,
            "next": None,
            "parent": None,
            "inputs": {},
            "fields": {},
            "shadow": False,
            "topLevel": False,
        }
        block.update(extra)
        self.blocks[bid] = block
        return bid

    def chain(self, spec, top_level: bool) -> str | None:
        """Build one stack: a list whose entries are opcodes, ("nest",
        opcode, subspec) for substacks, ("define", proccode, subspec) for
        custom definitions, or ("call", proccode)."""
        first_id = None
        prev_id = None
        for entry in spec:
            if isinstance(entry, str):
                bid = self.add(entry)
            elif entry[0] == "nest":
                _, opcode, subspec = entry
                bid = self.add(opcode)
                sub_first = self.chain(subspec, top_level=False)
                if sub_first is not None:
                    self.blocks[bid]["inputs"]["SUBSTACK"] = [2, sub_first]
                    self.blocks[sub_first]["parent"] = bid
            elif entry[0] == "define":
                _, proccode, subspec = entry
                bid = self.add("procedures_definition")
                proto = self.add(
                    "procedures_prototype",
                    shadow=True,
                    mutation={
                        "tagName": "mutation",
                        "children": [],
                        "proccode": proccode,
                        "argumentids": "[]",
                        "warp": "false",
                    },
                )
                self.blocks[bid]["inputs"]["custom_block"] = [1, proto]
                self.blocks[proto]["parent"] = bid
                sub_first = self.chain(subspec, top_level=False)
                if sub_first is not None:
                    self.blocks[bid]["next"] = sub_first
                    self.blocks[sub_first]["parent"] = bid
            elif entry[0] == "call":
                _, proccode = entry
                bid = self.add(
                    "procedures_call",
                    mutation={
                        "tagName": "mutation",
                        "children": [],
                        "proccode": proccode,
                        "argumentids": "[]",
                        "warp": "false",
                    },
                )
            else:
                raise ValueError(f"unknown script entry {entry!r}")
            if first_id is None:
                first_id = bid
                if top_level:
                    self.blocks[bid]["topLevel"] = True
            elif prev_id is not None and self.blocks[prev_id]["next"] is None:
                self.blocks[prev_id]["next"] = bid
                self.blocks[bid]["parent"] = prev_id
            prev_id = bid
        return first_id


def _asset_entries(images, sounds):
    costumes = []
    for i, data in enumerate(images):
        digest = hashlib.md5(data).hexdigest()
        costumes.append(
            {
                "assetId": digest,
                "name": f"costume{i + 1}",
                "md5ext": f"{digest}.png",
                "dataFormat": "png",
                "rotationCenterX": 0,
                "rotationCenterY": 0,
            }
        )
    sound_entries = []
    for i, (data, rate) in enumerate(sounds):
        digest = hashlib.md5(data).hexdigest()
        sound_entries.append(
            {
                "assetId": digest,
                "name": f"sound{i + 1}",
                "md5ext": f"{digest}.wav",
                "dataFormat": "wav",
                "rate": rate,
                "sampleCount": 0,
            }
        )
    return costumes, sound_entries


def make_sb3(
    path,
    stage_scripts=(),
    sprites=(),
    stage_images=(),
    stage_sounds=(),
    extra_files=None,
    manifest_override=None,
) -> Path:
    """Write an .sb3 archive.

    ``sprites`` entries: (name, scripts, images, sounds) where images is
    a list of png byte strings and sounds a list of (wav bytes, rate).
    """
    path = Path(path)
    assets: dict[str, bytes] = {}

    def target(name, is_stage, scripts, images, sounds, prefix):
        builder = _BlockBuilder(prefix)
        for script in scripts:
            builder.chain(list(script), top_level=True)
        costumes, sound_entries = _asset_entries(images, sounds)
        for data in images:
            assets[f"{hashlib.md5(data).hexdigest()}.png"] = data
        for data, _ in sounds:
            assets[f"{hashlib.md5(data).hexdigest()}.wav"] = data
        return {
            "isStage": is_stage,
            "name": name,
            "variables": {},
            "lists": {},
            "broadcasts": {},
            "blocks": builder.blocks,
            "comments": {},
            "currentCostume": 0,
            "costumes": costumes,
            "sounds": sound_entries,
            "volume": 100,
        }

    targets = [
        target("Stage", True, stage_scripts, list(stage_images), list(stage_sounds), "s")
    ]
    for i, (name, scripts, images, sounds) in enumerate(sprites):
        targets.append(target(name, False, scripts, list(images), list(sounds), f"t{i}_"))
    manifest = {
        "targets": targets,
        "monitors": [],
        "extensions": [],
        "meta": {"semver": "3.0.0", "vm": "1.2.0", "agent": ""},
    }
    if manifest_override is not None:
        manifest = manifest_override
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as archive:
        archive.writestr("project.json", json.dumps(manifest))
        for name, data in assets.items():
            archive.writestr(name, data)
        for name, data in (extra_files or {}).items():
            archive.writestr(name, data)
    return path
