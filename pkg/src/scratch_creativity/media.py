"""Visual and audio creativity pipelines.

Image and sound features normally come from per-asset sidecar files
(CFV1 format) written by an external extractor; built-in baseline
extractors (a color histogram for images, six short-time features for
audio) keep the pipelines runnable without one.  Images are compared by
cosine distance, sounds by padded Euclidean distance between their
time-by-feature matrices.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .concepts import Concept, Product, cosine_metric, matrix_metric
from .errors import FeatureError, MissingFeatures, SidecarError
from .measures import (
    AUDIO_CONFIG,
    VISUAL_CONFIG,
    MeasureConfig,
    flexibility,
    fluency,
    mean_pairwise_distance,
)
from .sb3 import AssetRef, Sb3Project, read_asset

__all__ = [
    "FeatureSidecar",
    "load_sidecar",
    "write_sidecar",
    "AudioFrameConfig",
    "DEFAULT_FRAME_TABLE",
    "decode_image",
    "baseline_image_embedding",
    "decode_wav",
    "baseline_audio_features",
    "FeatureStore",
    "ModalityScores",
    "visual_creativity",
    "audio_creativity",
]


@dataclass(frozen=True)
class FeatureSidecar:
    """Featurized asset: a T x F matrix keyed by the asset digest.
    Images carry a single row."""

    digest: str
    kind: str  # image | audio
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise SidecarError(f"{self.digest}: matrix must be T x F with T,F >= 1")
        if not np.all(np.isfinite(m)):
            raise SidecarError(f"{self.digest}: matrix contains non-finite values")
        if self.kind == "image" and m.shape[0] != 1:
            raise SidecarError(f"{self.digest}: image sidecars carry exactly one row")
        if self.kind not in ("image", "audio"):
            raise SidecarError(f"{self.digest}: unknown sidecar kind {self.kind!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def load_sidecar(directory, digest: str) -> FeatureSidecar:
    """Read `<digest>.cfv`: line 1 `CFV1 <image|audio> <T> <F>`, then T
    lines of F space-separated floats, no trailing blank lines."""
    path = Path(directory) / f"{digest}.cfv"
    if not path.exists():
        raise MissingFeatures([digest])
    text = path.read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    lines = text.split("\n")
    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != "CFV1":
        raise SidecarError(f"{path}: malformed header {lines[0]!r}")
    kind = header[1]
    try:
        t, f = int(header[2]), int(header[3])
    except ValueError:
        raise SidecarError(f"{path}: non-integer shape in header") from None
    rows = lines[1:]
    if len(rows) != t:
        raise SidecarError(f"{path}: header promises {t} rows, found {len(rows)}")
    matrix = np.empty((t, f))
    for i, row in enumerate(rows):
        parts = row.split(" ")
        if len(parts) != f:
            raise SidecarError(
                f"{path}: row {i + 1} has {len(parts)} values, expected {f}"
            )
        try:
            matrix[i] = [float(p) for p in parts]
        except ValueError:
            raise SidecarError(f"{path}: row {i + 1} has a non-numeric value") from None
    try:
        return FeatureSidecar(digest=digest, kind=kind, matrix=matrix)
    except SidecarError as exc:
        raise SidecarError(f"{path}: {exc}") from None


def write_sidecar(directory, sidecar: FeatureSidecar) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{sidecar.digest}.cfv"
    t, f = sidecar.matrix.shape
    lines = [f"CFV1 {sidecar.kind} {t} {f}"]
    for row in sidecar.matrix:
        lines.append(" ".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


DEFAULT_FRAME_TABLE = {11025: 220, 22050: 220, 24000: 220, 44100: 250, 48000: 250}


@dataclass(frozen=True)
class AudioFrameConfig:
    """Non-overlapping analysis windows; sizes depend on the sample rate
    (220 samples for the lower rates, 250 for the higher ones)."""

    window: int
    step: int

    def __post_init__(self):
        if self.window <= 0 or self.step <= 0:
            raise ValueError("window and step must be positive")

    @classmethod
    def for_rate(cls, rate: float, table: dict[int, int] | None = None) -> "AudioFrameConfig":
        if rate <= 0:
            raise ValueError("sample rate must be positive")
        table = table or DEFAULT_FRAME_TABLE
        nearest = min(table, key=lambda r: (abs(r - rate), r))
        window = table[nearest]
        return cls(window=window, step=window)


def decode_image(data: bytes) -> np.ndarray:
    """Decode raster image bytes into an H x W x 3 uint8 RGB array."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise FeatureError(f"cannot decode image: {exc}") from None
    if arr.size == 0:
        raise FeatureError("image has no pixels")
    return arr


def baseline_image_embedding(pixels: np.ndarray) -> np.ndarray:
    """512-dim normalized color histogram (8 x 8 x 8 RGB bins, mass 1)."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.size == 0:
        raise FeatureError("expected a non-empty H x W x 3 RGB array")
    flat = arr.reshape(-1, 3).astype(np.uint32)
    bins = (flat[:, 0] >> 5) * 64 + (flat[:, 1] >> 5) * 8 + (flat[:, 2] >> 5)
    hist = np.bincount(bins, minlength=512).astype(float)
    return hist / hist.sum()


def decode_wav(data: bytes) -> tuple[np.ndarray, int]:
    """Decode uncompressed PCM wav bytes into (mono float samples, rate).
    Stereo input is mixed down by channel averaging."""
    import wave

    try:
        with wave.open(io.BytesIO(data)) as wav:
            rate = wav.getframerate()
            channels = wav.getnchannels()
            width = wav.getsampwidth()
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise FeatureError(f"cannot decode wav: {exc}") from None
    if width == 1:
        samples = np.frombuffer(frames, dtype=np.uint8).astype(float) - 128.0
        samples /= 128.0
    elif width == 2:
        samples = np.frombuffer(frames, dtype="<i2").astype(float) / 32768.0
    elif width == 4:
        samples = np.frombuffer(frames, dtype="<i4").astype(float) / 2147483648.0
    else:
        raise FeatureError(f"unsupported wav sample width: {width} bytes")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def _spectrum(frame: np.ndarray) -> np.ndarray:
    # Hann window keeps spectral leakage from smearing centroid/rolloff.
    return np.abs(np.fft.rfft(frame * np.hanning(len(frame))))


def baseline_audio_features(
    samples: np.ndarray, rate: float, cfg: AudioFrameConfig | None = None
) -> np.ndarray:
    """Six short-time features per non-overlapping window: log energy,
    zero-crossing rate, spectral centroid (Hz), spectral roll-off at 85%
    (Hz), spectral flux against the previous window, spectral entropy.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise FeatureError("expected mono samples")
    if rate <= 0:
        raise FeatureError("sample rate must be positive")
    cfg = cfg or AudioFrameConfig.for_rate(rate)
    if len(samples) < cfg.window:
        raise FeatureError(
            f"audio shorter than one analysis window ({len(samples)} < {cfg.window})"
        )
    count = (len(samples) - cfg.window) // cfg.step + 1
    freqs = np.fft.rfftfreq(cfg.window, d=1.0 / rate)
    eps = 1e-12
    features = np.zeros((count, 6))
    prev_prob: np.ndarray | None = None
    for t in range(count):
        frame = samples[t * cfg.step : t * cfg.step + cfg.window]
        energy = float(np.mean(frame * frame))
        log_energy = math.log(energy + eps)
        signs = np.sign(frame)
        zcr = float(np.sum(np.abs(np.diff(signs)) > 0)) / (cfg.window - 1)
        mag = _spectrum(frame)
        total = float(mag.sum())
        if total > 0.0:
            centroid = float((freqs * mag).sum()) / total
            power = mag * mag
            cumulative = np.cumsum(power)
            threshold = 0.85 * cumulative[-1]
            rolloff = float(freqs[int(np.searchsorted(cumulative, threshold))])
            prob = mag / total
            entropy = float(-(prob * np.log(prob + eps)).sum())
        else:
            centroid = rolloff = entropy = 0.0
            prob = np.zeros_like(mag)
        if prev_prob is None:
            flux = 0.0
        else:
            flux = float(np.linalg.norm(prob - prev_prob))
        prev_prob = prob
        features[t] = (log_energy, zcr, centroid, rolloff, flux, entropy)
    return features


def _modality_sources(sources: Sequence[str]) -> str | None:
    kinds = set(sources)
    if not kinds:
        return None
    if len(kinds) == 1:
        return next(iter(kinds))
    return "mixed"


class FeatureStore:
    """Resolves asset features: sidecar first, baseline extractor as a
    fallback.  Missing sidecars with the fallback disabled are collected
    and raised together so callers see every offending digest at once."""

    def __init__(
        self,
        sidecar_dir=None,
        fallback: bool = True,
        frame_table: dict[int, int] | None = None,
    ):
        self.sidecar_dir = Path(sidecar_dir) if sidecar_dir else None
        self.fallback = fallback
        self.frame_table = frame_table
        self._cache: dict[tuple[str, str], np.ndarray] = {}

    def _sidecar(self, digest: str, kind: str) -> np.ndarray | None:
        if self.sidecar_dir is None:
            return None
        try:
            sidecar = load_sidecar(self.sidecar_dir, digest)
        except MissingFeatures:
            return None
        if sidecar.kind != kind:
            raise SidecarError(
                f"{digest}: sidecar kind {sidecar.kind!r} does not match {kind!r}"
            )
        return sidecar.matrix

    def image_vector(
        self, project: Sb3Project, asset: AssetRef
    ) -> tuple[np.ndarray, str]:
        key = ("image", asset.digest)
        if key in self._cache:
            return self._cache[key]
        matrix = self._sidecar(asset.digest, "image")
        if matrix is not None:
            result = (matrix[0], "sidecar")
        elif self.fallback:
            pixels = decode_image(read_asset(project, asset))
            result = (baseline_image_embedding(pixels), "baseline")
        else:
            raise MissingFeatures([asset.digest])
        self._cache[key] = result
        return result

    def sound_matrix(
        self, project: Sb3Project, asset: AssetRef
    ) -> tuple[np.ndarray, str]:
        key = ("audio", asset.digest)
        if key in self._cache:
            return self._cache[key]
        matrix = self._sidecar(asset.digest, "audio")
        if matrix is not None:
            result = (matrix, "sidecar")
        elif self.fallback:
            samples, rate = decode_wav(read_asset(project, asset))
            cfg = AudioFrameConfig.for_rate(rate, self.frame_table)
            result = (baseline_audio_features(samples, rate, cfg), "baseline")
        else:
            raise MissingFeatures([asset.digest])
        self._cache[key] = result
        return result


@dataclass(frozen=True)
class ModalityScores:
    fluency: float
    flexibility: float
    originality: float | None
    source: str | None  # sidecar | baseline | mixed | None when no assets

    @property
    def triple(self) -> tuple[float, float, float | None]:
        return (self.fluency, self.flexibility, self.originality)


def _collect(
    store: FeatureStore,
    projects: Sequence[Sb3Project],
    kind: str,
) -> list[list[tuple[Concept, str]]]:
    """Featurize every relevant asset of every project (one result list
    per input, in order); raises one MissingFeatures carrying all
    unresolved digests."""
    out: list[list[tuple[Concept, str]]] = []
    missing: list[str] = []
    for project in projects:
        assets = project.images if kind == "image" else project.sounds
        collected: list[tuple[Concept, str]] = []
        for asset in assets:
            try:
                if kind == "image":
                    payload, source = store.image_vector(project, asset)
                else:
                    payload, source = store.sound_matrix(project, asset)
            except MissingFeatures as exc:
                missing.extend(exc.digests)
                continue
            concept = Concept(
                id=asset.digest, payload=payload, dedup_key=asset.digest
            )
            collected.append((concept, source))
        out.append(collected)
    if missing:
        raise MissingFeatures(sorted(set(missing)))
    return out


def _pipeline(
    project: Sb3Project,
    store: FeatureStore,
    sample: Sequence[Sb3Project],
    kind: str,
    metric,
    cfg: MeasureConfig,
) -> ModalityScores:
    own, *references = _collect(store, [project, *sample], kind)
    if not own:
        return ModalityScores(0.0, 0.0, 0.0 if sample else None, None)
    source = _modality_sources([src for _, src in own])
    product = Product(tuple(concept for concept, _ in own))
    flu = fluency(product, metric, cfg)
    flex = flexibility(product, metric, cfg)
    if not sample:
        return ModalityScores(flu, flex, None, source)
    total = 0.0
    for entry in references:
        ref_product = Product(tuple(c for c, _ in entry))
        total += mean_pairwise_distance(product, ref_product, metric)
    return ModalityScores(flu, flex, total / len(sample), source)


def visual_creativity(
    project: Sb3Project,
    store: FeatureStore,
    sample: Sequence[Sb3Project] = (),
    cfg: MeasureConfig = VISUAL_CONFIG,
) -> ModalityScores:
    """Visual scores: fluency counts images (cosine distance to the null
    embedding is one per image), flexibility is the normalized pairwise
    cosine sum over digest-deduplicated images, originality the mean
    cross-pair cosine distance to sample projects' images."""
    return _pipeline(project, store, sample, "image", cosine_metric(), cfg)


def audio_creativity(
    project: Sb3Project,
    store: FeatureStore,
    sample: Sequence[Sb3Project] = (),
    cfg: MeasureConfig = AUDIO_CONFIG,
) -> ModalityScores:
    """Audio scores with the null concept as an all-zero matrix: fluency
    sums Frobenius norms of the feature matrices; projects without
    sounds score zero everywhere."""
    return _pipeline(project, store, sample, "sound", matrix_metric(), cfg)
