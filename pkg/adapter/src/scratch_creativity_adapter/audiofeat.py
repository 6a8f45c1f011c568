"""Framewise audio features: 136 values per analysis window.

Layout (documented here because the sidecar format has no metadata):
  0..33   34 short-time descriptors: zero-crossing rate, energy, energy
          entropy, spectral centroid, spectral spread, spectral entropy,
          spectral flux, spectral roll-off (85%), 13 MFCCs, 12 chroma
          bins, chroma deviation
  34..67  first differences of the 34 descriptors (zeros on frame 0)
  68..135 68 log mel-band energies

Windows are non-overlapping and sized by sample rate: 220 samples for
the lower rates (11025/22050/24000 Hz), 250 for the higher ones
(44100/48000 Hz), nearest listed rate otherwise.  Stereo input is mixed
down by channel averaging before framing.
"""

from __future__ import annotations

import io
import math
import wave

import numpy as np

FRAME_TABLE = {11025: 220, 22050: 220, 24000: 220, 44100: 250, 48000: 250}
N_BASE = 34
N_MEL = 68
N_FEATURES = 136
N_MFCC = 13
N_MFCC_BANDS = 40
_EPS = 1e-12


def window_for_rate(rate: float, table: dict[int, int] | None = None) -> int:
    if rate <= 0:
        raise ValueError("sample rate must be positive")
    table = table or FRAME_TABLE
    nearest = min(table, key=lambda r: (abs(r - rate), r))
    return table[nearest]


def decode_wav(data: bytes) -> tuple[np.ndarray, int]:
    try:
        with wave.open(io.BytesIO(data)) as handle:
            rate = handle.getframerate()
            channels = handle.getnchannels()
            width = handle.getsampwidth()
            frames = handle.readframes(handle.getnframes())
    except (wave.Error, EOFError) as exc:
        raise ValueError(f"cannot decode wav: {exc}") from None
    if width == 1:
        samples = (np.frombuffer(frames, dtype=np.uint8).astype(float) - 128.0) / 128.0
    elif width == 2:
        samples = np.frombuffer(frames, dtype="<i2").astype(float) / 32768.0
    elif width == 4:
        samples = np.frombuffer(frames, dtype="<i4").astype(float) / 2147483648.0
    else:
        raise ValueError(f"unsupported wav sample width: {width} bytes")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def _mel_filterbank(n_filters: int, n_bins: int, rate: float) -> np.ndarray:
    """Triangular mel filters over the rfft bins; every filter keeps at
    least its center bin so band energies never vanish structurally."""
    freqs = np.linspace(0.0, rate / 2.0, n_bins)
    edges = _mel_to_hz(np.linspace(_hz_to_mel(0.0), _hz_to_mel(rate / 2.0), n_filters + 2))
    bank = np.zeros((n_filters, n_bins))
    for i in range(n_filters):
        low, center, high = edges[i], edges[i + 1], edges[i + 2]
        rising = (freqs - low) / max(center - low, _EPS)
        falling = (high - freqs) / max(high - center, _EPS)
        bank[i] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
        if bank[i].sum() == 0.0:
            bank[i, min(n_bins - 1, int(round(center / (rate / 2.0) * (n_bins - 1))))] = 1.0
    return bank


def _dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    basis = np.zeros((n_out, n_in))
    for k in range(n_out):
        basis[k] = np.cos(math.pi * k * (2 * np.arange(n_in) + 1) / (2 * n_in))
    basis *= math.sqrt(2.0 / n_in)
    basis[0] /= math.sqrt(2.0)
    return basis


def _chroma_map(freqs: np.ndarray) -> np.ndarray:
    classes = np.zeros(len(freqs), dtype=int)
    positive = freqs > 0
    classes[positive] = (
        np.round(12.0 * np.log2(freqs[positive] / 440.0)).astype(int) % 12
    )
    return classes


def _base_features(
    frame: np.ndarray,
    spectrum: np.ndarray,
    prev_prob: np.ndarray | None,
    freqs: np.ndarray,
    mfcc_bank: np.ndarray,
    dct: np.ndarray,
    chroma_classes: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    out = np.zeros(N_BASE)
    n = len(frame)
    signs = np.sign(frame)
    out[0] = float(np.sum(np.abs(np.diff(signs)) > 0)) / (n - 1)
    energy = float(np.mean(frame * frame))
    out[1] = energy
    # energy entropy over ten sub-blocks
    blocks = np.array_split(frame, 10)
    block_energy = np.array([float(np.sum(b * b)) for b in blocks])
    total_energy = block_energy.sum()
    if total_energy > 0:
        p = block_energy / total_energy
        out[2] = float(-(p * np.log2(p + _EPS)).sum())
    total = float(spectrum.sum())
    if total > 0:
        prob = spectrum / total
        centroid = float((freqs * prob).sum())
        out[3] = centroid
        out[4] = float(np.sqrt(((freqs - centroid) ** 2 * prob).sum()))
        out[5] = float(-(prob * np.log(prob + _EPS)).sum())
        power = spectrum * spectrum
        cumulative = np.cumsum(power)
        out[7] = float(freqs[int(np.searchsorted(cumulative, 0.85 * cumulative[-1]))])
    else:
        prob = np.zeros_like(spectrum)
    if prev_prob is not None:
        out[6] = float(np.linalg.norm(prob - prev_prob))
    band = mfcc_bank @ (spectrum * spectrum)
    out[8 : 8 + N_MFCC] = dct @ np.log(band + _EPS)
    chroma = np.zeros(12)
    power = spectrum * spectrum
    np.add.at(chroma, chroma_classes, power)
    chroma_total = chroma.sum()
    if chroma_total > 0:
        chroma = chroma / chroma_total
    out[21:33] = chroma
    out[33] = float(chroma.std())
    return out, prob


def extract_features(
    samples: np.ndarray, rate: float, table: dict[int, int] | None = None
) -> np.ndarray:
    """T x 136 feature matrix over non-overlapping windows."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise ValueError("expected mono samples")
    window = window_for_rate(rate, table)
    count = len(samples) // window
    if count == 0:
        raise ValueError(
            f"audio shorter than one analysis window ({len(samples)} < {window})"
        )
    n_bins = window // 2 + 1
    freqs = np.fft.rfftfreq(window, d=1.0 / rate)
    hann = np.hanning(window)
    mfcc_bank = _mel_filterbank(N_MFCC_BANDS, n_bins, rate)
    mel_bank = _mel_filterbank(N_MEL, n_bins, rate)
    dct = _dct_matrix(N_MFCC, N_MFCC_BANDS)
    chroma_classes = _chroma_map(freqs)

    base = np.zeros((count, N_BASE))
    mel = np.zeros((count, N_MEL))
    prev_prob: np.ndarray | None = None
    for t in range(count):
        frame = samples[t * window : (t + 1) * window]
        spectrum = np.abs(np.fft.rfft(frame * hann))
        base[t], prev_prob = _base_features(
            frame, spectrum, prev_prob, freqs, mfcc_bank, dct, chroma_classes
        )
        mel[t] = np.log(mel_bank @ (spectrum * spectrum) + _EPS)
    deltas = np.zeros_like(base)
    deltas[1:] = np.diff(base, axis=0)
    return np.hstack([base, deltas, mel])


def extract_audio_matrix(data: bytes, table: dict[int, int] | None = None) -> np.ndarray:
    samples, rate = decode_wav(data)
    return extract_features(samples, rate, table)
