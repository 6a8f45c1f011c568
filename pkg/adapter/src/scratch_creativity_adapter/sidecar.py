"""CFV1 sidecar writer.

The format is the contract with the scoring core: line 1 is
`CFV1 <image|audio> <T> <F>`, followed by T rows of F space-separated
decimal floats (dot separator) and no trailing blank lines.  Floats are
rendered with repr() so re-extraction of identical inputs is
byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_sidecar(directory, digest: str, kind: str, matrix: np.ndarray) -> Path:
    if kind not in ("image", "audio"):
        raise ValueError(f"unknown sidecar kind {kind!r}")
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValueError("sidecar matrix must be T x F with T, F >= 1")
    if kind == "image" and matrix.shape[0] != 1:
        raise ValueError("image sidecars carry exactly one row")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("sidecar matrix must be finite")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    t, f = matrix.shape
    lines = [f"CFV1 {kind} {t} {f}"]
    for row in matrix:
        lines.append(" ".join(repr(float(v)) for v in row))
    path = directory / f"{digest}.cfv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
