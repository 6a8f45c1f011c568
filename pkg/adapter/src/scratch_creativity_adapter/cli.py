"""Batch extraction: scan an asset directory, write one CFV1 sidecar per
asset into the output directory.  Asset files are expected to be named
`<digest>.<ext>` the way project archives store them."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .audiofeat import FRAME_TABLE, extract_audio_matrix
from .encoder import encoder_status, extract_image_vector
from .sidecar import write_sidecar

IMAGE_EXTENSIONS = {"png", "jpg", "jpeg", "bmp", "gif"}
SOUND_EXTENSIONS = {"wav"}


@dataclass(frozen=True)
class ExtractionJob:
    """One asset to featurize; the sidecar lands at `<digest>.cfv` in
    the output directory."""

    asset_path: Path
    digest: str
    kind: str  # image | sound
    output_dir: Path
    frame_table: dict[int, int] = field(default_factory=lambda: dict(FRAME_TABLE))

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir) / f"{self.digest}.cfv"


def run_job(job: ExtractionJob) -> Path:
    data = Path(job.asset_path).read_bytes()
    if job.kind == "image":
        vector = extract_image_vector(data)
        return write_sidecar(job.output_dir, job.digest, "image", vector.reshape(1, -1))
    matrix = extract_audio_matrix(data, job.frame_table)
    return write_sidecar(job.output_dir, job.digest, "audio", matrix)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scratch-creativity-extract",
        description="Write CFV1 feature sidecars for image and sound assets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    extract = sub.add_parser("extract", help="featurize a directory of assets")
    extract.add_argument("--in", dest="input_dir", required=True)
    extract.add_argument("--out", dest="output_dir", required=True)
    extract.add_argument("--images", action="store_true")
    extract.add_argument("--sounds", action="store_true")
    return parser


def plan_jobs(input_dir, output_dir, images: bool, sounds: bool) -> list[ExtractionJob]:
    want_images = images or not (images or sounds)
    want_sounds = sounds or not (images or sounds)
    jobs = []
    for path in sorted(Path(input_dir).iterdir()):
        if not path.is_file() or "." not in path.name:
            continue
        digest, ext = path.name.rsplit(".", 1)
        ext = ext.lower()
        if ext in IMAGE_EXTENSIONS and want_images:
            jobs.append(ExtractionJob(path, digest, "image", Path(output_dir)))
        elif ext in SOUND_EXTENSIONS and want_sounds:
            jobs.append(ExtractionJob(path, digest, "sound", Path(output_dir)))
    return jobs


def run_extract(input_dir, output_dir, images: bool, sounds: bool) -> tuple[int, list[dict]]:
    written = 0
    errors: list[dict] = []
    for job in plan_jobs(input_dir, output_dir, images, sounds):
        try:
            run_job(job)
            written += 1
        except (ValueError, RuntimeError, OSError) as exc:
            errors.append({"item": job.digest, "error": str(exc)})
    return written, errors


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    written, errors = run_extract(
        args.input_dir, args.output_dir, args.images, args.sounds
    )
    payload = {"written": written, "encoder": encoder_status()}
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if errors:
        sys.stderr.write(json.dumps({"errors": errors}, sort_keys=True, indent=2) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
