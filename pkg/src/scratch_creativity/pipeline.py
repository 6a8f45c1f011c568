"""Glue between ingestion, the per-modality measures, and the rank model.

Scores whole corpora once (base measures plus pairwise product-distance
matrices) so that originality against any reference sample, including
per-expert leave-one-out samples, is a cheap lookup afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .concepts import Product, cosine_metric, matrix_metric
from .errors import Sb3Error
from .measures import AUDIO_CONFIG, VISUAL_CONFIG, MeasureConfig, mean_pairwise_distance
from .media import FeatureStore, ModalityScores, audio_creativity, visual_creativity, _collect
from .ranking import ScoredCorpus
from .sb3 import Sb3Project, code_creativity, code_project_distance, parse_sb3

__all__ = [
    "ProjectScores",
    "score_project",
    "score_corpus",
    "load_corpus_dir",
]


@dataclass(frozen=True)
class ProjectScores:
    """All nine features of one project plus per-modality provenance."""

    project_id: str
    code: ModalityScores
    visual: ModalityScores
    audio: ModalityScores

    def as_row(self) -> dict:
        row: dict = {"project_id": self.project_id}
        for modality in ("code", "visual", "audio"):
            scores: ModalityScores = getattr(self, modality)
            row[f"{modality}_fluency"] = scores.fluency
            row[f"{modality}_flexibility"] = scores.flexibility
            row[f"{modality}_originality"] = scores.originality
        row["visual_features"] = self.visual.source or "none"
        row["audio_features"] = self.audio.source or "none"
        return row


def score_project(
    project: Sb3Project,
    store: FeatureStore,
    reference: Sequence[Sb3Project] = (),
    squared_code: bool = True,
    dedup: bool = True,
) -> ProjectScores:
    """Score one project; the reference sample drives originality and is
    filtered so the project never compares against its own archive."""
    sample = [
        r
        for r in reference
        if r.source_digest is None
        or project.source_digest is None
        or r.source_digest != project.source_digest
    ]
    flu, flex, orig = code_creativity(
        project, sample, squared=squared_code, dedup=dedup
    )
    code = ModalityScores(flu, flex, orig, "blocks")
    visual_cfg = MeasureConfig(
        squared=VISUAL_CONFIG.squared, dedup=dedup, product_distance="mean_pairwise"
    )
    audio_cfg = MeasureConfig(
        squared=AUDIO_CONFIG.squared, dedup=dedup, product_distance="mean_pairwise"
    )
    visual = visual_creativity(project, store, sample, visual_cfg)
    audio = audio_creativity(project, store, sample, audio_cfg)
    return ProjectScores(project.name, code, visual, audio)


def load_corpus_dir(directory, include_shadow: bool = False) -> list[Sb3Project]:
    """Parse every .sb3 archive in a directory, sorted by filename."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.sb3"))
    if not paths:
        raise Sb3Error(f"no .sb3 archives in {directory}")
    return [parse_sb3(path, include_shadow=include_shadow) for path in paths]


def score_corpus(
    projects: Sequence[Sb3Project],
    store: FeatureStore,
    squared_code: bool = True,
    dedup: bool = True,
) -> ScoredCorpus:
    """Base measures for every project plus the three pairwise product
    distance matrices (code: stage-and-sprite edit distance; visual and
    audio: mean cross-pair feature distance)."""
    names = [p.name for p in projects]
    if len(set(names)) != len(names):
        raise Sb3Error("corpus contains duplicate project names")
    n = len(projects)

    fluency = {m: np.zeros(n) for m in ("code", "visual", "audio")}
    flexibility = {m: np.zeros(n) for m in ("code", "visual", "audio")}
    for i, project in enumerate(projects):
        scores = score_project(
            project, store, reference=(), squared_code=squared_code, dedup=dedup
        )
        for modality in ("code", "visual", "audio"):
            part: ModalityScores = getattr(scores, modality)
            fluency[modality][i] = part.fluency
            flexibility[modality][i] = part.flexibility

    pairwise = {m: np.zeros((n, n)) for m in ("code", "visual", "audio")}
    image_products = _feature_products(store, projects, "image")
    sound_products = _feature_products(store, projects, "sound")
    vis_metric = cosine_metric()
    aud_metric = matrix_metric()
    for i in range(n):
        for j in range(i + 1, n):
            d_code = code_project_distance(projects[i], projects[j], squared=squared_code)
            d_vis = mean_pairwise_distance(image_products[i], image_products[j], vis_metric)
            d_aud = mean_pairwise_distance(sound_products[i], sound_products[j], aud_metric)
            pairwise["code"][i, j] = pairwise["code"][j, i] = d_code
            pairwise["visual"][i, j] = pairwise["visual"][j, i] = d_vis
            pairwise["audio"][i, j] = pairwise["audio"][j, i] = d_aud

    return ScoredCorpus(
        project_ids=tuple(names),
        fluency=fluency,
        flexibility=flexibility,
        pairwise=pairwise,
    )


def _feature_products(
    store: FeatureStore, projects: Sequence[Sb3Project], kind: str
) -> list[Product]:
    collected = _collect(store, list(projects), kind)
    return [Product(tuple(c for c, _ in entry)) for entry in collected]
