"""The three creativity scales: fluency, flexibility, originality.

Fluency sums each concept's distance to the null concept, flexibility is
the normalized sum of pairwise concept distances, and originality is the
mean distance to a reference sample of typical products.  All three are
parameterized by the concept metric and a small configuration (squaring,
duplicate removal, and the product-distance strategy for originality).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .align import alignment_distance
from .concepts import Concept, Metric, Product, squared as squared_metric

__all__ = [
    "MeasureConfig",
    "CODE_CONFIG",
    "VISUAL_CONFIG",
    "AUDIO_CONFIG",
    "fluency",
    "flexibility",
    "flexibility_sum",
    "mean_pairwise_distance",
    "originality",
    "CreativityVector",
    "FEATURE_NAMES",
    "TARGETS",
    "feature_indices",
]

_PRODUCT_DISTANCES = ("alignment", "mean_pairwise", "tree_3step")


@dataclass(frozen=True)
class MeasureConfig:
    """Per-modality measurement switches.

    ``squared`` applies d^2 inside the sums, weighting advanced concepts
    more heavily; ``dedup`` removes duplicate concepts before
    flexibility; ``product_distance`` selects how originality compares
    whole products.
    """

    squared: bool = False
    dedup: bool = False
    product_distance: str = "alignment"

    def __post_init__(self):
        if self.product_distance not in _PRODUCT_DISTANCES:
            raise ValueError(
                f"unknown product distance {self.product_distance!r}; "
                f"expected one of {_PRODUCT_DISTANCES}"
            )


CODE_CONFIG = MeasureConfig(squared=True, dedup=True, product_distance="tree_3step")
VISUAL_CONFIG = MeasureConfig(squared=False, dedup=True, product_distance="mean_pairwise")
AUDIO_CONFIG = MeasureConfig(squared=False, dedup=True, product_distance="mean_pairwise")


def _term(d: float, cfg: MeasureConfig) -> float:
    return d * d if cfg.squared else d


def fluency(s: Product, metric: Metric, cfg: MeasureConfig = MeasureConfig()) -> float:
    """Sum of each concept's distance to the null concept (duplicates count)."""
    return float(sum(_term(metric.null_distance(x), cfg) for x in s.concepts))


def _dedup(concepts: Sequence[Concept]) -> list[Concept]:
    seen = set()
    out = []
    for c in concepts:
        k = c.key()
        if k in seen:
            continue
        seen.add(k)
        out.append(c)
    return out


def flexibility_sum(
    s: Product, metric: Metric, cfg: MeasureConfig = MeasureConfig()
) -> float:
    """Unnormalized flexibility: the full double sum of pairwise distances
    after optional duplicate removal.  Exposed so callers can renormalize
    differently without recomputing the distances."""
    w = _dedup(s.concepts) if cfg.dedup else list(s.concepts)
    total = 0.0
    for i, x in enumerate(w):
        for j, y in enumerate(w):
            if i == j:
                continue
            total += _term(metric(x, y), cfg)
    return total


def flexibility(
    s: Product, metric: Metric, cfg: MeasureConfig = MeasureConfig()
) -> float:
    """Pairwise-distance sum normalized by |concepts| - 1 after optional
    dedup; a product with at most one concept class has no diversity and
    scores 0."""
    w = _dedup(s.concepts) if cfg.dedup else list(s.concepts)
    if len(w) <= 1:
        return 0.0
    return flexibility_sum(s, metric, cfg) / (len(w) - 1)


def mean_pairwise_distance(s: Product, t: Product, metric: Metric) -> float:
    """Average concept distance over all cross pairs between two products;
    zero when either side is empty (no pairs to compare)."""
    if not s.concepts or not t.concepts:
        return 0.0
    total = 0.0
    for x in s.concepts:
        for y in t.concepts:
            total += metric(x, y)
    return total / (len(s.concepts) * len(t.concepts))


def originality(
    s: Product,
    sample: Sequence[Product],
    metric: Metric,
    cfg: MeasureConfig = MeasureConfig(),
    product_distance_fn: Callable[[Product, Product], float] | None = None,
) -> float:
    """Mean product distance from ``s`` to each member of the reference
    sample.  The sample is a modeling choice and must be non-empty; the
    caller is responsible for excluding ``s`` itself when appropriate."""
    if not sample:
        raise ValueError("originality needs a reference sample")
    fn = product_distance_fn
    if fn is None:
        eff = squared_metric(metric) if cfg.squared else metric
        if cfg.product_distance == "alignment":
            fn = lambda p, q: alignment_distance(p, q, eff)[0]
        elif cfg.product_distance == "mean_pairwise":
            fn = lambda p, q: mean_pairwise_distance(p, q, eff)
        else:
            raise ValueError(
                "the tree_3step product distance is supplied by the code "
                "pipeline; pass product_distance_fn explicitly"
            )
    return float(sum(fn(s, t) for t in sample)) / len(sample)


FEATURE_NAMES = (
    "code_fluency",
    "code_flexibility",
    "code_originality",
    "visual_fluency",
    "visual_flexibility",
    "visual_originality",
    "audio_fluency",
    "audio_flexibility",
    "audio_originality",
)

TARGETS = ("code", "visual", "audio", "weighted")


def feature_indices(target: str) -> tuple[int, ...]:
    """Column subset of the nine-feature vector used for a given target."""
    if target == "code":
        return (0, 1, 2)
    if target == "visual":
        return (3, 4, 5)
    if target == "audio":
        return (6, 7, 8)
    if target == "weighted":
        return tuple(range(9))
    raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


@dataclass(frozen=True)
class CreativityVector:
    """The nine automatic features of one project: fluency, flexibility,
    and originality for code, visual, and audio.  Projects without sounds
    carry an all-zero audio triple."""

    code_fluency: float
    code_flexibility: float
    code_originality: float
    visual_fluency: float
    visual_flexibility: float
    visual_originality: float
    audio_fluency: float
    audio_flexibility: float
    audio_originality: float

    def __post_init__(self):
        for name in FEATURE_NAMES:
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=float)
