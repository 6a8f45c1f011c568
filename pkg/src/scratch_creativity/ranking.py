"""Rank prediction over the nine creativity features.

A small gradient-boosted regression-tree model (squared loss, residual
fitting, shrinkage) is trained per expert or on all experts combined and
evaluated with k-fold cross-validation.  Agreement is measured with
Kendall's tau; during evaluation the tau is restricted to ranking pairs
that touch at least one test item, with test items contributing their
predicted score to an otherwise ground-truth ranking.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import LabelsError
from .measures import TARGETS, CreativityVector, feature_indices

__all__ = [
    "LabelRow",
    "ExpertWeights",
    "ExpertLabels",
    "load_labels_csv",
    "load_weights_csv",
    "weighted_combination",
    "kendall_tau",
    "restricted_tau",
    "GbtParams",
    "GbtModel",
    "fit_gbt",
    "predict",
    "predict_many",
    "save_model",
    "load_model",
    "make_folds",
    "ScoredCorpus",
    "ExperimentRow",
    "build_rows",
    "GroupEval",
    "EvalReport",
    "run_experiment",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 17

LABELS_HEADER = ["project_id", "expert_id", "code", "visual", "audio", "idea", "final"]
WEIGHTS_HEADER = ["expert_id", "w_code", "w_visual", "w_audio", "w_idea", "w_other"]


@dataclass(frozen=True)
class LabelRow:
    project_id: str
    expert_id: str
    code: float
    visual: float
    audio: float
    idea: float | None = None
    final: float | None = None

    def __post_init__(self):
        for name in ("code", "visual", "audio", "idea", "final"):
            value = getattr(self, name)
            if value is None:
                continue
            if not (0.0 <= value <= 100.0):
                raise LabelsError(
                    f"{self.project_id}/{self.expert_id}: {name} score {value} "
                    "outside [0, 100]"
                )

    def aspect(self, target: str) -> float:
        if target not in ("code", "visual", "audio"):
            raise LabelsError(f"no stored score for target {target!r}")
        return getattr(self, target)


@dataclass(frozen=True)
class ExpertWeights:
    expert_id: str
    w_code: float
    w_visual: float
    w_audio: float
    w_idea: float
    w_other: float

    def __post_init__(self):
        values = (self.w_code, self.w_visual, self.w_audio, self.w_idea, self.w_other)
        if any(w < 0 for w in values):
            raise LabelsError(f"expert {self.expert_id}: negative weight")
        total = sum(values)
        if abs(total - 1.0) > 1e-9:
            raise LabelsError(
                f"expert {self.expert_id}: weights sum to {total}, expected 1"
            )

    @classmethod
    def normalized(cls, expert_id, w_code, w_visual, w_audio, w_idea, w_other):
        raw = (w_code, w_visual, w_audio, w_idea, w_other)
        if any(w < 0 or w > 1 for w in raw):
            raise LabelsError(f"expert {expert_id}: weights must lie in [0, 1]")
        total = sum(raw)
        if total <= 0:
            raise LabelsError(f"expert {expert_id}: weights sum to zero")
        return cls(str(expert_id), *(w / total for w in raw))


@dataclass(frozen=True)
class ExpertLabels:
    rows: tuple[LabelRow, ...]
    weights: dict[str, ExpertWeights]

    def experts(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.expert_id, None)
        return tuple(seen)

    def rows_for(self, expert_id: str) -> tuple[LabelRow, ...]:
        return tuple(r for r in self.rows if r.expert_id == expert_id)

    def row(self, expert_id: str, project_id: str) -> LabelRow:
        for r in self.rows:
            if r.expert_id == expert_id and r.project_id == project_id:
                return r
        raise LabelsError(f"expert {expert_id!r} has no score for {project_id!r}")


def _parse_score(value: str, where: str) -> float | None:
    value = value.strip()
    if not value:
        return None
    try:
        return float(value)
    except ValueError:
        raise LabelsError(f"{where}: non-numeric score {value!r}") from None


def load_labels_csv(path) -> tuple[LabelRow, ...]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise LabelsError(f"{path}: empty labels file") from None
        if [h.strip() for h in header] != LABELS_HEADER:
            raise LabelsError(
                f"{path}: expected header {','.join(LABELS_HEADER)}"
            )
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(LABELS_HEADER):
                raise LabelsError(f"{path}:{lineno}: wrong column count")
            where = f"{path}:{lineno}"
            code = _parse_score(record[2], where)
            visual = _parse_score(record[3], where)
            audio = _parse_score(record[4], where)
            if code is None or visual is None or audio is None:
                raise LabelsError(f"{where}: code, visual, and audio are required")
            rows.append(
                LabelRow(
                    project_id=record[0].strip(),
                    expert_id=record[1].strip(),
                    code=code,
                    visual=visual,
                    audio=audio,
                    idea=_parse_score(record[5], where),
                    final=_parse_score(record[6], where),
                )
            )
    if not rows:
        raise LabelsError(f"{path}: no label rows")
    return tuple(rows)


def load_weights_csv(path) -> dict[str, ExpertWeights]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise LabelsError(f"{path}: empty weights file") from None
        if [h.strip() for h in header] != WEIGHTS_HEADER:
            raise LabelsError(f"{path}: expected header {','.join(WEIGHTS_HEADER)}")
        weights: dict[str, ExpertWeights] = {}
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(WEIGHTS_HEADER):
                raise LabelsError(f"{path}:{lineno}: wrong column count")
            try:
                parsed = [float(v) for v in record[1:]]
            except ValueError:
                raise LabelsError(f"{path}:{lineno}: non-numeric weight") from None
            expert_id = record[0].strip()
            if expert_id in weights:
                raise LabelsError(f"{path}:{lineno}: duplicate expert {expert_id!r}")
            weights[expert_id] = ExpertWeights.normalized(expert_id, *parsed)
    if not weights:
        raise LabelsError(f"{path}: no weight rows")
    return weights


def weighted_combination(labels: ExpertLabels, expert_id: str, project_id: str) -> float:
    """Weighted sum of the expert's code, visual, and audio scores with
    the three modality weights renormalized (idea/other weights have no
    automatic counterpart)."""
    row = labels.row(expert_id, project_id)
    weights = labels.weights.get(expert_id)
    if weights is None:
        raise LabelsError(f"no weights for expert {expert_id!r}")
    total = weights.w_code + weights.w_visual + weights.w_audio
    if total <= 0:
        raise LabelsError(f"expert {expert_id!r}: modality weights sum to zero")
    return (
        weights.w_code * row.code
        + weights.w_visual * row.visual
        + weights.w_audio * row.audio
    ) / total


def _tau_from_pairs(pairs, variant: str) -> float:
    concordant = discordant = 0
    tied_x = tied_y = 0
    total = 0
    for (x1, y1), (x2, y2) in pairs:
        total += 1
        sx = (x1 > x2) - (x1 < x2)
        sy = (y1 > y2) - (y1 < y2)
        if sx == 0:
            tied_x += 1
        if sy == 0:
            tied_y += 1
        if sx * sy > 0:
            concordant += 1
        elif sx * sy < 0:
            discordant += 1
    if total == 0:
        raise LabelsError("no ranking pairs to compare")
    numerator = concordant - discordant
    if variant == "a":
        return numerator / total
    denominator = math.sqrt((total - tied_x) * (total - tied_y))
    if denominator == 0:
        raise LabelsError("tau undefined: one ranking is completely tied")
    return numerator / denominator


def kendall_tau(a: Sequence[float], b: Sequence[float], variant: str = "b") -> float:
    """Kendall rank correlation; the default tie-adjusted variant ("b")
    is undefined (error) when either list is completely tied."""
    if variant not in ("a", "b"):
        raise ValueError(f"unknown tau variant {variant!r}")
    if len(a) != len(b):
        raise LabelsError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise LabelsError("tau needs at least two items")
    pairs = [
        ((a[i], b[i]), (a[j], b[j]))
        for i in range(len(a))
        for j in range(i + 1, len(a))
    ]
    return _tau_from_pairs(pairs, variant)


def restricted_tau(
    scores_true: Mapping[str, float],
    scores_pred_test: Mapping[str, float],
    train_ids: Sequence[str],
    test_ids: Sequence[str],
    variant: str = "b",
) -> float:
    """Tau between the true ranking and the combined ranking (true scores
    on train items, predicted scores on test items), computed only over
    pairs that include at least one test item."""
    if variant not in ("a", "b"):
        raise ValueError(f"unknown tau variant {variant!r}")
    train_ids = list(train_ids)
    test_ids = list(test_ids)
    if not test_ids:
        raise LabelsError("restricted tau needs a non-empty test set")
    if set(train_ids) & set(test_ids):
        raise LabelsError("train and test sets overlap")
    everything = train_ids + test_ids
    for item in everything:
        if item not in scores_true:
            raise LabelsError(f"no true score for {item!r}")
    for item in test_ids:
        if item not in scores_pred_test:
            raise LabelsError(f"no predicted score for test item {item!r}")
    test_set = set(test_ids)
    combined = {i: scores_true[i] for i in train_ids}
    combined.update({i: scores_pred_test[i] for i in test_ids})
    pairs = []
    for i in range(len(everything)):
        for j in range(i + 1, len(everything)):
            a, b = everything[i], everything[j]
            if a in test_set or b in test_set:
                pairs.append(
                    ((scores_true[a], combined[a]), (scores_true[b], combined[b]))
                )
    return _tau_from_pairs(pairs, variant)


@dataclass(frozen=True)
class GbtParams:
    n_trees: int = 15
    max_depth: int = 3
    shrinkage: float = 0.3
    min_samples_split: int = 2

    def __post_init__(self):
        if self.n_trees < 0 or self.max_depth < 0:
            raise ValueError("n_trees and max_depth must be non-negative")
        if not (0.0 < self.shrinkage < 2.0):
            raise ValueError("shrinkage must lie in (0, 2)")


@dataclass(frozen=True)
class TreeNode:
    """One node of a regression tree: either an axis-aligned split
    (feature, threshold, child indices) or a leaf carrying a value."""

    feature: int | None
    threshold: float
    left: int
    right: int
    value: float

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class GbtModel:
    trees: tuple[tuple[TreeNode, ...], ...]
    shrinkage: float
    base_score: float
    n_features: int
    max_trees: int
    max_depth: int
    training_mse: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.trees) > self.max_trees:
            raise ValueError("model has more trees than max_trees")
        for tree in self.trees:
            for node in tree:
                if node.is_leaf and not np.isfinite(node.value):
                    raise ValueError("leaf value must be finite")


def _best_split(x: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
    """Best threshold for one feature by squared-error reduction, or None
    when the feature is constant.  Returns (gain, threshold)."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = len(ys)
    cum = np.cumsum(ys)
    cum_sq = np.cumsum(ys * ys)
    total = cum[-1]
    total_sq = cum_sq[-1]
    parent_sse = total_sq - total * total / n
    boundaries = np.nonzero(xs[:-1] < xs[1:])[0]
    if boundaries.size == 0:
        return None
    left_n = boundaries + 1
    left_sum = cum[boundaries]
    left_sq = cum_sq[boundaries]
    sse_left = left_sq - left_sum * left_sum / left_n
    right_n = n - left_n
    right_sum = total - left_sum
    sse_right = (total_sq - left_sq) - right_sum * right_sum / right_n
    gains = parent_sse - (sse_left + sse_right)
    best = int(np.argmax(gains))
    lo = float(xs[boundaries[best]])
    hi = float(xs[boundaries[best] + 1])
    threshold = (lo + hi) / 2.0
    if not (lo <= threshold < hi):  # adjacent floats can round the midpoint up
        threshold = lo
    return float(gains[best]), threshold


def _grow_tree(
    X: np.ndarray, residuals: np.ndarray, params: GbtParams
) -> tuple[TreeNode, ...]:
    nodes: list[TreeNode] = []

    def build(index: np.ndarray, depth: int) -> int:
        y = residuals[index]
        mean = float(y.mean())
        node_id = len(nodes)
        nodes.append(TreeNode(None, 0.0, -1, -1, mean))
        if depth >= params.max_depth or len(index) < params.min_samples_split:
            return node_id
        best: tuple[float, int, float] | None = None
        for feature in range(X.shape[1]):
            found = _best_split(X[index, feature], y)
            if found is None:
                continue
            gain, threshold = found
            if best is None or gain > best[0] + 1e-12:
                best = (gain, feature, threshold)
        if best is None or best[0] <= 1e-12:
            return node_id
        _, feature, threshold = best
        mask = X[index, feature] <= threshold
        left = build(index[mask], depth + 1)
        right = build(index[~mask], depth + 1)
        nodes[node_id] = TreeNode(feature, threshold, left, right, mean)
        return node_id

    build(np.arange(X.shape[0]), 0)
    return tuple(nodes)


def _tree_predict(tree: tuple[TreeNode, ...], x: np.ndarray) -> float:
    node = tree[0]
    while not node.is_leaf:
        node = tree[node.left] if x[node.feature] <= node.threshold else tree[node.right]
    return node.value


def fit_gbt(X, y, params: GbtParams = GbtParams()) -> GbtModel:
    """Squared-loss boosting: each tree fits the current residuals with
    mean-valued leaves, scaled by the shrinkage.  Training MSE is
    recorded per round and is non-increasing by construction."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D feature matrix")
    if y.shape != (X.shape[0],):
        raise ValueError("y must be one target per row of X")
    if X.shape[0] < 2:
        raise ValueError("need at least two training rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")

    base = float(y.mean())
    predictions = np.full(len(y), base)
    trees: list[tuple[TreeNode, ...]] = []
    mse_curve = [float(np.mean((y - predictions) ** 2))]
    for _ in range(params.n_trees):
        residuals = y - predictions
        tree = _grow_tree(X, residuals, params)
        trees.append(tree)
        updates = np.array([_tree_predict(tree, row) for row in X])
        predictions = predictions + params.shrinkage * updates
        mse_curve.append(float(np.mean((y - predictions) ** 2)))
    for earlier, later in zip(mse_curve, mse_curve[1:]):
        if later > earlier + 1e-9:
            raise RuntimeError("training error increased during boosting")
    return GbtModel(
        trees=tuple(trees),
        shrinkage=params.shrinkage,
        base_score=base,
        n_features=X.shape[1],
        max_trees=params.n_trees,
        max_depth=params.max_depth,
        training_mse=tuple(mse_curve),
    )


def predict(model: GbtModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise ValueError(
            f"feature vector has shape {x.shape}, expected ({model.n_features},)"
        )
    total = sum(_tree_predict(tree, x) for tree in model.trees)
    return float(model.base_score + model.shrinkage * total)


def predict_many(model: GbtModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.array([predict(model, row) for row in X])


def save_model(model: GbtModel, path) -> Path:
    path = Path(path)
    lines = [
        "GBT1",
        f"base_score {model.base_score!r}",
        f"shrinkage {model.shrinkage!r}",
        f"n_features {model.n_features}",
        f"max_trees {model.max_trees}",
        f"max_depth {model.max_depth}",
        f"n_trees {len(model.trees)}",
    ]
    for tree in model.trees:
        lines.append(f"tree {len(tree)}")
        for node in tree:
            if node.is_leaf:
                lines.append(f"leaf {node.value!r}")
            else:
                lines.append(
                    f"split {node.feature} {node.threshold!r} {node.left} {node.right}"
                )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_model(path) -> GbtModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "GBT1":
        raise ValueError(f"{path}: not a GBT1 model file")
    header: dict[str, str] = {}
    cursor = 1
    for _ in range(6):
        key, value = lines[cursor].split(" ", 1)
        header[key] = value
        cursor += 1
    trees: list[tuple[TreeNode, ...]] = []
    for _ in range(int(header["n_trees"])):
        tag, count = lines[cursor].split(" ")
        if tag != "tree":
            raise ValueError(f"{path}: expected tree header at line {cursor + 1}")
        cursor += 1
        nodes: list[TreeNode] = []
        for _ in range(int(count)):
            parts = lines[cursor].split(" ")
            if parts[0] == "leaf":
                nodes.append(TreeNode(None, 0.0, -1, -1, float(parts[1])))
            elif parts[0] == "split":
                nodes.append(
                    TreeNode(
                        int(parts[1]),
                        float(parts[2]),
                        int(parts[3]),
                        int(parts[4]),
                        0.0,
                    )
                )
            else:
                raise ValueError(f"{path}: bad node line {lines[cursor]!r}")
            cursor += 1
        trees.append(tuple(nodes))
    return GbtModel(
        trees=tuple(trees),
        shrinkage=float(header["shrinkage"]),
        base_score=float(header["base_score"]),
        n_features=int(header["n_features"]),
        max_trees=int(header["max_trees"]),
        max_depth=int(header["max_depth"]),
    )


def make_folds(n: int, k: int, seed: int) -> list[list[int]]:
    """Disjoint cover of range(n) into k folds, shuffled by seed."""
    if k < 2:
        raise ValueError("need at least two folds")
    if n < k:
        raise LabelsError(f"cannot split {n} rows into {k} folds")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    base = n // k
    extra = n % k
    folds = []
    cursor = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(indices[cursor : cursor + size])
        cursor += size
    return folds


@dataclass(frozen=True)
class ScoredCorpus:
    """Per-project base measures plus pairwise product distances, enough
    to derive features for any reference sample without re-ingesting."""

    project_ids: tuple[str, ...]
    fluency: dict[str, np.ndarray]  # modality -> value per project
    flexibility: dict[str, np.ndarray]
    pairwise: dict[str, np.ndarray]  # modality -> n x n distance matrix

    def __post_init__(self):
        n = len(self.project_ids)
        if len(set(self.project_ids)) != n:
            raise LabelsError("duplicate project ids in corpus")
        for modality in ("code", "visual", "audio"):
            for mapping in (self.fluency, self.flexibility):
                if mapping[modality].shape != (n,):
                    raise ValueError(f"bad {modality} base feature shape")
            if self.pairwise[modality].shape != (n, n):
                raise ValueError(f"bad {modality} pairwise matrix shape")

    def index(self, project_id: str) -> int:
        try:
            return self.project_ids.index(project_id)
        except ValueError:
            raise LabelsError(f"unknown project id {project_id!r}") from None

    def originality(self, project_id: str, reference_ids: Sequence[str], modality: str) -> float:
        if not reference_ids:
            raise LabelsError(
                f"originality of {project_id!r} needs a reference sample"
            )
        i = self.index(project_id)
        refs = [self.index(r) for r in reference_ids]
        return float(self.pairwise[modality][i, refs].mean())

    def feature_vector(self, project_id: str, reference_ids: Sequence[str]) -> np.ndarray:
        """Nine features in FEATURE_NAMES order (fluency, flexibility,
        originality per modality)."""
        i = self.index(project_id)
        values = []
        for modality in ("code", "visual", "audio"):
            values.append(float(self.fluency[modality][i]))
            values.append(float(self.flexibility[modality][i]))
            values.append(self.originality(project_id, reference_ids, modality))
        return np.array(values)


@dataclass(frozen=True)
class ExperimentRow:
    """One training instance: a (project, expert) pair with features that
    use the expert-specific leave-one-out reference sample."""

    row_id: str
    project_id: str
    expert_id: str
    features: np.ndarray
    targets: dict[str, float]


def build_rows(corpus: ScoredCorpus, labels: ExpertLabels) -> list[ExperimentRow]:
    missing = sorted(
        {r.project_id for r in labels.rows} - set(corpus.project_ids)
    )
    if missing:
        raise LabelsError("labels reference unknown projects: " + ", ".join(missing))
    by_expert: dict[str, list[str]] = {}
    for row in labels.rows:
        by_expert.setdefault(row.expert_id, []).append(row.project_id)
    rows: list[ExperimentRow] = []
    for label in labels.rows:
        reference = [p for p in by_expert[label.expert_id] if p != label.project_id]
        # CreativityVector enforces the finite/non-negative invariant
        features = CreativityVector(
            *corpus.feature_vector(label.project_id, reference)
        ).as_array()
        targets = {
            "code": label.code,
            "visual": label.visual,
            "audio": label.audio,
            "weighted": weighted_combination(labels, label.expert_id, label.project_id),
        }
        rows.append(
            ExperimentRow(
                row_id=f"{label.project_id}|{label.expert_id}",
                project_id=label.project_id,
                expert_id=label.expert_id,
                features=features,
                targets=targets,
            )
        )
    return rows


@dataclass(frozen=True)
class GroupEval:
    """Cross-validated result for one model (an expert's or the combined
    one): fold assignments, per-fold restricted tau, and their mean."""

    name: str
    n_rows: int
    n_folds: int
    n_trees: int
    max_depth: int
    fold_test_ids: tuple[tuple[str, ...], ...]
    taus: tuple[float | None, ...]
    mean_tau: float | None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_rows": self.n_rows,
            "n_folds": self.n_folds,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "fold_test_ids": [list(ids) for ids in self.fold_test_ids],
            "taus": list(self.taus),
            "mean_tau": self.mean_tau,
        }


@dataclass(frozen=True)
class EvalReport:
    mode: str  # per-expert | combined
    target: str
    seed: int
    tau_variant: str
    groups: tuple[GroupEval, ...]
    mean_tau: float | None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "target": self.target,
            "seed": self.seed,
            "tau_variant": self.tau_variant,
            "groups": [g.to_dict() for g in self.groups],
            "mean_tau": self.mean_tau,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _mean_or_none(values: Sequence[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    if not defined:
        return None
    return float(sum(defined)) / len(defined)


def _capacity(mode: str, n_rows: int, target: str) -> tuple[int, int]:
    if mode == "combined":
        n_trees = 29
    else:
        n_trees = 10 if n_rows <= 10 else 15
    depth = 4 if target == "weighted" else 3
    return n_trees, depth


def run_experiment(
    corpus: ScoredCorpus,
    labels: ExpertLabels,
    mode: str,
    target: str,
    seed: int = DEFAULT_SEED,
    n_folds: int | None = None,
    shrinkage: float = 0.3,
    tau_variant: str = "b",
) -> EvalReport:
    """Cross-validated rank agreement under the evaluation protocol:
    deterministic seeded folds, capacity fixed by mode and row count
    (29 trees combined, 10 or 15 per expert; depth 3 for three-feature
    targets, 4 for the nine-feature one), restricted tau per fold
    averaged per model.  A constant target makes tau undefined; the
    affected fold reports null instead of a value."""
    if mode not in ("per-expert", "combined"):
        raise ValueError(f"unknown mode {mode!r}")
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}")
    all_rows = build_rows(corpus, labels)
    if mode == "combined":
        groups = [("combined", all_rows)]
        k = n_folds or 10
    else:
        groups = [
            (expert, [r for r in all_rows if r.expert_id == expert])
            for expert in labels.experts()
        ]
        k = n_folds or 5
    columns = list(feature_indices(target))

    evaluated: list[GroupEval] = []
    for name, rows in groups:
        n = len(rows)
        folds = make_folds(n, k, seed)
        if mode == "per-expert" and min(len(f) for f in folds) < 2:
            raise LabelsError(
                f"{name}: fold size below two ({n} rows over {k} folds)"
            )
        n_trees, depth = _capacity(mode, n, target)
        params = GbtParams(n_trees=n_trees, max_depth=depth, shrinkage=shrinkage)
        X = np.array([row.features[columns] for row in rows])
        y = np.array([row.targets[target] for row in rows])
        truth = {row.row_id: float(value) for row, value in zip(rows, y)}
        taus: list[float | None] = []
        fold_ids: list[tuple[str, ...]] = []
        for fold in folds:
            test_mask = np.zeros(n, dtype=bool)
            test_mask[fold] = True
            model = fit_gbt(X[~test_mask], y[~test_mask], params)
            test_rows = [rows[i] for i in fold]
            preds = {
                row.row_id: predict(model, X[i])
                for row, i in zip(test_rows, fold)
            }
            train_ids = [rows[i].row_id for i in range(n) if not test_mask[i]]
            test_ids = [row.row_id for row in test_rows]
            fold_ids.append(tuple(test_ids))
            try:
                taus.append(
                    restricted_tau(truth, preds, train_ids, test_ids, tau_variant)
                )
            except LabelsError:
                taus.append(None)
        evaluated.append(
            GroupEval(
                name=name,
                n_rows=n,
                n_folds=k,
                n_trees=n_trees,
                max_depth=depth,
                fold_test_ids=tuple(fold_ids),
                taus=tuple(taus),
                mean_tau=_mean_or_none(taus),
            )
        )
    return EvalReport(
        mode=mode,
        target=target,
        seed=seed,
        tau_variant=tau_variant,
        groups=tuple(evaluated),
        mean_tau=_mean_or_none([g.mean_tau for g in evaluated]),
    )
