"""Scratch project ingestion and the code-modality pipeline.

Parses `.sb3` archives (zip files with a `project.json` manifest) into
one syntax tree per block stack, classifies blocks into the category
hierarchy (predefined subcategories, extension packages, custom blocks),
and computes the code creativity measures, including the project-level
code distance: stage tree edit distance plus an optimal matching of
sprite tree edit distances.
"""

from __future__ import annotations

import hashlib
import json
import re
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .align import LabeledTree, hungarian, tree_edit_distance
from .concepts import NULL, Concept, Metric, Product, SemanticNetwork
from .errors import Sb3Error
from .measures import MeasureConfig, flexibility, fluency

__all__ = [
    "Taxonomy",
    "BlockConcept",
    "AssetRef",
    "SpriteCode",
    "Sb3Project",
    "classify_block",
    "block_distance",
    "block_metric",
    "build_block_network",
    "parse_sb3",
    "read_asset",
    "project_summary",
    "sprite_tree",
    "project_blocks",
    "code_project_distance",
    "code_creativity",
]

PREDEFINED_SUBCATEGORIES = frozenset(
    {"motion", "looks", "sound", "event", "control", "sensing", "operator", "data"}
)

# Distance from the null concept per block kind: how much programming
# knowledge using such a block signals.
NULL_DISTANCE = {"predefined": 3.0, "extension": 4.0, "custom": 5.0}

IMAGE_EXTENSIONS = frozenset({"png", "svg", "jpg", "jpeg", "bmp", "gif"})
SOUND_EXTENSIONS = frozenset({"wav", "mp3", "ogg", "m4a", "aiff"})

_HEX_DIGEST = re.compile(r"^[0-9a-f]+$")


@dataclass(frozen=True)
class Taxonomy:
    """Where a block lives in the category hierarchy."""

    kind: str  # predefined | extension | custom
    group: str  # subcategory, extension package, or "custom"


@dataclass(frozen=True)
class BlockConcept:
    opcode: str
    taxonomy: Taxonomy

    def as_concept(self) -> Concept:
        return Concept(
            id=self.opcode,
            payload=(self.opcode, self.taxonomy.kind, self.taxonomy.group),
        )


def classify_block(opcode: str, custom_prototypes: frozenset = frozenset()) -> Taxonomy:
    """Derive a block's taxonomy from its opcode prefix.

    Total function: the eight built-in prefixes map to predefined
    subcategories, `procedures_*` and explicitly listed prototypes are
    custom, everything else (pen, music, videoSensing, ...) is treated
    as an extension package named after the prefix.
    """
    if opcode in custom_prototypes:
        return Taxonomy("custom", "custom")
    prefix = opcode.split("_", 1)[0]
    if prefix == "procedures":
        return Taxonomy("custom", "custom")
    if prefix in PREDEFINED_SUBCATEGORIES:
        return Taxonomy("predefined", prefix)
    return Taxonomy("extension", prefix)


def block_distance(a: BlockConcept | None, b: BlockConcept | None) -> float:
    """Closed form of the shortest path between two blocks in the block
    category network; ``None`` stands for the null concept.

    Same opcode 0; same subcategory/package 1; different groups within
    the same kind (or two distinct custom blocks) 2; predefined to
    extension 3; extension to custom 3; predefined to custom 4; null is
    3/4/5 away from predefined/extension/custom blocks.
    """
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        present = a if a is not None else b
        return NULL_DISTANCE[present.taxonomy.kind]
    if a.opcode == b.opcode and a.taxonomy == b.taxonomy:
        return 0.0
    ka, kb = a.taxonomy.kind, b.taxonomy.kind
    if ka == kb:
        if ka == "custom":
            return 2.0
        return 1.0 if a.taxonomy.group == b.taxonomy.group else 2.0
    kinds = {ka, kb}
    if kinds == {"predefined", "extension"}:
        return 3.0
    if kinds == {"extension", "custom"}:
        return 3.0
    return 4.0  # predefined vs custom


def _payload_block(c: Concept) -> BlockConcept | None:
    if c.is_null:
        return None
    opcode, kind, group = c.payload
    return BlockConcept(opcode, Taxonomy(kind, group))


def block_metric(squared: bool = False) -> Metric:
    """Concept metric over block payloads; optionally squared for use as
    an edit cost."""

    def fn(x: Concept, y: Concept) -> float:
        d = block_distance(_payload_block(x), _payload_block(y))
        return d * d if squared else d

    name = "blocks^2" if squared else "blocks"
    return Metric(name, fn)


def build_block_network(blocks) -> SemanticNetwork:
    """Materialize the block category network for a set of blocks.

    Layout: the null node sits 2 above the predefined hub; predefined
    subcategories and their blocks hang half an edge below their hub
    each; the extension hub is 1 below predefined with the same package
    fan-out; the custom hub is 1 below extensions with each custom block
    a full edge below it.  Shortest paths over this network reproduce
    the closed form in :func:`block_distance`.
    """
    edges: list[tuple[str, str, float]] = [
        ("0", "predefined", 2.0),
        ("predefined", "extensions", 1.0),
        ("extensions", "custom-blocks", 1.0),
    ]
    groups: set[tuple[str, str]] = set()
    for block in blocks:
        tax = block.taxonomy
        if tax.kind == "predefined":
            hub = f"predefined/{tax.group}"
            if ("predefined", hub) not in groups:
                groups.add(("predefined", hub))
                edges.append(("predefined", hub, 0.5))
            edges.append((hub, block.opcode, 0.5))
        elif tax.kind == "extension":
            hub = f"extensions/{tax.group}"
            if ("extensions", hub) not in groups:
                groups.add(("extensions", hub))
                edges.append(("extensions", hub, 0.5))
            edges.append((hub, block.opcode, 0.5))
        else:
            edges.append(("custom-blocks", block.opcode, 1.0))
    return SemanticNetwork(edges, null_id="0")


@dataclass(frozen=True)
class AssetRef:
    digest: str
    filename: str
    kind: str  # image | sound
    sample_rate: float | None = None


@dataclass(frozen=True)
class SpriteCode:
    name: str
    scripts: tuple[LabeledTree, ...]
    block_count: int

    def __post_init__(self):
        total = sum(script.size for script in self.scripts)
        if total != self.block_count:
            raise Sb3Error(
                f"sprite {self.name!r}: block_count {self.block_count} "
                f"!= {total} nodes in scripts"
            )


@dataclass(frozen=True)
class Sb3Project:
    name: str
    stage: SpriteCode
    sprites: tuple[SpriteCode, ...]
    images: tuple[AssetRef, ...]
    sounds: tuple[AssetRef, ...]
    path: Path | None = None
    source_digest: str | None = None  # sha256 of the archive bytes

    @property
    def block_count(self) -> int:
        return self.stage.block_count + sum(s.block_count for s in self.sprites)


def _child_ids(block: dict) -> list[str]:
    """Block ids referenced by a block: declared inputs first (in their
    declared order), then the `next` link."""
    ids: list[str] = []
    inputs = block.get("inputs") or {}
    for value in inputs.values():
        if not isinstance(value, list):
            continue
        for element in value[1:]:
            if isinstance(element, str):
                ids.append(element)
    nxt = block.get("next")
    if isinstance(nxt, str):
        ids.append(nxt)
    return ids


def _proccode_map(blocks: dict[str, dict]) -> dict[str, str]:
    """Map block id -> custom-block signature (proccode).

    Calls and prototypes carry the signature in their mutation; a
    definition hat borrows it from its prototype so that distinct custom
    blocks stay distinct concepts even with identical opcodes.
    """
    out: dict[str, str] = {}
    for bid, block in blocks.items():
        mutation = block.get("mutation") or {}
        proccode = mutation.get("proccode")
        if isinstance(proccode, str):
            out[bid] = proccode
    for bid, block in blocks.items():
        if block.get("opcode") != "procedures_definition":
            continue
        custom = (block.get("inputs") or {}).get("custom_block")
        if isinstance(custom, list):
            for element in custom[1:]:
                if isinstance(element, str) and element in out:
                    out[bid] = out[element]
                    break
    return out


def _block_concept(bid: str, block: dict, proccodes: dict[str, str]) -> Concept:
    opcode = block.get("opcode")
    if not isinstance(opcode, str) or not opcode:
        raise Sb3Error(f"block {bid!r} has no opcode")
    if opcode.startswith("procedures") and bid in proccodes:
        opcode = f"{opcode}:{proccodes[bid]}"
    tax = classify_block(opcode)
    return BlockConcept(opcode, tax).as_concept()


def _build_script(
    root_id: str,
    blocks: dict[str, dict],
    visited: set[str],
    include_shadow: bool,
    proccodes: dict[str, str],
) -> LabeledTree | None:
    order: list[str] = []
    children_of: dict[str, list[str]] = {}
    stack: list[tuple[str, bool]] = [(root_id, False)]
    while stack:
        bid, expanded = stack.pop()
        if expanded:
            order.append(bid)
            continue
        if bid in visited:
            raise Sb3Error(f"malformed block graph: block {bid!r} reached twice")
        visited.add(bid)
        block = blocks.get(bid)
        if block is None:
            raise Sb3Error(f"unknown block id {bid!r}")
        kids = _child_ids(block)
        children_of[bid] = kids
        stack.append((bid, True))
        for kid in reversed(kids):
            stack.append((kid, False))
    built: dict[str, LabeledTree | None] = {}
    for bid in order:
        block = blocks[bid]
        if block.get("shadow") and not include_shadow:
            built[bid] = None  # dropdown/menu helper, not a user idea
            continue
        kids = tuple(
            built[k] for k in children_of[bid] if built.get(k) is not None
        )
        built[bid] = LabeledTree(_block_concept(bid, block, proccodes), kids)
    return built[root_id]


def _parse_target(target: dict, include_shadow: bool) -> SpriteCode:
    name = str(target.get("name", ""))
    raw = target.get("blocks") or {}
    # Floating variable/list reporters are stored as bare arrays; they
    # are workspace decoration, not blocks.
    blocks = {bid: b for bid, b in raw.items() if isinstance(b, dict)}
    proccodes = _proccode_map(blocks)
    visited: set[str] = set()
    scripts = []
    for bid, block in blocks.items():
        if not block.get("topLevel"):
            continue
        tree = _build_script(bid, blocks, visited, include_shadow, proccodes)
        if tree is not None:
            scripts.append(tree)
    count = sum(tree.size for tree in scripts)
    return SpriteCode(name=name, scripts=tuple(scripts), block_count=count)


def _parse_assets(
    target: dict, members: set[str]
) -> tuple[list[AssetRef], list[AssetRef]]:
    images: list[AssetRef] = []
    sounds: list[AssetRef] = []
    for entry in target.get("costumes") or []:
        images.append(_asset_ref(entry, "image", members))
    for entry in target.get("sounds") or []:
        sounds.append(_asset_ref(entry, "sound", members))
    return images, sounds


def _asset_ref(entry: dict, kind: str, members: set[str]) -> AssetRef:
    digest = str(entry.get("assetId", "")).lower()
    if not _HEX_DIGEST.match(digest):
        raise Sb3Error(f"asset id {entry.get('assetId')!r} is not a hex digest")
    fmt = str(entry.get("dataFormat", "")).lower()
    filename = str(entry.get("md5ext") or f"{digest}.{fmt}")
    ext = filename.rsplit(".", 1)[-1].lower()
    if kind == "image" and ext not in IMAGE_EXTENSIONS:
        raise Sb3Error(f"costume {filename!r} does not have an image extension")
    if kind == "sound" and ext not in SOUND_EXTENSIONS:
        raise Sb3Error(f"sound {filename!r} does not have a sound extension")
    if filename not in members:
        raise Sb3Error(f"asset {filename!r} referenced but missing from archive")
    rate = entry.get("rate")
    return AssetRef(
        digest=digest,
        filename=filename,
        kind=kind,
        sample_rate=float(rate) if rate else None,
    )


def parse_sb3(path, include_shadow: bool = False) -> Sb3Project:
    """Parse a `.sb3` archive into syntax trees and asset inventories.

    Shadow blocks (pure dropdown arguments) are excluded from the trees
    unless ``include_shadow`` is set; they are interface artifacts, not
    ideas the author contributed.
    """
    path = Path(path)
    if not path.exists():
        raise Sb3Error(f"no such file: {path}")
    raw_bytes = path.read_bytes()
    try:
        archive = zipfile.ZipFile(path)
    except zipfile.BadZipFile as exc:
        raise Sb3Error(f"{path}: not a zip archive ({exc})") from None
    with archive:
        members = set(archive.namelist())
        if "project.json" not in members:
            raise Sb3Error(f"{path}: archive has no project.json manifest")
        try:
            manifest = json.loads(archive.read("project.json"))
        except json.JSONDecodeError as exc:
            raise Sb3Error(f"{path}: project.json is not valid JSON ({exc})") from None
    targets = manifest.get("targets")
    if not isinstance(targets, list) or not targets:
        raise Sb3Error(f"{path}: manifest has no targets")
    stages = [t for t in targets if t.get("isStage")]
    if len(stages) != 1:
        raise Sb3Error(f"{path}: expected exactly one stage, found {len(stages)}")

    stage_code = None
    sprites: list[SpriteCode] = []
    images: list[AssetRef] = []
    sounds: list[AssetRef] = []
    for target in targets:
        code = _parse_target(target, include_shadow)
        t_images, t_sounds = _parse_assets(target, members)
        images.extend(t_images)
        sounds.extend(t_sounds)
        if target.get("isStage"):
            stage_code = code
        else:
            sprites.append(code)
    return Sb3Project(
        name=path.stem,
        stage=stage_code,
        sprites=tuple(sprites),
        images=tuple(images),
        sounds=tuple(sounds),
        path=path,
        source_digest=hashlib.sha256(raw_bytes).hexdigest(),
    )


def read_asset(project: Sb3Project, asset: AssetRef) -> bytes:
    if project.path is None:
        raise Sb3Error(f"project {project.name!r} has no backing archive")
    with zipfile.ZipFile(project.path) as archive:
        try:
            return archive.read(asset.filename)
        except KeyError:
            raise Sb3Error(
                f"asset {asset.filename!r} missing from {project.path}"
            ) from None


def project_blocks(project: Sb3Project) -> list[Concept]:
    """Every block instance across the stage and all sprites."""
    out: list[Concept] = []
    for sprite in (project.stage, *project.sprites):
        for script in sprite.scripts:
            out.extend(node.label for node in script.postorder())
    return out


def project_summary(project: Sb3Project) -> dict:
    """Canonical JSON-ready description used for debugging and snapshot
    comparison; schema documented in the README."""
    taxonomy_counts: dict[str, int] = {}
    for concept in project_blocks(project):
        _, kind, group = concept.payload
        key = f"{kind}:{group}"
        taxonomy_counts[key] = taxonomy_counts.get(key, 0) + 1
    return {
        "name": project.name,
        "block_count": project.block_count,
        "targets": [
            {
                "name": sprite.name,
                "scripts": len(sprite.scripts),
                "blocks": sprite.block_count,
            }
            for sprite in (project.stage, *project.sprites)
        ],
        "block_taxonomy": dict(sorted(taxonomy_counts.items())),
        "images": [
            {"digest": a.digest, "filename": a.filename} for a in project.images
        ],
        "sounds": [
            {
                "digest": a.digest,
                "filename": a.filename,
                "sample_rate": a.sample_rate,
            }
            for a in project.sounds
        ],
    }


def sprite_tree(sprite: SpriteCode) -> LabeledTree:
    """A sprite's script forest as one tree under a zero-cost synthetic
    root (the root is null-labeled, so it costs nothing to keep or drop)."""
    return LabeledTree(NULL, tuple(sprite.scripts))


def code_project_distance(p: Sb3Project, q: Sb3Project, squared: bool = True) -> float:
    """Project-level code distance in three steps: stage tree edit
    distance, all pairwise sprite tree edit distances, then an optimal
    sprite matching where unmatched sprites pay the cost of deleting or
    inserting all their blocks."""
    metric = block_metric(squared=squared)
    total = tree_edit_distance(sprite_tree(p.stage), sprite_tree(q.stage), metric)
    p_trees = [sprite_tree(s) for s in p.sprites]
    q_trees = [sprite_tree(s) for s in q.sprites]
    n, m = len(p_trees), len(q_trees)
    if n == 0 and m == 0:
        return total
    cost = np.zeros((n + m, n + m))
    for i, a in enumerate(p_trees):
        for j, b in enumerate(q_trees):
            cost[i, j] = tree_edit_distance(a, b, metric)
        cost[i, m:] = tree_edit_distance(a, None, metric)
    for j, b in enumerate(q_trees):
        cost[n:, j] = tree_edit_distance(None, b, metric)
    _, matching_total = hungarian(cost)
    return total + matching_total


def code_creativity(
    p: Sb3Project,
    sample=(),
    squared: bool = True,
    dedup: bool = True,
) -> tuple[float, float, float | None]:
    """Code fluency, flexibility, and originality of one project.

    Originality is the mean project distance to the sample and is None
    when no sample is given.
    """
    cfg = MeasureConfig(squared=squared, dedup=dedup, product_distance="tree_3step")
    product = Product(tuple(project_blocks(p)))
    metric = block_metric(squared=False)  # squaring handled by cfg
    flu = fluency(product, metric, cfg)
    flex = flexibility(product, metric, cfg)
    if not sample:
        return flu, flex, None
    orig = sum(code_project_distance(p, q, squared=squared) for q in sample) / len(
        sample
    )
    return flu, flex, float(orig)
