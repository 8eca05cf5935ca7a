"""Translation serving: single-map retrieval and a piecewise atlas.

The atlas keeps one map per anchor word and dispatches each query to the
map whose anchor is nearest by cosine. Nearest-anchor dispatch covers the
whole space even where neighborhoods overlap or leave gaps; an optional
global fallback map handles queries far from every anchor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSpace, cosine_similarity, top_k_by_cosine
from .mapper import LinearMap, load_map, save_map


@dataclass(frozen=True)
class AtlasEntry:
    anchor_word: str
    anchor_vector: np.ndarray
    linear_map: LinearMap


@dataclass(frozen=True)
class MapAtlas:
    """Anchored local maps plus an optional global fallback."""

    entries: tuple[AtlasEntry, ...]
    fallback: LinearMap | None = None

    def __post_init__(self):
        words = [e.anchor_word for e in self.entries]
        if len(set(words)) != len(words):
            raise ValueError("atlas anchor words must be unique")
        shapes = {e.linear_map.matrix.shape for e in self.entries}
        if self.fallback is not None:
            shapes.add(self.fallback.matrix.shape)
        if len(shapes) > 1:
            raise ValueError(f"atlas maps disagree on dimensions: {sorted(shapes)}")

    def __len__(self) -> int:
        return len(self.entries)


def translate_topk(
    m: LinearMap,
    src_vector: np.ndarray,
    tgt_space: EmbeddingSpace,
    k: int,
) -> list[tuple[str, float]]:
    """Top-k target words by cosine to the mapped source vector."""
    return top_k_by_cosine(tgt_space, m.apply(src_vector), k)


def select_entry(
    atlas: MapAtlas, src_vector: np.ndarray, floor: float = 0.0
) -> tuple[LinearMap, str]:
    """Pick the map whose anchor is nearest the query by cosine.

    Ties keep the earliest atlas entry. The fallback map is used when the
    atlas is empty or the best anchor cosine is below the floor; without a
    fallback the best anchor is used regardless, so dispatch always
    succeeds on a non-empty atlas.
    """
    if not atlas.entries and atlas.fallback is None:
        raise ValueError("empty atlas with no fallback map")
    best: tuple[float, int] | None = None
    for i, entry in enumerate(atlas.entries):
        score = cosine_similarity(entry.anchor_vector, src_vector)
        if best is None or score > best[0]:
            best = (score, i)
    if best is None or (best[0] < floor and atlas.fallback is not None):
        if atlas.fallback is None:
            raise ValueError("empty atlas with no fallback map")
        return atlas.fallback, "global"
    entry = atlas.entries[best[1]]
    return entry.linear_map, entry.anchor_word


def piecewise_translate(
    atlas: MapAtlas,
    src_word: str,
    src_space: EmbeddingSpace,
    tgt_space: EmbeddingSpace,
    k: int,
    floor: float = 0.0,
) -> tuple[list[tuple[str, float]], str]:
    """Translate through the nearest-anchor map; returns (ranking, anchor used)."""
    src_vector = src_space.vector(src_word)
    chosen, label = select_entry(atlas, src_vector, floor=floor)
    return translate_topk(chosen, src_vector, tgt_space, k), label


def save_atlas(atlas: MapAtlas, directory: str | Path) -> None:
    """Persist an atlas as one map file per anchor plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"entries": [], "fallback": None}
    for i, entry in enumerate(atlas.entries):
        filename = f"map_{i:04d}.txt"
        save_map(entry.linear_map, directory / filename)
        manifest["entries"].append(
            {
                "anchor": entry.anchor_word,
                "file": filename,
                "vector": [float(v) for v in entry.anchor_vector],
            }
        )
    if atlas.fallback is not None:
        save_map(atlas.fallback, directory / "map_global.txt")
        manifest["fallback"] = "map_global.txt"
    with (directory / "manifest.json").open("w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_atlas(directory: str | Path) -> MapAtlas:
    """Load an atlas saved by save_atlas."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"atlas manifest not found: {manifest_path}")
    with manifest_path.open("r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    entries = tuple(
        AtlasEntry(
            anchor_word=item["anchor"],
            anchor_vector=np.array(item["vector"], dtype=np.float64),
            linear_map=load_map(directory / item["file"]),
        )
        for item in manifest["entries"]
    )
    fallback = None
    if manifest.get("fallback"):
        fallback = load_map(directory / manifest["fallback"])
    return MapAtlas(entries, fallback=fallback)
