"""Cosine-thresholded neighborhoods around anchor words.

A neighborhood is the anchor word together with every vocabulary word whose
cosine similarity to the anchor is at least a threshold s. Membership is
computed by exhaustive scan over the full vocabulary: exactness matters for
reproducing member counts, and a few hundred thousand dot products per
anchor is fast at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSpace, cosines_to_all


@dataclass(frozen=True)
class Neighborhood:
    """Anchor word, threshold, and members sorted by descending cosine."""

    anchor_word: str
    anchor_vector: np.ndarray
    threshold_s: float
    members: tuple[tuple[str, float], ...]

    def __len__(self) -> int:
        return len(self.members)

    def member_words(self) -> list[str]:
        return [w for w, _ in self.members]


def build_neighborhood(space: EmbeddingSpace, anchor: str, s: float) -> Neighborhood:
    """All words with cosine-to-anchor >= s, anchor always included.

    The anchor seeds the neighborhood before the threshold scan, so it is a
    member even at s = 1.0 where its own float cosine may round just below 1.
    Members are sorted by descending cosine, ties by vocabulary index.
    """
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"threshold s must be in [-1, 1], got {s}")
    if anchor not in space:
        raise KeyError(f"anchor word not in vocabulary: {anchor!r}")

    anchor_idx = space.index(anchor)
    anchor_vec = space.vectors[anchor_idx]
    cos = cosines_to_all(space, anchor_vec)
    keep = cos >= s
    keep[anchor_idx] = True

    idx = np.flatnonzero(keep)
    order = np.argsort(-cos[idx], kind="stable")  # ties keep ascending vocab index
    members = tuple((space.words[i], float(cos[i])) for i in idx[order])
    return Neighborhood(anchor, anchor_vec, float(s), members)


def growth_profile(
    space: EmbeddingSpace, anchor: str, thresholds: list[float]
) -> list[tuple[float, int]]:
    """Member count at each threshold of a strictly descending list."""
    for a, b in zip(thresholds, thresholds[1:]):
        if not b < a:
            raise ValueError(f"thresholds must be strictly descending, got {thresholds}")
    if not thresholds:
        return []
    if anchor not in space:
        raise KeyError(f"anchor word not in vocabulary: {anchor!r}")

    anchor_idx = space.index(anchor)
    cos = cosines_to_all(space, space.vectors[anchor_idx])
    profile = []
    for s in thresholds:
        if not -1.0 <= s <= 1.0:
            raise ValueError(f"threshold s must be in [-1, 1], got {s}")
        count = int(np.count_nonzero(cos >= s))
        if cos[anchor_idx] < s:
            count += 1  # anchor is always a member
        profile.append((float(s), count))
    return profile


def profile_to_tsv(profile: list[tuple[float, int]]) -> str:
    """Two-column TSV (s, count) for plotting."""
    lines = ["s\tcount"]
    for s, count in profile:
        lines.append(f"{repr(s)}\t{count}")
    return "\n".join(lines) + "\n"
