"""Synthetic embedding-pair worlds with known generating maps.

Worlds pair a clustered source space with a target space produced by a
known map, giving an independent ground truth for every diagnostic in this
package. Two regimes share one generator:

* linear: targets are G x for a fixed well-conditioned matrix G, so every
  locally fitted map should agree with every other one.
* rotating: targets are G R(theta(x)) x where R rotates a fixed 2-plane by
  theta(x) = variation_strength * (u . x) for a fixed unit axis u. The map
  changes smoothly with position, is locally approximable by construction,
  and degenerates to the linear regime at variation_strength = 0 with
  bit-identical output.

Source vectors are drawn from a Gaussian mixture whose cluster centers are
spread along the axis u, so the rotating regime actually sweeps a wide
angle range across clusters and cosine neighborhoods are non-trivial.
Sources are unit-normalized; targets are kept raw by default so that the
exact relation y = M(x) x survives (normalize_targets covers the other
regime).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import ExperimentReport, matrix_cosine, run_experiment
from .embeddings import EmbeddingSpace, cosine_similarity, load_embeddings, write_embeddings
from .lexicon import BilingualLexicon, load_lexicon
from .mapper import TrainConfig
from .seeds import spawn_rng


@dataclass(frozen=True)
class GroundTruth:
    """Parameters of the generating map."""

    kind: str  # "linear" | "rotating"
    matrix: np.ndarray
    variation_strength: float
    axis: np.ndarray
    plane_p: np.ndarray
    plane_q: np.ndarray
    cluster_centers: np.ndarray


@dataclass(frozen=True)
class SyntheticWorld:
    """Paired spaces, bijective lexicon, generating map, and region labels."""

    src_space: EmbeddingSpace
    tgt_space: EmbeddingSpace
    lexicon: BilingualLexicon
    ground_truth: GroundTruth
    region_labels: dict[str, int]
    noise_sigma: float
    seed: int
    params: dict = field(default_factory=dict)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def rotation_matrix(p: np.ndarray, q: np.ndarray, theta: float) -> np.ndarray:
    """Rotation by theta in the plane spanned by the orthonormal pair (p, q)."""
    d = p.shape[0]
    return (
        np.eye(d)
        + (math.cos(theta) - 1.0) * (np.outer(p, p) + np.outer(q, q))
        + math.sin(theta) * (np.outer(q, p) - np.outer(p, q))
    )


def local_map_at(world: SyntheticWorld, x: np.ndarray) -> np.ndarray:
    """The generating map evaluated at one source position (oracle)."""
    gt = world.ground_truth
    theta = gt.variation_strength * float(gt.axis @ x)
    return gt.matrix @ rotation_matrix(gt.plane_p, gt.plane_q, theta)


def _generate(
    n: int,
    d: int,
    noise_sigma: float,
    seed: int,
    variation_strength: float,
    n_clusters: int,
    cluster_std: float,
    center_spread: float,
    singular_range: tuple[float, float],
    normalize_targets: bool,
) -> SyntheticWorld:
    if n < 2 or d < 3:
        raise ValueError(f"need n >= 2 and d >= 3, got n={n} d={d}")
    if n_clusters < 1 or not 0 < center_spread < 1:
        raise ValueError("need n_clusters >= 1 and center_spread in (0, 1)")
    if noise_sigma < 0 or cluster_std <= 0 or variation_strength < 0:
        raise ValueError("noise_sigma/cluster_std/variation_strength out of range")
    lo, hi = singular_range
    if not 0 < lo <= hi or hi / lo > 10:
        raise ValueError(f"singular_range must keep condition number <= 10, got {singular_range}")

    # one stream, fixed draw order, independent of variation_strength: the
    # rotating generator at strength 0 must emit bit-identical vectors
    rng = spawn_rng(seed, "world")

    axis = _unit(rng.standard_normal(d))
    p = rng.standard_normal(d)
    p = _unit(p - (p @ axis) * axis)
    q = rng.standard_normal(d)
    q = _unit(q - (q @ axis) * axis - (q @ p) * p)

    q1, _ = np.linalg.qr(rng.standard_normal((d, d)))
    q2, _ = np.linalg.qr(rng.standard_normal((d, d)))
    singulars = rng.uniform(lo, hi, size=d)
    G = q1 @ np.diag(singulars) @ q2

    if n_clusters > 1 and d < n_clusters + 3:
        raise ValueError(f"need d >= n_clusters + 3 for distinct cluster directions, got d={d}")
    if n_clusters == 1:
        alphas = np.array([0.0])
    else:
        alphas = np.linspace(-center_spread, center_spread, n_clusters)
    centers = np.empty((n_clusters, d))
    residuals: list[np.ndarray] = []
    for j, alpha in enumerate(alphas):
        w = rng.standard_normal(d)
        # mutually orthogonal residual directions: center cosines then depend
        # on the axis coordinates alone, so anchor distance tracks the swept
        # angle exactly instead of up to random cross terms
        w = w - (w @ axis) * axis
        for prev in residuals:
            w = w - (w @ prev) * prev
        w = _unit(w)
        residuals.append(w)
        centers[j] = alpha * axis + math.sqrt(1.0 - alpha * alpha) * w

    labels = rng.integers(n_clusters, size=n)
    X = centers[labels] + cluster_std * rng.standard_normal((n, d))
    X = X / np.linalg.norm(X, axis=1, keepdims=True)

    theta = variation_strength * (X @ axis)
    px = X @ p
    qx = X @ q
    X_rot = (
        X
        + (np.cos(theta) - 1.0)[:, None] * (px[:, None] * p + qx[:, None] * q)
        + np.sin(theta)[:, None] * (px[:, None] * q - qx[:, None] * p)
    )
    Y = X_rot @ G.T
    noise = rng.standard_normal((n, d))
    if noise_sigma > 0:
        Y = Y + noise_sigma * noise
    if normalize_targets:
        Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)

    width = max(5, len(str(n - 1)))
    src_words = [f"w{i:0{width}d}" for i in range(n)]
    tgt_words = [f"v{i:0{width}d}" for i in range(n)]
    src_space = EmbeddingSpace("synth-src", src_words, X, normalized=True)
    tgt_space = EmbeddingSpace("synth-tgt", tgt_words, Y, normalized=normalize_targets)
    lexicon = BilingualLexicon(
        {sw: [tw] for sw, tw in zip(src_words, tgt_words)},
        source_language="synth-src",
        target_language="synth-tgt",
        line_count=n,
    )

    kind = "linear" if variation_strength == 0.0 else "rotating"
    gt = GroundTruth(
        kind=kind,
        matrix=G,
        variation_strength=float(variation_strength),
        axis=axis,
        plane_p=p,
        plane_q=q,
        cluster_centers=centers,
    )
    params = {
        "n": n,
        "d": d,
        "n_clusters": n_clusters,
        "cluster_std": cluster_std,
        "center_spread": center_spread,
        "singular_range": list(singular_range),
        "normalize_targets": normalize_targets,
    }
    return SyntheticWorld(
        src_space=src_space,
        tgt_space=tgt_space,
        lexicon=lexicon,
        ground_truth=gt,
        region_labels={w: int(c) for w, c in zip(src_words, labels)},
        noise_sigma=float(noise_sigma),
        seed=seed,
        params=params,
    )


def generate_linear_world(
    n: int,
    d: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
    n_clusters: int = 8,
    cluster_std: float = 0.3,
    center_spread: float = 0.8,
    singular_range: tuple[float, float] = (0.8, 2.0),
    normalize_targets: bool = False,
) -> SyntheticWorld:
    """World whose targets are exactly G x (plus optional Gaussian noise)."""
    return _generate(
        n, d, noise_sigma, seed, 0.0, n_clusters, cluster_std,
        center_spread, singular_range, normalize_targets,
    )


def generate_nonlinear_world(
    n: int,
    d: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
    variation_strength: float = 1.5,
    n_clusters: int = 8,
    cluster_std: float = 0.3,
    center_spread: float = 0.8,
    singular_range: tuple[float, float] = (0.8, 2.0),
    normalize_targets: bool = False,
) -> SyntheticWorld:
    """World with a smoothly position-dependent map; strength 0 is linear."""
    return _generate(
        n, d, noise_sigma, seed, variation_strength, n_clusters, cluster_std,
        center_spread, singular_range, normalize_targets,
    )


def default_anchor_words(world: SyntheticWorld) -> list[str]:
    """One representative word per cluster: the member nearest its center.

    Ordered by cluster index, which follows the center positions along the
    variation axis, so the first anchor sits at one end of the swept range.
    """
    centers = world.ground_truth.cluster_centers
    best: dict[int, tuple[float, str]] = {}
    for word, label in world.region_labels.items():
        score = cosine_similarity(world.src_space.vector(word), centers[label])
        if label not in best or score > best[label][0]:
            best[label] = (score, word)
    return [best[label][1] for label in sorted(best)]


def locality_diagnostic(
    world: SyntheticWorld,
    anchors: list[str],
    s: float,
    trainer: str,
    config: TrainConfig,
    test_size: int = 100,
    seed: int | None = None,
    eval_k: int = 10,
    min_train: int = 50,
    lam: float = 0.0,
    jobs: int = 1,
) -> ExperimentReport:
    """Full experiment on a synthetic world plus pairwise map similarities.

    Beyond the per-anchor report rows, records (anchor cosine, map cosine)
    for every pair of usable anchors so the similarity-vs-distance trend
    can be tested directly against the known generating map.
    """
    report = run_experiment(
        anchors,
        s,
        world.src_space,
        world.tgt_space,
        world.lexicon,
        config,
        test_sizes=test_size,
        seed=config.seed if seed is None else seed,
        trainer=trainer,
        lam=lam,
        eval_k=eval_k,
        min_train=min_train,
        jobs=jobs,
    )
    usable = [row.anchor_word for row in report.rows]
    pairwise = []
    for i, a in enumerate(usable):
        for b in usable[i + 1 :]:
            pairwise.append(
                (
                    a,
                    b,
                    cosine_similarity(world.src_space.vector(a), world.src_space.vector(b)),
                    matrix_cosine(report.local_maps[a].matrix, report.local_maps[b].matrix),
                )
            )
    report.pairwise_map_cosines = pairwise
    return report


def pairwise_to_tsv(report: ExperimentReport) -> str:
    """Pairwise (anchor cosine, map cosine) rows for trend plotting."""
    lines = ["anchor_a\tanchor_b\tanchor_cosine\tmap_cosine"]
    for a, b, ac, mc in report.pairwise_map_cosines or []:
        lines.append(f"{a}\t{b}\t{ac!r}\t{mc!r}")
    return "\n".join(lines) + "\n"


def export_world(world: SyntheticWorld, directory: str | Path) -> None:
    """Write the world in standard file formats plus a JSON descriptor.

    src.vec / tgt.vec / lexicon.txt feed the normal CLI path; world.json
    carries the generating-map parameters and region labels so the world
    can be reconstructed exactly for diagnostics.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_embeddings(world.src_space, directory / "src.vec")
    write_embeddings(world.tgt_space, directory / "tgt.vec")
    with (directory / "lexicon.txt").open("w", encoding="utf-8") as fh:
        for src, targets in world.lexicon.pairs.items():
            for tgt in targets:
                fh.write(f"{src}\t{tgt}\n")
    gt = world.ground_truth
    descriptor = {
        "kind": gt.kind,
        "seed": world.seed,
        "noise_sigma": world.noise_sigma,
        "variation_strength": gt.variation_strength,
        "matrix": [[float(v) for v in row] for row in gt.matrix],
        "axis": [float(v) for v in gt.axis],
        "plane_p": [float(v) for v in gt.plane_p],
        "plane_q": [float(v) for v in gt.plane_q],
        "cluster_centers": [[float(v) for v in row] for row in gt.cluster_centers],
        "region_labels": world.region_labels,
        "params": world.params,
    }
    with (directory / "world.json").open("w", encoding="utf-8") as fh:
        json.dump(descriptor, fh)
        fh.write("\n")


def load_world(directory: str | Path) -> SyntheticWorld:
    """Reconstruct a world exported by export_world (bit-exact vectors)."""
    directory = Path(directory)
    descriptor_path = directory / "world.json"
    if not descriptor_path.is_file():
        raise FileNotFoundError(f"world descriptor not found: {descriptor_path}")
    with descriptor_path.open("r", encoding="utf-8") as fh:
        desc = json.load(fh)

    params = desc["params"]
    src_space = load_embeddings(directory / "src.vec", normalize=False, language_tag="synth-src")
    src_space = EmbeddingSpace("synth-src", src_space.words, src_space.vectors, normalized=True)
    tgt_space = load_embeddings(directory / "tgt.vec", normalize=False, language_tag="synth-tgt")
    if params.get("normalize_targets"):
        tgt_space = EmbeddingSpace("synth-tgt", tgt_space.words, tgt_space.vectors, normalized=True)
    lexicon = load_lexicon(directory / "lexicon.txt", "synth-src", "synth-tgt")

    gt = GroundTruth(
        kind=desc["kind"],
        matrix=np.array(desc["matrix"], dtype=np.float64),
        variation_strength=float(desc["variation_strength"]),
        axis=np.array(desc["axis"], dtype=np.float64),
        plane_p=np.array(desc["plane_p"], dtype=np.float64),
        plane_q=np.array(desc["plane_q"], dtype=np.float64),
        cluster_centers=np.array(desc["cluster_centers"], dtype=np.float64),
    )
    return SyntheticWorld(
        src_space=src_space,
        tgt_space=tgt_space,
        lexicon=lexicon,
        ground_truth=gt,
        region_labels={w: int(c) for w, c in desc["region_labels"].items()},
        noise_sigma=float(desc["noise_sigma"]),
        seed=int(desc["seed"]),
        params=params,
    )
