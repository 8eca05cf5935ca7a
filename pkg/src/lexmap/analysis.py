"""Experiment diagnostics: matrix similarity, retrieval accuracy, reports.

The experiment driver trains one map per anchor neighborhood plus a global
map on the union of their training data, evaluates all three on each
anchor's held-out test set, and assembles a ten-column report row per
anchor together with the correlation between map similarity and the
reference map's accuracy.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np
from scipy import stats as _scipy_stats

from .embeddings import EmbeddingSpace, cosine_similarity, cosines_to_all
from .lexicon import (
    BilingualLexicon,
    TranslationDataset,
    build_dataset,
    split_dataset,
    union_train_datasets,
)
from .mapper import LinearMap, TrainConfig, train_least_squares, train_max_margin
from .neighborhoods import build_neighborhood
from .seeds import spawn_seed

TSV_COLUMNS = (
    "anchor_word",
    "train_size",
    "test_size",
    "anchor_cosine",
    "acc_global",
    "acc_reference",
    "acc_local",
    "delta",
    "map_cosine",
    "map_norm",
)


def matrix_cosine(m1: np.ndarray, m2: np.ndarray) -> float:
    """Cosine similarity of two matrices viewed as flat vectors.

    Computed as the Frobenius inner product over the product of Frobenius
    norms, which equals the trace form tr(M1^T M2) / sqrt(tr(M1^T M1)
    tr(M2^T M2)).
    """
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    if m1.shape != m2.shape:
        raise ValueError(f"shape mismatch: {m1.shape} vs {m2.shape}")
    n1 = float(np.sum(m1 * m1))
    n2 = float(np.sum(m2 * m2))
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("matrix cosine undefined for an all-zero matrix")
    return float(np.sum(m1 * m2)) / float(np.sqrt(n1 * n2))


def frobenius_norm(m: np.ndarray) -> float:
    """Square root of the sum of squared entries."""
    m = np.asarray(m, dtype=np.float64)
    return float(np.sqrt(np.sum(m * m)))


def precision_at_k(
    m: LinearMap,
    test: TranslationDataset,
    tgt_space: EmbeddingSpace,
    k: int,
    single_reference: bool = False,
) -> float:
    """Percentage of test items with a gold target in the cosine top-k.

    Retrieval ranks the full target vocabulary with the same scores and
    tie-break (ascending vocabulary index) as translate_topk. A hit is any
    gold target in the top-k; single_reference restricts the gold set to
    its first entry.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(test) == 0:
        raise ValueError("test set is empty")
    hits = 0
    for inst in test.instances:
        scores = cosines_to_all(tgt_space, m.apply(inst.source_vector))
        golds = inst.gold_targets[:1] if single_reference else inst.gold_targets
        for gold in golds:
            gi = tgt_space.index(gold)
            gs = scores[gi]
            rank = int(np.count_nonzero(scores > gs))
            rank += int(np.count_nonzero(scores[:gi] == gs))
            if rank < k:
                hits += 1
                break
    return 100.0 * hits / len(test)


def pearson_correlation(xs: list[float], ys: list[float]) -> float:
    """Sample Pearson coefficient; errors on zero variance."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("inputs must be equal-length 1-D sequences")
    if len(xs) < 2:
        raise ValueError("need at least 2 points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined under zero variance")
    return float(np.clip(np.sum(dx * dy) / (sx * sy), -1.0, 1.0))


def spearman_correlation(xs: list[float], ys: list[float]) -> float:
    """Spearman rank correlation (rank-based robustness companion)."""
    rho = float(_scipy_stats.spearmanr(xs, ys).statistic)
    if np.isnan(rho):
        raise ValueError("correlation undefined under zero variance")
    return rho


@dataclass(frozen=True)
class ExperimentRow:
    """One report row: data sizes, anchor similarity, accuracies, map stats."""

    anchor_word: str
    train_size: int
    test_size: int
    anchor_cosine: float
    acc_global: float
    acc_reference: float
    acc_local: float
    delta: float
    map_cosine: float
    map_norm: float


@dataclass
class ExperimentReport:
    """All rows plus correlation summaries and the run configuration."""

    rows: list[ExperimentRow]
    pearson_simvacc: float | None
    spearman_simvacc: float | None
    config: dict
    skipped: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    local_maps: dict[str, LinearMap] = field(default_factory=dict)
    global_map: LinearMap | None = None
    pairwise_map_cosines: list[tuple[str, str, float, float]] | None = None


def _make_trainer(
    trainer: str, config: TrainConfig, lam: float
) -> Callable[[TranslationDataset, EmbeddingSpace, int, str], LinearMap]:
    if trainer in ("max_margin", "maxmargin"):
        def fit(train, tgt_space, seed, anchor):
            return train_max_margin(train, tgt_space, config.with_seed(seed), anchor=anchor)
    elif trainer in ("least_squares", "lsq"):
        def fit(train, tgt_space, seed, anchor):
            return train_least_squares(train, tgt_space, lam=lam, anchor=anchor)
    else:
        raise ValueError(f"unknown trainer: {trainer!r}")
    return fit


def run_experiment(
    anchors: list[str],
    s: float,
    src_space: EmbeddingSpace,
    tgt_space: EmbeddingSpace,
    lexicon: BilingualLexicon,
    train_config: TrainConfig,
    test_sizes: int | list[int],
    seed: int,
    trainer: str = "max_margin",
    lam: float = 0.0,
    eval_k: int = 10,
    min_train: int = 50,
    split_method: str = "random",
    jobs: int = 1,
    single_reference: bool = False,
) -> ExperimentReport:
    """Train per-anchor local maps plus a global map and report diagnostics.

    The first anchor is the reference: every row compares the local map
    against the reference anchor's map on that row's test set. Anchors
    whose paired training data falls below min_train (or cannot be split)
    are skipped with a diagnostic; the reference anchor must be usable.
    The global map trains on the union of all usable train sets with every
    test word excluded. With fewer than two usable rows, or degenerate
    columns, the correlations are omitted with a warning.
    """
    if not anchors:
        raise ValueError("anchors list is empty")
    if len(set(anchors)) != len(anchors):
        raise ValueError("anchor words must be unique")
    if isinstance(test_sizes, int):
        test_sizes = [test_sizes] * len(anchors)
    if len(test_sizes) != len(anchors):
        raise ValueError(f"need one test size per anchor ({len(anchors)}), got {len(test_sizes)}")

    skipped: list[tuple[str, str]] = []
    warnings: list[str] = []
    prepared: dict[str, tuple[TranslationDataset, TranslationDataset]] = {}
    for anchor, test_size in zip(anchors, test_sizes):
        nb = build_neighborhood(src_space, anchor, s)
        try:
            ds = build_dataset(nb, lexicon, src_space, tgt_space)
        except ValueError as exc:
            skipped.append((anchor, str(exc)))
            continue
        if len(ds) <= test_size:
            skipped.append(
                (anchor, f"{len(ds)} usable pairs cannot supply a test split of {test_size}")
            )
            continue
        train, test = split_dataset(ds, test_size, seed=seed, method=split_method)
        if len(train) < min_train:
            skipped.append(
                (anchor, f"train size {len(train)} below floor {min_train}")
            )
            continue
        prepared[anchor] = (train, test)

    reference = anchors[0]
    if reference not in prepared:
        reason = dict(skipped).get(reference, "not prepared")
        raise ValueError(f"reference anchor {reference!r} unusable: {reason}")

    fit = _make_trainer(trainer, train_config, lam)
    usable = [a for a in anchors if a in prepared]

    def train_one(item: tuple[int, str]) -> tuple[str, LinearMap]:
        index, anchor = item
        train, _ = prepared[anchor]
        return anchor, fit(train, tgt_space, spawn_seed(seed, "train", index), anchor)

    jobs = max(1, jobs)
    indexed = [(anchors.index(a), a) for a in usable]
    if jobs == 1:
        trained = dict(train_one(item) for item in indexed)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trained = dict(pool.map(train_one, indexed))

    all_test_words: set[str] = set()
    for anchor in usable:
        all_test_words |= prepared[anchor][1].source_words()
    global_train = union_train_datasets(
        [prepared[a][0] for a in usable], exclude_words=all_test_words
    )
    global_map = fit(global_train, tgt_space, spawn_seed(seed, "train", "global"), "global")

    ref_map = trained[reference]
    ref_vector = src_space.vector(reference)
    rows: list[ExperimentRow] = []
    for anchor in usable:
        train, test = prepared[anchor]
        local = trained[anchor]
        acc_global = precision_at_k(global_map, test, tgt_space, eval_k, single_reference)
        acc_reference = precision_at_k(ref_map, test, tgt_space, eval_k, single_reference)
        if anchor == reference:
            acc_local = acc_reference
        else:
            acc_local = precision_at_k(local, test, tgt_space, eval_k, single_reference)
        rows.append(
            ExperimentRow(
                anchor_word=anchor,
                train_size=len(train),
                test_size=len(test),
                anchor_cosine=cosine_similarity(ref_vector, src_space.vector(anchor)),
                acc_global=acc_global,
                acc_reference=acc_reference,
                acc_local=acc_local,
                delta=acc_local - acc_reference,
                map_cosine=matrix_cosine(ref_map.matrix, local.matrix),
                map_norm=frobenius_norm(local.matrix),
            )
        )

    pearson = spearman = None
    if len(rows) < 2:
        warnings.append("fewer than 2 usable rows; correlation omitted")
    else:
        sims = [row.map_cosine for row in rows]
        accs = [row.acc_reference for row in rows]
        try:
            pearson = pearson_correlation(sims, accs)
            spearman = spearman_correlation(sims, accs)
        except ValueError as exc:
            warnings.append(f"correlation omitted: {exc}")

    config = {
        "anchors": list(anchors),
        "s": s,
        "trainer": trainer,
        "lam": lam,
        "test_sizes": list(test_sizes),
        "seed": seed,
        "eval_k": eval_k,
        "min_train": min_train,
        "split_method": split_method,
        "single_reference": single_reference,
        "train_config": asdict(train_config),
    }
    return ExperimentReport(
        rows=rows,
        pearson_simvacc=pearson,
        spearman_simvacc=spearman,
        config=config,
        skipped=skipped,
        warnings=warnings,
        local_maps=trained,
        global_map=global_map,
    )


def report_to_tsv(report: ExperimentReport) -> str:
    """Fixed ten-column TSV; accuracies to one decimal, trailing correlations."""
    lines = ["\t".join(TSV_COLUMNS)]
    for row in report.rows:
        lines.append(
            "\t".join(
                [
                    row.anchor_word,
                    str(row.train_size),
                    str(row.test_size),
                    f"{row.anchor_cosine:.2f}",
                    f"{row.acc_global:.1f}",
                    f"{row.acc_reference:.1f}",
                    f"{row.acc_local:.1f}",
                    f"{row.delta:.1f}",
                    f"{row.map_cosine:.2f}",
                    f"{row.map_norm:.2f}",
                ]
            )
        )
    pearson = "n/a" if report.pearson_simvacc is None else repr(report.pearson_simvacc)
    spearman = "n/a" if report.spearman_simvacc is None else repr(report.spearman_simvacc)
    lines.append(f"# pearson(map_cosine, acc_reference)\t{pearson}")
    lines.append(f"# spearman(map_cosine, acc_reference)\t{spearman}")
    for anchor, reason in report.skipped:
        lines.append(f"# skipped\t{anchor}\t{reason}")
    return "\n".join(lines) + "\n"


def report_to_records(report: ExperimentReport) -> str:
    """One JSON record per row at full precision, for plotting pipelines."""
    lines = [json.dumps(asdict(row), sort_keys=True) for row in report.rows]
    summary = {
        "pearson_simvacc": report.pearson_simvacc,
        "spearman_simvacc": report.spearman_simvacc,
        "skipped": report.skipped,
        "warnings": report.warnings,
    }
    lines.append(json.dumps({"summary": summary}, sort_keys=True))
    return "\n".join(lines) + "\n"


def report_scatter_tsv(report: ExperimentReport) -> str:
    """Two-column scatter data: map cosine vs reference-map accuracy."""
    lines = ["map_cosine\tacc_reference"]
    for row in report.rows:
        lines.append(f"{row.map_cosine!r}\t{row.acc_reference!r}")
    return "\n".join(lines) + "\n"
