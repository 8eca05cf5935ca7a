"""Linear translation maps and their trainers.

Two trainers are provided. The ranking trainer minimizes a max-margin hinge
over squared Euclidean distances with per-epoch random negatives via
per-instance SGD. The baseline solves the squared-Frobenius ridge problem
in closed form. Both return a LinearMap carrying full provenance so
experiment reports can be audited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .embeddings import EmbeddingSpace
from .lexicon import TranslationDataset
from .seeds import spawn_rng

_INITS = ("identity", "zeros", "scaled-random")


@dataclass(frozen=True)
class LinearMap:
    """A d_tgt x d_src matrix mapping source vectors into the target space."""

    matrix: np.ndarray
    trainer: str = "unspecified"
    anchor: str = "global"
    hyperparams: dict = field(default_factory=dict, compare=False)
    train_size: int = 0
    final_loss: float | None = None
    loss_history: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("map matrix must be 2-D")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("map matrix contains non-finite entries")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @property
    def d_tgt(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def d_src(self) -> int:
        return int(self.matrix.shape[1])

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d_src,):
            raise ValueError(f"vector dimension {x.shape} != map d_src {self.d_src}")
        return self.matrix @ x


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for the max-margin trainer."""

    gamma: float = 0.4
    negatives: int = 1
    epochs: int = 50
    learning_rate: float = 0.1
    lr_decay: float = 0.99
    seed: int = 0
    init: str = "identity"
    ortho_weight: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.negatives < 1:
            raise ValueError(f"negatives must be >= 1, got {self.negatives}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 < self.lr_decay <= 1:
            raise ValueError(f"lr_decay must be in (0, 1], got {self.lr_decay}")
        if self.init not in _INITS:
            raise ValueError(f"init must be one of {_INITS}, got {self.init!r}")
        if self.ortho_weight < 0:
            raise ValueError(f"ortho_weight must be >= 0, got {self.ortho_weight}")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)


def squared_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Squared Euclidean norm of u - v."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    diff = u - v
    return float(diff @ diff)


def _as_matrix(m: LinearMap | np.ndarray) -> np.ndarray:
    return m.matrix if isinstance(m, LinearMap) else np.asarray(m, dtype=np.float64)


def hinge_loss(
    m: LinearMap | np.ndarray,
    x: np.ndarray,
    y_pos: np.ndarray,
    y_neg: np.ndarray,
    gamma: float,
) -> float:
    """max(0, gamma + d(y_pos, Wx) - d(y_neg, Wx)) for one ranking triple."""
    W = _as_matrix(m)
    wx = W @ x
    return max(0.0, gamma + squared_distance(y_pos, wx) - squared_distance(y_neg, wx))


def hinge_gradient(
    m: LinearMap | np.ndarray,
    x: np.ndarray,
    y_pos: np.ndarray,
    y_neg: np.ndarray,
    gamma: float,
) -> np.ndarray:
    """Gradient of hinge_loss w.r.t. W; zero matrix where the hinge is inactive.

    On the active branch the quadratic terms in W cancel, leaving the
    W-independent rank-one gradient 2 (y_neg - y_pos) x^T.
    """
    W = _as_matrix(m)
    if hinge_loss(W, x, y_pos, y_neg, gamma) > 0.0:
        return 2.0 * np.outer(np.asarray(y_neg) - np.asarray(y_pos), x)
    return np.zeros_like(W)


def _init_matrix(config: TrainConfig, d_tgt: int, d_src: int) -> np.ndarray:
    init = config.init
    if init == "identity" and d_tgt != d_src:
        init = "scaled-random"  # identity undefined for rectangular maps
    if init == "identity":
        return np.eye(d_tgt)
    if init == "zeros":
        return np.zeros((d_tgt, d_src))
    rng = spawn_rng(config.seed, "init")
    bound = 1.0 / math.sqrt(d_src)
    return rng.uniform(-bound, bound, size=(d_tgt, d_src))


def train_max_margin(
    train: TranslationDataset,
    tgt_space: EmbeddingSpace,
    config: TrainConfig,
    anchor: str = "global",
) -> LinearMap:
    """Fit a map by per-instance SGD on the max-margin ranking loss.

    Each epoch shuffles the instances and, per instance, samples
    config.negatives targets uniformly from the gold vectors of the other
    instances; a single-instance dataset falls back to sampling negatives
    from the target vocabulary instead. Multi-valued gold sets contribute
    their first target as the positive. All randomness derives from
    config.seed, so the loss trajectory and final matrix are reproducible
    bit for bit.
    """
    m = len(train)
    if m == 0:
        raise ValueError("training set is empty")
    X = train.source_matrix()
    Y = np.vstack([tgt_space.vector(inst.gold_targets[0]) for inst in train.instances])
    d_src = X.shape[1]
    d_tgt = tgt_space.dim

    W = _init_matrix(config, d_tgt, d_src)
    eye = np.eye(d_tgt)

    vocab_fallback: np.ndarray | None = None
    if m == 1:
        gold = set(train.instances[0].gold_targets)
        allowed = [i for i, w in enumerate(tgt_space.words) if w not in gold]
        if not allowed:
            raise ValueError("cannot sample negatives: target vocabulary has no non-gold word")
        vocab_fallback = np.array(allowed)

    lr = config.learning_rate
    loss_history: list[float] = []
    # overflow en route is expected to surface as the per-epoch finiteness abort
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.epochs):
            order = spawn_rng(config.seed, "shuffle", epoch).permutation(m)
            neg_rng = spawn_rng(config.seed, "negatives", epoch)
            epoch_loss = 0.0
            for i in order:
                x = X[i]
                y_pos = Y[i]
                wx = W @ x
                d_pos = squared_distance(y_pos, wx)
                push = None
                for _ in range(config.negatives):
                    if vocab_fallback is not None:
                        y_neg = tgt_space.vectors[vocab_fallback[neg_rng.integers(len(vocab_fallback))]]
                    else:
                        j = int(neg_rng.integers(m - 1))
                        if j >= i:
                            j += 1
                        y_neg = Y[j]
                    violation = config.gamma + d_pos - squared_distance(y_neg, wx)
                    if violation > 0.0:
                        epoch_loss += violation
                        push = (y_neg - y_pos) if push is None else push + (y_neg - y_pos)
                if push is not None:
                    W -= lr * 2.0 * np.outer(push, x)
            avg_loss = epoch_loss / m
            if config.ortho_weight > 0.0:
                # full-batch penalty step once per epoch; per-instance application
                # would cost O(d^3) per sample for no extra accuracy
                residual = W @ W.T - eye
                avg_loss += config.ortho_weight * float(np.sum(residual * residual))
                W -= lr * config.ortho_weight * 4.0 * (residual @ W)
            if not np.isfinite(avg_loss) or not np.all(np.isfinite(W)):
                raise ArithmeticError(
                    f"non-finite training state at epoch {epoch} (loss={avg_loss}); "
                    "reduce learning_rate or check input scaling"
                )
            loss_history.append(avg_loss)
            lr *= config.lr_decay

    hyper = {
        "gamma": config.gamma,
        "negatives": config.negatives,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "lr_decay": config.lr_decay,
        "seed": config.seed,
        "init": config.init,
        "ortho_weight": config.ortho_weight,
    }
    return LinearMap(
        W,
        trainer="max_margin",
        anchor=anchor,
        hyperparams=hyper,
        train_size=m,
        final_loss=loss_history[-1],
        loss_history=tuple(loss_history),
    )


def train_least_squares(
    train: TranslationDataset,
    tgt_space: EmbeddingSpace,
    lam: float = 0.0,
    anchor: str = "global",
) -> LinearMap:
    """Closed-form ridge solution M = Y X^T (X X^T + lam I)^-1.

    Columns of X and Y are the paired source and (first) gold target
    vectors. lam = 0 is allowed when X X^T is invertible; a singular normal
    matrix raises with advice to use a positive lam.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    X = train.source_matrix().T
    Y = np.vstack([tgt_space.vector(inst.gold_targets[0]) for inst in train.instances]).T
    d_src = X.shape[0]

    normal = X @ X.T + lam * np.eye(d_src)
    try:
        np.linalg.cholesky(normal)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "X X^T is singular; pass a positive lam to regularize"
        ) from None
    W = np.linalg.solve(normal, X @ Y.T).T

    residual = W @ X - Y
    loss = float(np.sum(residual * residual) + lam * np.sum(W * W))
    return LinearMap(
        W,
        trainer="least_squares",
        anchor=anchor,
        hyperparams={"lam": lam},
        train_size=len(train),
        final_loss=loss,
    )


def orthogonality_penalty(m: LinearMap | np.ndarray) -> float:
    """Frobenius norm of M M^T - I; zero exactly for orthogonal matrices."""
    M = _as_matrix(m)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"orthogonality penalty requires a square matrix, got {M.shape}")
    residual = M @ M.T - np.eye(M.shape[0])
    return float(np.linalg.norm(residual))


def save_map(m: LinearMap, path: str | Path) -> None:
    """Serialize a map as text: header 'd_tgt d_src', '#' provenance, rows.

    Entries are written with shortest round-trip float repr, so load_map
    restores them exactly.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{m.d_tgt} {m.d_src}\n")
        fh.write(f"# trainer={m.trainer}\n")
        fh.write(f"# anchor={m.anchor}\n")
        fh.write(f"# train_size={m.train_size}\n")
        if m.final_loss is not None:
            fh.write(f"# final_loss={m.final_loss!r}\n")
        for key, value in sorted(m.hyperparams.items()):
            fh.write(f"# {key}={value!r}\n")
        for row in m.matrix:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_map(path: str | Path) -> LinearMap:
    """Read a map written by save_map."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"map file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"bad map header in {path}")
        d_tgt, d_src = int(header[0]), int(header[1])
        meta: dict[str, str] = {}
        rows: list[list[float]] = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value
                continue
            rows.append([float(v) for v in line.split()])
    matrix = np.array(rows, dtype=np.float64)
    if matrix.shape != (d_tgt, d_src):
        raise ValueError(f"map body shape {matrix.shape} != header ({d_tgt}, {d_src})")

    trainer = meta.pop("trainer", "unspecified")
    anchor = meta.pop("anchor", "global")
    train_size = int(meta.pop("train_size", "0"))
    final_loss_raw = meta.pop("final_loss", None)
    final_loss = float(final_loss_raw) if final_loss_raw is not None else None
    return LinearMap(
        matrix,
        trainer=trainer,
        anchor=anchor,
        hyperparams=meta,
        train_size=train_size,
        final_loss=final_loss,
    )
