"""Training objectives: pairwise hinge ranking plus a KL order anchor."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ..errors import ConfigError, EmptyPositives


@dataclass(frozen=True)
class LossConfig:
    margin: float = 1.0
    lambda1: float = 0.2
    tau_order: float = 1.0

    def __post_init__(self):
        if self.margin <= 0:
            raise ConfigError("margin must be positive")
        if self.lambda1 < 0:
            raise ConfigError("lambda1 must be non-negative")
        if self.tau_order <= 0:
            raise ConfigError("tau_order must be positive")


def ranking_loss(scores: np.ndarray, positives: Iterable[int],
                 negatives: Iterable[int] | None = None,
                 margin: float = 1.0) -> float:
    """Sum of hinge violations over all (positive, negative) pairs.

    `negatives` defaults to the complement of `positives`.
    """
    scores = np.asarray(scores, dtype=np.float64)
    pos = sorted(set(positives))
    if not pos:
        raise EmptyPositives("ranking loss needs at least one positive")
    if negatives is None:
        neg = sorted(set(range(scores.shape[0])) - set(pos))
    else:
        neg = sorted(set(negatives))
        if set(pos) & set(neg):
            raise ConfigError("positives and negatives overlap")
    if not neg:
        return 0.0
    diffs = margin - scores[pos][:, None] + scores[neg][None, :]
    return float(np.maximum(diffs, 0.0).sum())


def row_softmax(matrix: np.ndarray, tau: float) -> np.ndarray:
    z = matrix / tau
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def order_loss(d_learned: np.ndarray, d_handcraft: np.ndarray,
               tau_order: float = 1.0) -> float:
    """Mean row-wise KL(learned || handcraft) after row softmax.

    The handcraft side is the fixed anchor: gradients (in the training
    graph) flow only through the learned matrix.
    """
    if d_learned.shape != d_handcraft.shape:
        raise ConfigError("similarity matrices must have equal shapes")
    p = row_softmax(np.asarray(d_learned, dtype=np.float64), tau_order)
    q = row_softmax(np.asarray(d_handcraft, dtype=np.float64), tau_order)
    kl_rows = (p * (np.log(p) - np.log(q))).sum(axis=1)
    return float(kl_rows.mean())


def total_loss(rank: float, order: float, lambda1: float) -> float:
    return float(rank + lambda1 * order)
