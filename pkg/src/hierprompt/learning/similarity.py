"""Cosine similarities between text features and class embedding banks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..encoder.text_encoder import l2_normalize
from ..errors import DegenerateFeature

log = logging.getLogger(__name__)


@dataclass
class ClassEmbeddingBank:
    """Unit-normalized class embeddings, one row per category and branch."""
    global_rows: np.ndarray  # (N, d)
    local_rows: np.ndarray   # (N, d)
    degenerate: list[int]    # category ids whose raw embedding had ~zero norm

    @property
    def n_categories(self) -> int:
        return self.global_rows.shape[0]


def global_similarity(text_global: np.ndarray,
                      bank: ClassEmbeddingBank) -> np.ndarray:
    """Cosine of the sequence-level feature against every class embedding."""
    unit, degenerate = l2_normalize(text_global)
    if degenerate:
        raise DegenerateFeature("text global feature has near-zero norm")
    return bank.global_rows @ unit


def local_similarity(text_tokens: np.ndarray, bank: ClassEmbeddingBank,
                     tau: float = 1.0) -> np.ndarray:
    """Softmax-weighted pooling of per-token cosines, per category.

    Every class attends over the token axis of its own score row; the result
    is a convex combination, so it always lies between the row's min and max.
    """
    if text_tokens.ndim != 2 or text_tokens.shape[0] < 1:
        raise DegenerateFeature("need at least one token feature row")
    rows = []
    for j, row in enumerate(text_tokens):
        unit, degenerate = l2_normalize(row)
        if degenerate:
            # exact zero rows are padding from fixed-width feature files
            level = log.debug if not row.any() else log.warning
            level("excluding degenerate token row %d", j)
            continue
        rows.append(unit)
    if not rows:
        raise DegenerateFeature("all token feature rows are degenerate")
    units = np.stack(rows)                       # (L, d)
    scores = bank.local_rows @ units.T           # (N, L)
    shifted = scores / tau
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    weights = np.exp(shifted)
    weights /= weights.sum(axis=1, keepdims=True)
    return (weights * scores).sum(axis=1)


def similarity_matrix(embeddings: np.ndarray) -> np.ndarray:
    """Pairwise inner products of unit-normalized rows: E @ E.T."""
    return embeddings @ embeddings.T
