"""Fused global/local scoring of one input against a class bank."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..learning.similarity import (ClassEmbeddingBank, global_similarity,
                                   local_similarity)


@dataclass(frozen=True)
class InferenceConfig:
    lambda2: float = 0.65
    tau: float = 0.01
    top_k: int = 3

    def __post_init__(self):
        if not 0.0 <= self.lambda2 <= 1.0:
            raise ConfigError("lambda2 must lie in [0, 1]")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")


@dataclass
class Prediction:
    fused: np.ndarray                 # (N,)
    topk: list[tuple[int, float]]     # descending score, ties by ascending id


def rank_categories(scores: np.ndarray) -> np.ndarray:
    """All category ids, best first; ties broken by ascending id."""
    return np.lexsort((np.arange(scores.shape[0]), -scores))


def score(global_feat: np.ndarray, dense_feat: np.ndarray,
          bank: ClassEmbeddingBank, icfg: InferenceConfig) -> Prediction:
    """lambda2-weighted blend of the whole-input and dense-region scores.

    The dense branch pools per-region cosines with a sharp softmax
    (temperature `tau`), approximating the best-matching region.
    """
    s_global = global_similarity(global_feat, bank)
    s_local = local_similarity(np.asarray(dense_feat, dtype=np.float64),
                               bank, tau=icfg.tau)
    fused = icfg.lambda2 * s_global + (1.0 - icfg.lambda2) * s_local
    order = rank_categories(fused)[:icfg.top_k]
    return Prediction(fused=fused,
                      topk=[(int(i), float(fused[i])) for i in order])
