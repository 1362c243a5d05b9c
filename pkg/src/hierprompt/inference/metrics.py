"""Ranking metrics: per-class average precision and micro F1 at top-k."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..encoder.text_encoder import FrozenTextEncoder
from ..errors import EmptyEvalSet, NoPositives
from ..knowledge.types import Corpus
from ..learning.similarity import ClassEmbeddingBank
from .scoring import InferenceConfig, rank_categories, score

log = logging.getLogger(__name__)


@dataclass
class MetricsReport:
    map: float
    f1_top3: float
    per_class_ap: list[float | None]  # None for classes with no positives
    counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "mAP": self.map,
            "F1_top3": self.f1_top3,
            "per_class_ap": self.per_class_ap,
            "counts": self.counts,
        }


def average_precision(scores: np.ndarray, labels: np.ndarray) -> float:
    """AP of one class over items; ties broken by ascending item index."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if not labels.any():
        raise NoPositives("class has no positive items")
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    hits = labels[order]
    cum_hits = np.cumsum(hits)
    ranks = np.nonzero(hits)[0]
    precisions = [cum_hits[r] / (r + 1) for r in ranks]
    return sum(precisions) / int(labels.sum())


def f1_at_k(all_scores: np.ndarray, all_labels: np.ndarray,
            k: int = 3) -> float:
    """Micro F1 where every item predicts its k best categories."""
    all_scores = np.asarray(all_scores, dtype=np.float64)
    all_labels = np.asarray(all_labels, dtype=bool)
    n_items = all_scores.shape[0]
    tp = 0
    for i in range(n_items):
        topk = rank_categories(all_scores[i])[:k]
        tp += int(all_labels[i, topk].sum())
    total_pos = int(all_labels.sum())
    precision = tp / (n_items * k)
    recall = tp / total_pos if total_pos else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def evaluate_features(items: list[tuple[np.ndarray, np.ndarray]],
                      labels: list[set[int]] | list[frozenset[int]],
                      bank: ClassEmbeddingBank,
                      icfg: InferenceConfig) -> MetricsReport:
    """Score every (global, dense) item and aggregate ranking metrics.

    Classes with no positive item are excluded from the mAP mean (their AP
    is undefined) and reported as null.
    """
    if not items:
        raise EmptyEvalSet("no items to evaluate")
    if len(items) != len(labels):
        raise EmptyEvalSet("items and labels are misaligned")
    n = bank.n_categories
    fused = np.stack([
        score(g, dense, bank, icfg).fused for g, dense in items])
    label_matrix = np.zeros((len(items), n), dtype=bool)
    for i, pos in enumerate(labels):
        label_matrix[i, sorted(pos)] = True

    per_class: list[float | None] = []
    evaluated = []
    for c in range(n):
        try:
            ap = average_precision(fused[:, c], label_matrix[:, c])
        except NoPositives:
            log.warning("class %d has no positives; excluded from mAP", c)
            per_class.append(None)
            continue
        per_class.append(float(ap))
        evaluated.append(ap)
    if not evaluated:
        raise EmptyEvalSet("no class has a positive item")
    return MetricsReport(
        map=float(sum(evaluated) / len(evaluated)),
        f1_top3=float(f1_at_k(fused, label_matrix, k=3)),
        per_class_ap=per_class,
        counts={
            "items": len(items),
            "classes": n,
            "classes_evaluated": len(evaluated),
        },
    )


def corpus_feature_items(corpus: Corpus, encoder: FrozenTextEncoder
                         ) -> tuple[list[tuple[np.ndarray, np.ndarray]],
                                    list[frozenset[int]]]:
    """Text items as (global, dense) pairs: dense rows are per-token features.

    Features are quantized through float32 so the corpus path and the
    feature-file path are bit-identical.
    """
    items = []
    labels = []
    for rec in corpus:
        enc = encoder.encode_text(rec.text)
        items.append((
            enc.global_feature.astype(np.float32).astype(np.float64),
            enc.tokens.astype(np.float32).astype(np.float64),
        ))
        labels.append(rec.positives)
    return items, labels


def evaluate_corpus(corpus: Corpus, encoder: FrozenTextEncoder,
                    bank: ClassEmbeddingBank,
                    icfg: InferenceConfig) -> MetricsReport:
    if not corpus:
        raise EmptyEvalSet("evaluation corpus is empty")
    items, labels = corpus_feature_items(corpus, encoder)
    return evaluate_features(items, labels, bank, icfg)


def export_corpus_features(corpus: Corpus, encoder: FrozenTextEncoder,
                           path) -> None:
    """Write the corpus's features as a feature file.

    Dense blocks are padded to the longest item with all-zero rows; the
    scorer drops zero rows as degenerate, so padding never changes scores.
    """
    from ..encoder.features import write_features

    items, _ = corpus_feature_items(corpus, encoder)
    lmax = max(dense.shape[0] for _, dense in items)
    padded = []
    for g, dense in items:
        block = np.zeros((lmax, dense.shape[1]))
        block[:dense.shape[0]] = dense
        padded.append((g, block))
    write_features(path, padded)
