from .bank import export_bank, handcraft_bank
from .scoring import InferenceConfig, Prediction, score
from .metrics import (
    MetricsReport,
    average_precision,
    f1_at_k,
    evaluate_features,
    evaluate_corpus,
    corpus_feature_items,
)
from .reports import metrics_table, topk_report, save_metrics

__all__ = [
    "export_bank", "handcraft_bank",
    "InferenceConfig", "Prediction", "score",
    "MetricsReport", "average_precision", "f1_at_k",
    "evaluate_features", "evaluate_corpus", "corpus_feature_items",
    "metrics_table", "topk_report", "save_metrics",
]
