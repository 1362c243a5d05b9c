from .similarity import (
    ClassEmbeddingBank,
    global_similarity,
    local_similarity,
    similarity_matrix,
)
from .losses import LossConfig, ranking_loss, order_loss, total_loss
from .train import (
    TrainConfig,
    FitResult,
    PromptModel,
    RecordFeatures,
    BRANCHES,
    batch_loss_graph,
    featurize,
    lr_at,
    compute_gradients,
    fit,
)
from .gradcheck import GradcheckReport, gradient_check

__all__ = [
    "ClassEmbeddingBank", "global_similarity", "local_similarity",
    "similarity_matrix",
    "LossConfig", "ranking_loss", "order_loss", "total_loss",
    "TrainConfig", "FitResult", "PromptModel", "RecordFeatures", "BRANCHES",
    "batch_loss_graph", "featurize", "lr_at", "compute_gradients", "fit",
    "GradcheckReport", "gradient_check",
]
