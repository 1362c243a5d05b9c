from .vocab import Vocabulary, build_vocabulary, normalize_text, PAD_ID, UNK_ID, EOS_ID
from .text_encoder import (
    EncoderConfig,
    EncodedText,
    FrozenTextEncoder,
    PromptSequence,
    TokenId,
    ContinuousToken,
    l2_normalize,
)
from .features import write_features, read_features, FEATURE_MAGIC

__all__ = [
    "Vocabulary", "build_vocabulary", "normalize_text",
    "PAD_ID", "UNK_ID", "EOS_ID",
    "EncoderConfig", "EncodedText", "FrozenTextEncoder",
    "PromptSequence", "TokenId", "ContinuousToken", "l2_normalize",
    "write_features", "read_features", "FEATURE_MAGIC",
]
