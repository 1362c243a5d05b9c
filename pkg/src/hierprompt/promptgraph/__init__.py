from .layout import TokenComposition, PromptLayout, build_layout
from .store import (
    ParameterStore,
    init_parameters,
    materialize_prompt,
    prompt_token_ids,
    save_checkpoint,
    load_checkpoint,
    partition_hash,
)
from .handcraft import HandcraftPromptMap, render_handcraft

__all__ = [
    "TokenComposition", "PromptLayout", "build_layout",
    "ParameterStore", "init_parameters", "materialize_prompt",
    "prompt_token_ids", "save_checkpoint", "load_checkpoint", "partition_hash",
    "HandcraftPromptMap", "render_handcraft",
]
