"""Export class embedding banks from trained prompts (or handcraft text)."""

from __future__ import annotations

import logging

import numpy as np

from ..encoder.text_encoder import FrozenTextEncoder, l2_normalize
from ..knowledge.types import CategorySet
from ..learning.similarity import ClassEmbeddingBank
from ..learning.train import BRANCHES, PromptModel
from ..promptgraph.handcraft import HandcraftPromptMap, render_handcraft

log = logging.getLogger(__name__)


def export_bank(model: PromptModel) -> ClassEmbeddingBank:
    """Encode every category's prompt per branch; rows are unit-normalized."""
    rows: dict[str, list[np.ndarray]] = {b: [] for b in BRANCHES}
    degenerate: list[int] = []
    for branch in BRANCHES:
        layout = model.layouts[branch]
        table = model.stores[branch].table
        for cat in range(len(model.cats)):
            x = np.concatenate([
                table[layout.slot_matrix[cat]],
                model.name_rows[cat],
            ])
            _, eos_row = model.encoder.encode_rows(x)
            unit, deg = l2_normalize(eos_row.value)
            if deg:
                log.warning("degenerate %s embedding for category %d",
                            branch, cat)
                if cat not in degenerate:
                    degenerate.append(cat)
            rows[branch].append(unit)
    return ClassEmbeddingBank(
        global_rows=np.stack(rows["global"]),
        local_rows=np.stack(rows["local"]),
        degenerate=degenerate,
    )


def handcraft_bank(encoder: FrozenTextEncoder, cats: CategorySet,
                   prompt_map: HandcraftPromptMap | None = None
                   ) -> ClassEmbeddingBank:
    """Zero-shot bank: the handcraft sentence embedding serves both branches."""
    prompt_map = prompt_map or HandcraftPromptMap()
    rows = []
    degenerate = []
    for cat, name in enumerate(cats.names):
        feat = encoder.encode_text(render_handcraft(prompt_map, name))
        unit, deg = l2_normalize(feat.global_feature)
        if deg:
            log.warning("degenerate handcraft embedding for %r", name)
            degenerate.append(cat)
        rows.append(unit)
    stacked = np.stack(rows)
    return ClassEmbeddingBank(global_rows=stacked, local_rows=stacked.copy(),
                              degenerate=degenerate)
