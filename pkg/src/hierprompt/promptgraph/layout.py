"""Token-slot layouts: which prompt positions are tied across categories.

The M columns are banded [shared | group-level #1 | group-level #2 |
category-specific].  A slot holds a parameter id; two slots holding the same
id always materialize (and train) as one vector.  Categories outside any
group get fresh ids in the group bands, so they behave as category-specific
there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import CompositionMismatch, ConfigError
from ..knowledge.types import SubgroupPartition


@dataclass(frozen=True)
class TokenComposition:
    n_shared: int = 16
    n_group1: int = 8
    n_group2: int = 4
    n_specific: int = 4

    def __post_init__(self):
        if min(self.n_shared, self.n_group1, self.n_group2, self.n_specific) < 0:
            raise ConfigError("token counts must be non-negative")

    @property
    def total(self) -> int:
        return self.n_shared + self.n_group1 + self.n_group2 + self.n_specific

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_shared, self.n_group1, self.n_group2, self.n_specific)


@dataclass
class PromptLayout:
    slot_matrix: np.ndarray            # (N, M) parameter ids
    composition: TokenComposition
    branch: str                        # "global" | "local"
    n_params: int

    @property
    def n_categories(self) -> int:
        return self.slot_matrix.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.slot_matrix.shape[1]

    def tied_slots(self, cat_a: int, cat_b: int) -> np.ndarray:
        """Column indices where the two categories share a parameter."""
        return np.nonzero(self.slot_matrix[cat_a] == self.slot_matrix[cat_b])[0]


def build_layout(partition: SubgroupPartition, comp: TokenComposition,
                 n_categories: int, branch: str = "global",
                 m_tokens: int | None = None) -> PromptLayout:
    """Assign parameter ids column-major, group-index order.

    Ids are dense 0..n_params-1 and never straddle two columns.  Global and
    local branches use structurally identical layouts; the branches keep
    separate parameter stores, so their parameters are independent.
    """
    if branch not in ("global", "local"):
        raise ConfigError(f"unknown branch {branch!r}")
    if m_tokens is not None and comp.total != m_tokens:
        raise CompositionMismatch(
            f"composition sums to {comp.total}, expected {m_tokens}")
    partition.validate(n_categories)
    m = comp.total
    slots = np.full((n_categories, m), -1, dtype=np.int64)
    next_id = 0

    def fresh() -> int:
        nonlocal next_id
        next_id += 1
        return next_id - 1

    col = 0
    for _ in range(comp.n_shared):
        shared_id = fresh()
        slots[:, col] = shared_id
        col += 1
    for groups, count in ((partition.coarse_groups, comp.n_group1),
                          (partition.fine_groups, comp.n_group2)):
        grouped = sorted(set().union(*groups)) if groups else []
        grouped_set = set(grouped)
        for _ in range(count):
            for g in groups:
                gid = fresh()
                slots[sorted(g), col] = gid
            for cat in range(n_categories):
                if cat not in grouped_set:
                    slots[cat, col] = fresh()
            col += 1
    for _ in range(comp.n_specific):
        for cat in range(n_categories):
            slots[cat, col] = fresh()
        col += 1

    assert col == m and (slots >= 0).all()
    return PromptLayout(slot_matrix=slots, composition=comp, branch=branch,
                        n_params=next_id)
