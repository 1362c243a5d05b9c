"""Core data shapes for acquired category knowledge."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, IoError


class Kind(str, enum.Enum):
    COARSE = "coarse"
    FINE = "fine"
    RELATIONSHIP = "relationship"
    CAPTION = "caption"


class CategorySet:
    """Ordered category labels; the position of a name is its id everywhere."""

    def __init__(self, names: list[str]):
        if not names:
            raise ConfigError("category set must be non-empty")
        cleaned = [n.strip() for n in names]
        if any(not n for n in cleaned):
            raise ConfigError("category names must be non-empty")
        lowered = [n.lower() for n in cleaned]
        if len(set(lowered)) != len(lowered):
            raise ConfigError("category names must be unique (case-insensitive)")
        self.names = cleaned
        self._ids = {n: i for i, n in enumerate(lowered)}

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other) -> bool:
        return isinstance(other, CategorySet) and self.names == other.names

    def name_of(self, cat_id: int) -> str:
        if not 0 <= cat_id < len(self.names):
            raise ConfigError(f"category id {cat_id} out of range")
        return self.names[cat_id]

    def id_of(self, name: str) -> int | None:
        return self._ids.get(name.strip().lower())

    def ids(self) -> set[int]:
        return set(range(len(self.names)))


def load_categories(path: str | Path) -> CategorySet:
    """One name per line; blank lines and '#' comments skipped."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"cannot read categories file {path}: {e}") from e
    names = [ln.strip() for ln in lines
             if ln.strip() and not ln.strip().startswith("#")]
    return CategorySet(names)


@dataclass
class AttributeSet:
    common: list[str] = field(default_factory=list)
    specific: dict[int, list[str]] = field(default_factory=dict)
    fine: dict[int, list[str]] = field(default_factory=dict)

    def candidates(self, cat_id: int) -> list[str]:
        """Common plus category-specific attributes, case-insensitively deduped."""
        seen: set[str] = set()
        out: list[str] = []
        for a in [*self.common, *self.specific.get(cat_id, [])]:
            key = a.lower()
            if key not in seen:
                seen.add(key)
                out.append(a)
        return out


@dataclass
class SubgroupPartition:
    coarse_groups: list[set[int]] = field(default_factory=list)
    fine_groups: list[set[int]] = field(default_factory=list)
    ungrouped: set[int] = field(default_factory=set)

    def validate(self, n_categories: int) -> None:
        all_ids = set(range(n_categories))
        for level_name, groups in (("coarse", self.coarse_groups),
                                   ("fine", self.fine_groups)):
            seen: set[int] = set()
            for g in groups:
                if not g:
                    raise ConfigError(f"empty {level_name} group")
                if g & seen:
                    raise ConfigError(f"{level_name} groups are not disjoint")
                if not g <= all_ids:
                    raise ConfigError(f"{level_name} group contains unknown ids")
                seen |= g
        for fg in self.fine_groups:
            owners = [cg for cg in self.coarse_groups if fg <= cg]
            if len(owners) != 1:
                raise ConfigError(
                    f"fine group {sorted(fg)} is not nested in exactly one "
                    f"coarse group")
        grouped = set().union(*self.coarse_groups) if self.coarse_groups else set()
        if grouped | self.ungrouped != all_ids or grouped & self.ungrouped:
            raise ConfigError("coarse groups plus ungrouped must partition all ids")

    def to_dict(self) -> dict:
        return {
            "coarse_groups": [sorted(g) for g in self.coarse_groups],
            "fine_groups": [sorted(g) for g in self.fine_groups],
            "ungrouped": sorted(self.ungrouped),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubgroupPartition":
        return cls(
            coarse_groups=[set(g) for g in data["coarse_groups"]],
            fine_groups=[set(g) for g in data["fine_groups"]],
            ungrouped=set(data["ungrouped"]),
        )


@dataclass(frozen=True)
class DescriptionRecord:
    text: str
    positives: frozenset[int]
    kind: Kind
    provenance: str = ""

    def __post_init__(self):
        if not self.text:
            raise ConfigError("description text must be non-empty")
        if not self.positives:
            raise ConfigError("description must have at least one positive")
        if self.kind == Kind.RELATIONSHIP and len(self.positives) < 2:
            raise ConfigError("relationship descriptions need >= 2 positives")


Corpus = list[DescriptionRecord]
