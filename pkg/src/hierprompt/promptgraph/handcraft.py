"""Fixed natural-language prompts: the zero-shot baseline and the anchor
that keeps learned inter-category structure from drifting."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError, UnknownCategory
from ..knowledge.types import CategorySet

DEFAULT_TEMPLATE = "a photo of a [category]"


@dataclass
class HandcraftPromptMap:
    default_template: str = DEFAULT_TEMPLATE
    overrides: dict[str, str] = field(default_factory=dict)
    # overrides are keyed by lowercase category name; the template (or a
    # full replacement sentence) must mention the slot or the name itself.

    def template_for(self, category: str) -> str:
        return self.overrides.get(category.lower(), self.default_template)


def render_handcraft(prompt_map: HandcraftPromptMap, category: str,
                     cats: CategorySet | None = None) -> str:
    if cats is not None and cats.id_of(category) is None:
        raise UnknownCategory(f"{category!r} is not a known category")
    rendered = prompt_map.template_for(category).replace("[category]", category)
    if category.lower() not in rendered.lower():
        raise ConfigError(
            f"handcraft prompt for {category!r} does not mention the name: "
            f"{rendered!r}")
    return rendered
