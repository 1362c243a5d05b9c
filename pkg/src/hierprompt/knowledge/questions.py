"""The question families posed to the language model.

Each template is a plain string with [slot] markers.  Rendering substitutes
every marker and fails loudly on a missing slot; a rendered question never
contains residual markers.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Mapping

from ..errors import MissingSlot

_SLOT_RE = re.compile(r"\[([a-z0-9_]+)\]")


class QuestionKind(str, enum.Enum):
    COMMON_ATTRIBUTES = "common_attributes"
    CATEGORY_ATTRIBUTES = "category_attributes"
    DESCRIBE_ATTRIBUTE = "describe_attribute"
    FILTER_ATTRIBUTES = "filter_attributes"
    PARTITION_SCENES = "partition_scenes"
    SCENE_PAIR = "scene_pair"


@dataclass(frozen=True)
class QuestionTemplate:
    id: QuestionKind
    pattern: str

    @property
    def slots(self) -> list[str]:
        return _SLOT_RE.findall(self.pattern)


TEMPLATES: dict[QuestionKind, QuestionTemplate] = {
    QuestionKind.COMMON_ATTRIBUTES: QuestionTemplate(
        QuestionKind.COMMON_ATTRIBUTES,
        "[object_lists], please summarize [count] attributes that may be "
        "common to the above [n_words] words",
    ),
    QuestionKind.CATEGORY_ATTRIBUTES: QuestionTemplate(
        QuestionKind.CATEGORY_ATTRIBUTES,
        "please summarize [count] attributes of [object]",
    ),
    QuestionKind.DESCRIBE_ATTRIBUTE: QuestionTemplate(
        QuestionKind.DESCRIBE_ATTRIBUTE,
        "please help me generate [count] different sentences about "
        "[category] from the angle of the [attribute]",
    ),
    QuestionKind.FILTER_ATTRIBUTES: QuestionTemplate(
        QuestionKind.FILTER_ATTRIBUTES,
        "[attribute_list], please delete the above attribute words given "
        "that are not very relevant to [category]. Finally, [count] "
        "attribute words remain",
    ),
    QuestionKind.PARTITION_SCENES: QuestionTemplate(
        QuestionKind.PARTITION_SCENES,
        "[category_list], categorize the above words according to possible "
        "common occurrences in a scene",
    ),
    QuestionKind.SCENE_PAIR: QuestionTemplate(
        QuestionKind.SCENE_PAIR,
        "generate [count] different descriptive sentences for a scene "
        "containing [category1] and [category2]",
    ),
}


def render_question(template: QuestionTemplate,
                    slots: Mapping[str, object]) -> str:
    def fill(m: re.Match) -> str:
        name = m.group(1)
        if name not in slots:
            raise MissingSlot(name)
        return str(slots[name])

    return _SLOT_RE.sub(fill, template.pattern)
