"""Turning free-form LLM answers into clean item lists."""

from __future__ import annotations

import re

from ..errors import EmptyAnswer

# leading enumeration: "1.", "12)", "-", "*", bullets
_ENUM_RE = re.compile(r"^\s*(?:\d+\s*[.)：:]|[-*•‣·])\s*")
_QUOTES = "\"'“”‘’"


def parse_list_answer(answer: str) -> list[str]:
    """Split an answer into items: one per line, enumeration markers,
    surrounding whitespace and quotes stripped, blanks dropped."""
    items: list[str] = []
    for line in answer.splitlines():
        line = _ENUM_RE.sub("", line, count=1)
        line = line.strip().strip(_QUOTES).strip()
        if line:
            items.append(line)
    if not items:
        raise EmptyAnswer("answer contained no items")
    return items
