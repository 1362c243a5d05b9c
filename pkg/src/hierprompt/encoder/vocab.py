"""Whitespace/punctuation tokenizer with a corpus-derived vocabulary.

Ids 0..2 are reserved (PAD, UNK, EOS).  The vocabulary is rebuilt
deterministically from a corpus: tokens sorted by descending frequency,
ties broken lexicographically.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from pathlib import Path
from typing import Iterable

from ..errors import EmptyText, FormatError

PAD_ID = 0
UNK_ID = 1
EOS_ID = 2

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
EOS_TOKEN = "<eos>"

_WORD_RE = re.compile(r"[a-z0-9]+")


def normalize_text(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation; keeps alphanumeric runs."""
    return _WORD_RE.findall(text.lower())


class Vocabulary:
    def __init__(self, tokens: Iterable[str]):
        """`tokens` are the non-reserved tokens in id order (id 3 onward)."""
        self._tokens = [PAD_TOKEN, UNK_TOKEN, EOS_TOKEN, *tokens]
        self._ids: dict[str, int] = {}
        for i, tok in enumerate(self._tokens):
            if i >= 3:
                if tok in self._ids:
                    raise ValueError(f"duplicate vocabulary token: {tok!r}")
                self._ids[tok] = i

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def id_of(self, token: str) -> int:
        return self._ids.get(token, UNK_ID)

    def token_of(self, idx: int) -> str:
        return self._tokens[idx]

    def word_ids(self, text: str) -> list[int]:
        """Token ids for the words of `text`, without EOS."""
        words = normalize_text(text)
        if not words:
            raise EmptyText(f"no tokens after normalization: {text!r}")
        return [self.id_of(w) for w in words]

    def save(self, path: str | Path) -> None:
        data = json.dumps(self._tokens, ensure_ascii=False)
        Path(path).write_text(data + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        try:
            tokens = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise FormatError(f"vocabulary file is not valid JSON: {e}") from e
        if (not isinstance(tokens, list)
                or tokens[:3] != [PAD_TOKEN, UNK_TOKEN, EOS_TOKEN]):
            raise FormatError("vocabulary file must be a JSON array starting "
                              "with the reserved tokens")
        return cls(tokens[3:])


def build_vocabulary(texts: Iterable[str]) -> Vocabulary:
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(normalize_text(text))
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(tok for tok, _ in ordered)
