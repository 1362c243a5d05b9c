"""Deterministic stand-in for the live language model.

The mock sees only the rendered question text, recognizes which question
family produced it, and composes an answer from built-in word pools.  Given
the same (question, seed) it returns byte-identical answers, which makes the
whole acquisition pipeline reproducible offline.

A small two-level scene lexicon drives the grouping answers and provides
scene words for generated sentences, so e.g. knife/oven land in a kitchen
group while sofa/book land in a living-room group.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from ..errors import ClientError
from .questions import TEMPLATES, QuestionKind

# scene -> subscene -> member nouns
SCENE_LEXICON: dict[str, dict[str, list[str]]] = {
    "kitchen": {
        "cutlery": ["knife", "spoon", "fork"],
        "cookware": ["oven", "pan", "kettle", "pot"],
    },
    "living room": {
        "seating": ["sofa", "armchair", "cushion"],
        "media": ["book", "television", "shelf"],
    },
    "park": {
        "animals": ["dog", "cat", "bird", "squirrel"],
        "plants": ["tree", "flower", "bush"],
    },
    "street": {
        "vehicles": ["car", "bus", "bicycle", "truck"],
        "fixtures": ["lamppost", "bench", "sign"],
    },
    "office": {
        "equipment": ["computer", "printer", "keyboard", "monitor"],
        "furniture": ["desk", "chair", "cabinet"],
    },
    "farm": {
        "livestock": ["horse", "cow", "sheep", "goat"],
        "machinery": ["tractor", "plough"],
    },
}

_WORD_SCENES: dict[str, tuple[str, str]] = {}
for _scene, _subs in SCENE_LEXICON.items():
    for _sub, _words in _subs.items():
        for _w in _words:
            _WORD_SCENES[_w] = (_scene, _sub)

COMMON_ATTRIBUTE_POOL = [
    "color", "shape", "size", "texture", "material", "weight", "pattern",
    "finish", "outline", "tone", "surface", "style", "length", "width",
    "height", "density", "sheen", "grain", "firmness", "balance", "symmetry",
    "contour", "edge", "curvature", "gloss", "opacity", "profile", "build",
    "posture", "condition", "age", "origin", "function", "charm", "rarity",
    "motion", "sound", "scent", "temperature", "hue",
]

SPECIFIC_ATTRIBUTE_POOL = COMMON_ATTRIBUTE_POOL + [
    "handle", "rim", "coating", "frame", "base", "tip", "core", "cover",
    "seam", "joint", "hinge", "strap", "panel", "vent", "tread", "blade",
    "bristle", "spine", "petal", "bark", "feather", "whisker", "hoof", "mane",
]

_ADJECTIVES = [
    "smooth", "bright", "rough", "subtle", "bold", "faded", "vivid", "plain",
    "delicate", "heavy", "light", "warm", "cool", "crisp",
]

_DESCRIBE_TEMPLATES = [
    "the {category} shows a {adj} {attribute} up close",
    "a {adj} {category} with striking {attribute} rests in the {scene}",
    "you can tell a {category} by the {adj} {attribute} it carries",
    "this {category} in the {scene} has a notably {adj} {attribute}",
    "the {attribute} of the {category} looks {adj} in soft light",
    "a photo of a {category} highlights its {adj} {attribute}",
    "people notice the {adj} {attribute} of a {category} first",
    "near the {subscene} corner a {category} displays a {adj} {attribute}",
    "one {category} with a {adj} {attribute} stands in the {scene}",
    "its {attribute} makes the {category} look {adj} from afar",
    "a close view of the {category} reveals the {adj} {attribute}",
    "the {scene} light gives the {category} a {adj} {attribute}",
]

_PAIR_TEMPLATES = [
    "a {adj} {a} sits beside a {b} in the {scene}",
    "the {scene} holds both a {a} and a {adj} {b}",
    "near the {a} a {adj} {b} completes the {scene}",
    "a {adj} {a} and a {b} share the same {scene}",
    "someone placed the {a} next to the {adj} {b} in the {scene}",
    "the {a} and the {b} often appear together in a {adj} {scene}",
    "in this {scene} a {adj} {b} leans against a {a}",
    "a busy {scene} frames a {a} and a {adj} {b}",
    "both the {adj} {a} and the {b} belong to the {subscene} part of the {scene}",
    "the picture of the {scene} includes a {a} and a {adj} {b}",
]


def _question_regex(kind: QuestionKind) -> re.Pattern:
    pattern = TEMPLATES[kind].pattern
    out = []
    pos = 0
    for m in re.finditer(r"\[([a-z0-9_]+)\]", pattern):
        out.append(re.escape(pattern[pos:m.start()]))
        out.append(f"(?P<{m.group(1)}>.+?)")
        pos = m.end()
    out.append(re.escape(pattern[pos:]))
    return re.compile("^" + "".join(out) + "$", re.DOTALL)


_MATCHERS = {kind: _question_regex(kind) for kind in QuestionKind}


def _scene_of(word: str) -> tuple[str, str]:
    return _WORD_SCENES.get(word.strip().lower(), ("scene", "corner"))


def _numbered(items: list[str]) -> str:
    return "\n".join(f"{i + 1}. {item}" for i, item in enumerate(items))


class MockLlmClient:
    """Answers rendered questions deterministically per (question, seed)."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    # The live client exposes the same two methods.
    def ask(self, question: str) -> str:
        for kind, rx in _MATCHERS.items():
            m = rx.match(question)
            if m:
                return self._answer(kind, m.groupdict(), self._rng(question))
        raise ClientError(f"mock has no handler for question: {question!r}")

    def ask_many(self, questions: list[str]) -> list[str]:
        return [self.ask(q) for q in questions]

    # -- generation ----------------------------------------------------------

    def _rng(self, question: str) -> np.random.Generator:
        digest = hashlib.sha256(question.encode("utf-8")).digest()
        qhash = int.from_bytes(digest[:8], "little")
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([self.seed, qhash])))

    def _answer(self, kind: QuestionKind, slots: dict[str, str],
                rng: np.random.Generator) -> str:
        if kind == QuestionKind.COMMON_ATTRIBUTES:
            return self._pick_attributes(rng, COMMON_ATTRIBUTE_POOL,
                                         _int(slots["count"]))
        if kind == QuestionKind.CATEGORY_ATTRIBUTES:
            return self._pick_attributes(rng, SPECIFIC_ATTRIBUTE_POOL,
                                         _int(slots["count"]))
        if kind == QuestionKind.DESCRIBE_ATTRIBUTE:
            return self._describe(rng, slots["category"], slots["attribute"],
                                  _int(slots["count"]))
        if kind == QuestionKind.FILTER_ATTRIBUTES:
            return self._filter(rng, slots["attribute_list"],
                                _int(slots["count"]))
        if kind == QuestionKind.PARTITION_SCENES:
            return self._partition(slots["category_list"])
        if kind == QuestionKind.SCENE_PAIR:
            return self._pair(rng, slots["category1"], slots["category2"],
                              _int(slots["count"]))
        raise ClientError(f"unhandled question kind {kind}")

    @staticmethod
    def _pick_attributes(rng: np.random.Generator, pool: list[str],
                         count: int) -> str:
        take = min(count, len(pool))
        idx = rng.permutation(len(pool))[:take]
        return _numbered([pool[i] for i in idx])

    @staticmethod
    def _describe(rng: np.random.Generator, category: str, attribute: str,
                  count: int) -> str:
        scene, subscene = _scene_of(category)
        seen: set[str] = set()
        out: list[str] = []
        attempts = 0
        while len(out) < count and attempts < 30 * count:
            attempts += 1
            tpl = _DESCRIBE_TEMPLATES[rng.integers(len(_DESCRIBE_TEMPLATES))]
            adj = _ADJECTIVES[rng.integers(len(_ADJECTIVES))]
            sent = tpl.format(category=category, attribute=attribute,
                              scene=scene, subscene=subscene, adj=adj)
            if sent not in seen:
                seen.add(sent)
                out.append(sent)
        return _numbered(out)

    @staticmethod
    def _filter(rng: np.random.Generator, attribute_list: str,
                keep: int) -> str:
        candidates = [a.strip() for a in attribute_list.split(",") if a.strip()]
        take = min(keep, len(candidates))
        idx = sorted(rng.permutation(len(candidates))[:take])
        return _numbered([candidates[i] for i in idx])

    @staticmethod
    def _partition(category_list: str) -> str:
        words = [w.strip() for w in category_list.split(",") if w.strip()]
        known = [w for w in words if w.lower() in _WORD_SCENES]
        if not known:
            return "none of these share a scene"
        scenes = {_WORD_SCENES[w.lower()][0] for w in known}
        level = 1 if len(scenes) == 1 else 0  # one scene -> split by subscene
        groups: dict[str, list[str]] = {}
        for w in known:
            label = _WORD_SCENES[w.lower()][level]
            groups.setdefault(label, []).append(w)
        return "\n".join(f"{label}: {', '.join(members)}"
                         for label, members in groups.items())

    @staticmethod
    def _pair(rng: np.random.Generator, cat1: str, cat2: str,
              count: int) -> str:
        scene1, sub1 = _scene_of(cat1)
        scene2, _ = _scene_of(cat2)
        scene = scene1 if scene1 == scene2 or scene2 == "scene" else scene1
        seen: set[str] = set()
        out: list[str] = []
        attempts = 0
        while len(out) < count and attempts < 30 * count:
            attempts += 1
            tpl = _PAIR_TEMPLATES[rng.integers(len(_PAIR_TEMPLATES))]
            adj = _ADJECTIVES[rng.integers(len(_ADJECTIVES))]
            sent = tpl.format(a=cat1, b=cat2, scene=scene, subscene=sub1,
                              adj=adj)
            if sent not in seen:
                seen.add(sent)
                out.append(sent)
        return _numbered(out)


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as e:
        raise ClientError(f"count slot is not an integer: {text!r}") from e
