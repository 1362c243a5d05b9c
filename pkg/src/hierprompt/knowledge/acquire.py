"""Acquisition pipeline: questions out, parsed knowledge in.

Positive labels come from the question that generated each sentence (the
category or pair the question was about), not from scanning the answer text;
`augment_name_match=True` additionally adds any category whose name occurs
in the sentence.
"""

from __future__ import annotations

import logging
from pathlib import Path

from ..errors import ConfigError, FormatError, IoError, UnparseableAnswer
from .client import LlmClient
from .parsing import parse_list_answer
from .questions import TEMPLATES, QuestionKind, render_question
from .types import AttributeSet, CategorySet, DescriptionRecord, Kind, SubgroupPartition
from ..encoder.vocab import normalize_text

log = logging.getLogger(__name__)


def _dedup(items: list[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for it in items:
        key = it.lower()
        if key and key not in seen:
            seen.add(key)
            out.append(it)
    return out


def acquire_attributes(client: LlmClient, cats: CategorySet,
                       n1: int, n2: int) -> AttributeSet:
    """Common attributes for the whole set plus per-category ones."""
    if n1 <= 0 or n2 <= 0:
        raise ConfigError("attribute counts must be positive")
    questions = [render_question(TEMPLATES[QuestionKind.COMMON_ATTRIBUTES], {
        "object_lists": ", ".join(cats.names),
        "count": n1,
        "n_words": len(cats),
    })]
    questions += [
        render_question(TEMPLATES[QuestionKind.CATEGORY_ATTRIBUTES],
                        {"count": n2, "object": name})
        for name in cats.names
    ]
    answers = client.ask_many(questions)
    common = _dedup(parse_list_answer(answers[0]))[:n1]
    if len(common) < n1:
        log.warning("asked for %d common attributes, got %d", n1, len(common))
    specific: dict[int, list[str]] = {}
    for cat_id, answer in enumerate(answers[1:]):
        items = _dedup(parse_list_answer(answer))[:n2]
        if len(items) < n2:
            log.warning("asked for %d attributes of %r, got %d",
                        n2, cats.name_of(cat_id), len(items))
        specific[cat_id] = items
    return AttributeSet(common=common, specific=specific)


def filter_attributes(client: LlmClient, cats: CategorySet, cat_id: int,
                      attrs: AttributeSet, keep: int) -> list[str]:
    """Ask for the noisy attributes to be dropped; result is stored in
    `attrs.fine[cat_id]` and is always a subset of the candidates."""
    candidates = attrs.candidates(cat_id)
    if not candidates:
        raise ConfigError(f"no candidate attributes for category {cat_id}")
    question = render_question(TEMPLATES[QuestionKind.FILTER_ATTRIBUTES], {
        "attribute_list": ", ".join(candidates),
        "category": cats.name_of(cat_id),
        "count": keep,
    })
    items = parse_list_answer(client.ask(question))
    by_lower = {c.lower(): c for c in candidates}
    matched = _dedup([by_lower[it.lower()] for it in items
                      if it.lower() in by_lower])
    if len(matched) * 2 < len(items):
        raise UnparseableAnswer(
            f"filter answer overlaps candidates by {len(matched)}/{len(items)}")
    result = matched[:keep]
    attrs.fine[cat_id] = result
    return result


def acquire_descriptions(client: LlmClient, cats: CategorySet, cat_id: int,
                         attributes: list[str], per_attribute_count: int,
                         kind: Kind, augment_name_match: bool = False
                         ) -> list[DescriptionRecord]:
    """One describe-question per attribute; sentences become records labelled
    with the asked-about category."""
    if not attributes:
        raise ConfigError("attributes must be non-empty")
    if kind not in (Kind.COARSE, Kind.FINE):
        raise ConfigError("description kind must be coarse or fine")
    name = cats.name_of(cat_id)
    questions = [
        render_question(TEMPLATES[QuestionKind.DESCRIBE_ATTRIBUTE], {
            "count": per_attribute_count,
            "category": name,
            "attribute": attr,
        }) for attr in attributes
    ]
    answers = client.ask_many(questions)
    records: list[DescriptionRecord] = []
    for attr, answer in zip(attributes, answers):
        for text in parse_list_answer(answer)[:per_attribute_count]:
            positives = {cat_id}
            if augment_name_match:
                positives |= match_categories(text, cats)
            records.append(DescriptionRecord(
                text=text, positives=frozenset(positives), kind=kind,
                provenance=f"{kind.value}:{name}:{attr}"))
    return records


def _parse_groups(answer: str, cats: CategorySet) -> list[set[int]]:
    """Lines of 'label: a, b, c' (or bare comma lists) to id groups.

    Unknown names are dropped with a warning; a name already claimed by an
    earlier group stays there so groups remain disjoint.
    """
    groups: list[set[int]] = []
    claimed: set[int] = set()
    for line in answer.splitlines():
        line = line.strip()
        if not line:
            continue
        members_part = line.split(":", 1)[1] if ":" in line else line
        ids: set[int] = set()
        for token in members_part.split(","):
            token = token.strip()
            if not token:
                continue
            cat_id = cats.id_of(token)
            if cat_id is None:
                log.warning("dropping unknown category %r from grouping answer",
                            token)
                continue
            if cat_id in claimed:
                log.warning("category %r appears in two groups; keeping the "
                            "first", token)
                continue
            ids.add(cat_id)
            claimed.add(cat_id)
        if ids:
            groups.append(ids)
    return groups


def partition_subgroups(client: LlmClient, cats: CategorySet
                        ) -> SubgroupPartition:
    """Two grouping rounds: scene-level groups over all names, then a finer
    split inside every scene group with at least two members."""
    if len(cats) < 2:
        raise ConfigError("need at least two categories to partition")
    coarse_q = render_question(TEMPLATES[QuestionKind.PARTITION_SCENES],
                               {"category_list": ", ".join(cats.names)})
    coarse_groups = _parse_groups(client.ask(coarse_q), cats)

    fine_questions: list[str] = []
    owners: list[int] = []
    for gi, group in enumerate(coarse_groups):
        if len(group) < 2:
            continue
        names = [cats.name_of(i) for i in sorted(group)]
        fine_questions.append(render_question(
            TEMPLATES[QuestionKind.PARTITION_SCENES],
            {"category_list": ", ".join(names)}))
        owners.append(gi)
    fine_groups: list[set[int]] = []
    for gi, answer in zip(owners, client.ask_many(fine_questions)):
        for fg in _parse_groups(answer, cats):
            inside = fg & coarse_groups[gi]
            if inside != fg:
                log.warning("fine group escaped its scene group; clipping")
            if inside:
                fine_groups.append(inside)

    grouped = set().union(*coarse_groups) if coarse_groups else set()
    partition = SubgroupPartition(
        coarse_groups=coarse_groups,
        fine_groups=fine_groups,
        ungrouped=cats.ids() - grouped,
    )
    partition.validate(len(cats))
    return partition


def acquire_relationship_descriptions(client: LlmClient, cats: CategorySet,
                                      partition: SubgroupPartition,
                                      per_pair_count: int,
                                      augment_name_match: bool = False
                                      ) -> list[DescriptionRecord]:
    """Scene sentences for every unordered pair inside each fine group."""
    pairs: list[tuple[int, int]] = []
    for group in partition.fine_groups:
        members = sorted(group)
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                pairs.append((a, b))
    if not pairs:
        return []
    questions = [
        render_question(TEMPLATES[QuestionKind.SCENE_PAIR], {
            "count": per_pair_count,
            "category1": cats.name_of(a),
            "category2": cats.name_of(b),
        }) for a, b in pairs
    ]
    answers = client.ask_many(questions)
    records: list[DescriptionRecord] = []
    for (a, b), answer in zip(pairs, answers):
        for text in parse_list_answer(answer)[:per_pair_count]:
            positives = {a, b}
            if augment_name_match:
                positives |= match_categories(text, cats)
            records.append(DescriptionRecord(
                text=text, positives=frozenset(positives),
                kind=Kind.RELATIONSHIP,
                provenance=f"relationship:{cats.name_of(a)}+{cats.name_of(b)}"))
    return records


def match_categories(text: str, cats: CategorySet,
                     synonyms: dict[str, str] | None = None) -> set[int]:
    """Ids of categories whose name (or synonym) occurs as a whole-word
    phrase in `text`; the final word also matches simple plural forms."""
    words = normalize_text(text)
    found: set[int] = set()
    phrases: list[tuple[list[str], int]] = [
        (normalize_text(name), i) for i, name in enumerate(cats.names)]
    for syn, target in (synonyms or {}).items():
        target_id = cats.id_of(target)
        if target_id is None:
            raise ConfigError(f"synonym target {target!r} is not a category")
        phrases.append((normalize_text(syn), target_id))
    for phrase, cat_id in phrases:
        if not phrase:
            continue
        n = len(phrase)
        for start in range(len(words) - n + 1):
            window = words[start:start + n]
            if window[:-1] == phrase[:-1] and _plural_match(window[-1], phrase[-1]):
                found.add(cat_id)
                break
    return found


def _plural_match(word: str, target: str) -> bool:
    return word == target or word == target + "s" or word == target + "es"


def ingest_captions(path: str | Path, cats: CategorySet,
                    synonyms: dict[str, str] | None = None
                    ) -> list[DescriptionRecord]:
    """Captions from a text file (one per line) or a corpus JSONL; captions
    mentioning no category are skipped."""
    import json

    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IoError(f"cannot read captions file {path}: {e}") from e
    records: list[DescriptionRecord] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if p.suffix == ".jsonl":
            try:
                obj = json.loads(line)
                text = obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise FormatError(f"bad caption record: {e}", line=lineno) from e
        else:
            text = line.strip()
        positives = match_categories(text, cats, synonyms)
        if not positives:
            continue
        records.append(DescriptionRecord(
            text=text, positives=frozenset(positives), kind=Kind.CAPTION,
            provenance=f"{p.name}:{lineno}"))
    return records
