"""JSONL corpora and JSON knowledge caches.

Corpus lines are UTF-8 with LF endings and a fixed key order, so identical
corpora serialize to identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import FormatError, IoError
from .types import AttributeSet, Corpus, DescriptionRecord, Kind, SubgroupPartition


def save_corpus(records: Corpus, path: str | Path) -> None:
    lines = []
    for rec in records:
        lines.append(json.dumps({
            "text": rec.text,
            "positives": sorted(rec.positives),
            "kind": rec.kind.value,
            "provenance": rec.provenance,
        }, ensure_ascii=False))
    try:
        Path(path).write_text("".join(line + "\n" for line in lines),
                              encoding="utf-8", newline="\n")
    except OSError as e:
        raise IoError(f"cannot write corpus {path}: {e}") from e


def load_corpus(path: str | Path) -> Corpus:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot read corpus {path}: {e}") from e
    records: Corpus = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(DescriptionRecord(
                text=obj["text"],
                positives=frozenset(int(i) for i in obj["positives"]),
                kind=Kind(obj["kind"]),
                provenance=obj.get("provenance", ""),
            ))
        except Exception as e:
            raise FormatError(f"bad corpus record: {e}", line=lineno) from e
    return records


def save_attributes(attrs: AttributeSet, path: str | Path) -> None:
    data = {
        "common": attrs.common,
        "specific": {str(k): v for k, v in sorted(attrs.specific.items())},
        "fine": {str(k): v for k, v in sorted(attrs.fine.items())},
    }
    _write_json(data, path)


def load_attributes(path: str | Path) -> AttributeSet:
    data = _read_json(path)
    try:
        return AttributeSet(
            common=list(data["common"]),
            specific={int(k): list(v) for k, v in data["specific"].items()},
            fine={int(k): list(v) for k, v in data["fine"].items()},
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad attribute cache: {e}") from e


def save_partition(partition: SubgroupPartition, path: str | Path) -> None:
    _write_json(partition.to_dict(), path)


def load_partition(path: str | Path) -> SubgroupPartition:
    data = _read_json(path)
    try:
        return SubgroupPartition.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad partition cache: {e}") from e


def _write_json(data: dict, path: str | Path) -> None:
    try:
        Path(path).write_text(
            json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True)
            + "\n", encoding="utf-8", newline="\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def _read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"not valid JSON: {e}") from e
