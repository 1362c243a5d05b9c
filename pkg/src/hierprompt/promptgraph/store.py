"""Learnable prompt vectors and their checkpoint format.

One table row per parameter id; materializing a category's prompt gathers
its row per slot, so tied slots are one storage row by construction.
Checkpoints are a length-prefixed JSON header followed by the float32
parameter payload (global table, then local table).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..encoder.text_encoder import (ContinuousToken, FrozenTextEncoder,
                                    PromptSequence, TokenId)
from ..encoder.vocab import EOS_ID, Vocabulary
from ..errors import ConfigError, FormatError, IoError, UnknownCategory
from ..knowledge.types import CategorySet, SubgroupPartition
from .layout import PromptLayout, TokenComposition


@dataclass
class ParameterStore:
    table: np.ndarray  # (n_params, d) float64

    @property
    def n_params(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    @classmethod
    def allocate(cls, n_params: int, dim: int) -> "ParameterStore":
        return cls(table=np.zeros((n_params, dim), dtype=np.float64))

    def copy(self) -> "ParameterStore":
        return ParameterStore(table=self.table.copy())


def init_parameters(store: ParameterStore, seed: int,
                    sigma: float = 0.02) -> None:
    rng = np.random.Generator(np.random.PCG64(seed))
    store.table[:] = rng.normal(0.0, sigma, size=store.table.shape)


def prompt_token_ids(name: str, vocab: Vocabulary) -> list[int]:
    """Token ids of the category name followed by EOS."""
    return vocab.word_ids(name) + [EOS_ID]


def materialize_prompt(layout: PromptLayout, store: ParameterStore,
                       category_id: int, cats: CategorySet,
                       vocab: Vocabulary) -> PromptSequence:
    """M continuous tokens (tagged with their parameter ids) + name + EOS."""
    if not 0 <= category_id < layout.n_categories:
        raise UnknownCategory(f"category id {category_id} out of range")
    elements = [
        ContinuousToken(vector=store.table[pid], param_id=int(pid))
        for pid in layout.slot_matrix[category_id]
    ]
    elements += [TokenId(t) for t in
                 prompt_token_ids(cats.name_of(category_id), vocab)]
    return PromptSequence(elements=elements)


def partition_hash(partition: SubgroupPartition) -> str:
    blob = json.dumps(partition.to_dict(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(path: str | Path, *, stores: dict[str, ParameterStore],
                    layouts: dict[str, PromptLayout],
                    partition: SubgroupPartition, dim: int,
                    seeds: dict[str, int]) -> None:
    comp = layouts["global"].composition
    header = {
        "n_categories": layouts["global"].n_categories,
        "m_tokens": comp.total,
        "dim": dim,
        "composition": list(comp.as_tuple()),
        "branch_seeds": {k: int(v) for k, v in sorted(seeds.items())},
        "partition_hash": partition_hash(partition),
        "param_counts": {k: stores[k].n_params for k in sorted(stores)},
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [struct.pack("<I", len(head)), head]
    for branch in sorted(stores):
        chunks.append(stores[branch].table.astype("<f4").tobytes())
    try:
        Path(path).write_bytes(b"".join(chunks))
    except OSError as e:
        raise IoError(f"cannot write checkpoint {path}: {e}") from e


def load_checkpoint(path: str | Path, partition: SubgroupPartition
                    ) -> tuple[dict[str, ParameterStore], dict, TokenComposition]:
    """Rebuild branch stores; layouts are reconstructed by the caller from
    (partition, composition), which is why the partition must match."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read checkpoint {path}: {e}") from e
    if len(blob) < 4:
        raise FormatError("truncated checkpoint", offset=len(blob))
    (head_len,) = struct.unpack_from("<I", blob, 0)
    try:
        header = json.loads(blob[4:4 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"bad checkpoint header: {e}", offset=4) from e
    if header.get("partition_hash") != partition_hash(partition):
        raise ConfigError(
            "checkpoint was trained against a different partition")
    dim = int(header["dim"])
    comp = TokenComposition(*header["composition"])
    offset = 4 + head_len
    stores: dict[str, ParameterStore] = {}
    for branch in sorted(header["param_counts"]):
        n = int(header["param_counts"][branch])
        nbytes = 4 * n * dim
        if offset + nbytes > len(blob):
            raise FormatError("checkpoint payload shorter than header claims",
                              offset=offset)
        table = (np.frombuffer(blob, dtype="<f4", count=n * dim, offset=offset)
                 .reshape(n, dim).astype(np.float64))
        stores[branch] = ParameterStore(table=table)
        offset += nbytes
    if offset != len(blob):
        raise FormatError("trailing bytes after checkpoint payload",
                          offset=offset)
    return stores, header, comp
