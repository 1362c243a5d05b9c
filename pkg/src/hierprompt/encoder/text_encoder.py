"""Frozen, differentiable text encoder producing global and per-token features.

The encoder is a single channel-mixing layer with a residual connection,
applied position-wise, plus sinusoidal position vectors:

    u_t   = input_t + pos_t
    h_t   = u_t                    (non-terminal positions)
    h_eos = u_eos + mean(u_0..u_{L-2})
    row_t = W2 tanh(W1 h_t + b1) + h_t

The terminal (EOS) position pools the mean of all preceding inputs, so its
row summarizes the whole sequence; that row is the global feature.  All
other rows stay position-local, which is what the per-token (dense) branch
wants.  Weights are generated once from a seed and never trained; gradients
flow only into continuous inputs supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .. import autodiff as ad
from ..errors import ConfigError, NonFiniteValue, SequenceTooLong
from .vocab import EOS_ID, Vocabulary


@dataclass(frozen=True)
class EncoderConfig:
    dim: int = 64
    seed: int = 0
    hidden_dim: int | None = None  # defaults to 2*dim
    context_limit: int = 77
    positional_scale: float = 0.5

    def __post_init__(self):
        if self.dim <= 0:
            raise ConfigError("encoder dim must be positive")
        if self.context_limit <= 1:
            raise ConfigError("context_limit must exceed 1")

    @property
    def hidden(self) -> int:
        return self.hidden_dim if self.hidden_dim is not None else 2 * self.dim


@dataclass(frozen=True)
class TokenId:
    id: int


@dataclass(frozen=True)
class ContinuousToken:
    vector: np.ndarray
    param_id: int


PromptElement = Union[TokenId, ContinuousToken]


@dataclass
class PromptSequence:
    elements: list[PromptElement] = field(default_factory=list)

    def validate(self, dim: int, context_limit: int) -> None:
        if not self.elements:
            raise ConfigError("empty prompt sequence")
        last = self.elements[-1]
        if not (isinstance(last, TokenId) and last.id == EOS_ID):
            raise ConfigError("prompt sequence must end with EOS")
        if len(self.elements) > context_limit:
            raise SequenceTooLong(
                f"sequence length {len(self.elements)} exceeds context limit "
                f"{context_limit}")
        for el in self.elements:
            if isinstance(el, ContinuousToken) and el.vector.shape != (dim,):
                raise ConfigError(
                    f"continuous token has shape {el.vector.shape}, "
                    f"expected ({dim},)")

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class EncodedText:
    global_feature: np.ndarray  # (d,) row at the EOS position
    tokens: np.ndarray          # (n_r, d) one row per input position
    n_r: int


def l2_normalize(v: np.ndarray, eps: float = 1e-12) -> tuple[np.ndarray, bool]:
    """Unit-normalize `v`; degenerate (near-zero) vectors pass through.

    Returns (vector, degenerate).
    """
    v = np.asarray(v, dtype=np.float64)
    norm = float(np.linalg.norm(v))
    if norm <= eps:
        return v, True
    return v / norm, False


def sinusoidal_positions(n: int, dim: int, scale: float) -> np.ndarray:
    """Classic interleaved sin/cos position table, scaled."""
    pos = np.arange(n, dtype=np.float64)[:, None]
    i = np.arange(dim, dtype=np.float64)[None, :]
    angles = pos / np.power(10000.0, 2.0 * (i // 2) / dim)
    table = np.where(i % 2 == 0, np.sin(angles), np.cos(angles))
    return scale * table


def tokenize(text: str, vocab: Vocabulary, context_limit: int = 77) -> list[int]:
    """Lowercased word ids, OOV mapped to UNK, truncated, EOS appended."""
    ids = vocab.word_ids(text)
    ids = ids[: context_limit - 1]
    return ids + [EOS_ID]


class FrozenTextEncoder:
    """Immutable once constructed; safe to share across threads."""

    def __init__(self, cfg: EncoderConfig, vocab: Vocabulary):
        self.cfg = cfg
        self.vocab = vocab
        d, h = cfg.dim, cfg.hidden
        rng = np.random.Generator(np.random.PCG64(cfg.seed))
        # Draw order is part of the determinism contract.
        self.embeddings = rng.normal(0.0, 1.0, size=(len(vocab), d))
        self.w1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(h, d))
        self.b1 = rng.normal(0.0, 0.1, size=(h,))
        self.w2 = rng.normal(0.0, 1.0 / np.sqrt(h), size=(d, h))
        self.positions = sinusoidal_positions(cfg.context_limit, d,
                                              cfg.positional_scale)
        for arr in (self.embeddings, self.w1, self.b1, self.w2):
            arr.setflags(write=False)
        self.positions.setflags(write=False)

    # -- tokenization --------------------------------------------------------

    def tokenize(self, text: str) -> list[int]:
        return tokenize(text, self.vocab, self.cfg.context_limit)

    # -- encoding ------------------------------------------------------------

    def encode_rows(self, x: ad.Tensor | np.ndarray) -> tuple[ad.Tensor, ad.Tensor]:
        """Differentiable core: raw input rows (L, d) -> (tokens, global).

        `x` holds per-position inputs before position vectors are added.
        """
        x = ad.as_tensor(x)
        n = x.shape[0]
        if n > self.cfg.context_limit:
            raise SequenceTooLong(
                f"sequence length {n} exceeds context limit "
                f"{self.cfg.context_limit}")
        u = x + ad.Tensor(self.positions[:n])
        if n > 1:
            ctx = u[np.arange(n - 1)].mean(axis=0)
            pooled = u[np.array([n - 1])] + ctx.reshape(1, -1)
            h = ad.concat_rows([u[np.arange(n - 1)], pooled])
        else:
            h = u
        pre = h @ ad.Tensor(self.w1.T) + ad.Tensor(self.b1)
        y = pre.tanh() @ ad.Tensor(self.w2.T) + h
        return y, y[n - 1]

    def encode(self, seq: PromptSequence | Sequence[int]) -> EncodedText:
        """Encode token ids or a mixed prompt sequence (no gradients kept)."""
        x = self.input_rows(seq)
        tokens, global_row = self.encode_rows(x)
        out = EncodedText(global_feature=global_row.value,
                          tokens=tokens.value, n_r=tokens.shape[0])
        if not (np.all(np.isfinite(out.tokens))
                and np.all(np.isfinite(out.global_feature))):
            raise NonFiniteValue("encoder produced non-finite features")
        return out

    def input_rows(self, seq: PromptSequence | Sequence[int]) -> np.ndarray:
        """Assemble the (L, d) raw input matrix for `seq`."""
        if isinstance(seq, PromptSequence):
            seq.validate(self.cfg.dim, self.cfg.context_limit)
            rows = [self.embeddings[el.id] if isinstance(el, TokenId)
                    else np.asarray(el.vector, dtype=np.float64)
                    for el in seq.elements]
            return np.stack(rows)
        ids = list(seq)
        if not ids:
            raise ConfigError("empty token sequence")
        if ids[-1] != EOS_ID:
            raise ConfigError("token sequence must end with EOS")
        if len(ids) > self.cfg.context_limit:
            raise SequenceTooLong(
                f"sequence length {len(ids)} exceeds context limit "
                f"{self.cfg.context_limit}")
        return self.embeddings[np.asarray(ids, dtype=np.intp)]

    def encode_text(self, text: str) -> EncodedText:
        return self.encode(self.tokenize(text))
