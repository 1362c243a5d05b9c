"""Prompt optimization: batched loss graph, gradients, and the training loop.

Only the prompt parameter tables receive gradients.  Description features
are constants (they contain no learnable inputs), so they are encoded once
up front; the class banks are re-encoded from the current parameters at
every step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..encoder.text_encoder import EncoderConfig, FrozenTextEncoder, l2_normalize
from ..encoder.vocab import Vocabulary, build_vocabulary
from ..errors import ConfigError, DegenerateFeature, EmptyCorpus, NonFiniteLoss
from ..knowledge.types import CategorySet, Corpus, SubgroupPartition
from ..promptgraph.handcraft import HandcraftPromptMap, render_handcraft
from ..promptgraph.layout import PromptLayout, TokenComposition, build_layout
from ..promptgraph.store import ParameterStore, init_parameters, prompt_token_ids
from .losses import LossConfig, row_softmax

log = logging.getLogger(__name__)

BRANCHES = ("global", "local")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.002
    milestones: tuple[int, ...] = (2, 5)
    gamma: float = 0.1
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    optimizer: str = "sgd_momentum"
    momentum: float = 0.9
    sigma_init: float = 0.02

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ConfigError("epochs and batch_size must be positive")
        if list(self.milestones) != sorted(set(self.milestones)):
            raise ConfigError("milestones must be strictly increasing")
        if self.optimizer not in ("sgd", "sgd_momentum"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.milestones and max(self.milestones) >= self.epochs:
            log.warning("milestones %s extend past the last epoch (%d); the "
                        "late decays never fire", self.milestones, self.epochs)


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """Step schedule: base lr decayed by gamma at every passed milestone."""
    if not 0 <= epoch < cfg.epochs:
        raise ConfigError(f"epoch {epoch} outside [0, {cfg.epochs})")
    decays = sum(1 for m in cfg.milestones if m <= epoch)
    return cfg.lr * cfg.gamma ** decays


@dataclass
class RecordFeatures:
    """Frozen-encoder features of one description, ready for scoring."""
    global_unit: np.ndarray   # (d,)
    token_units: np.ndarray   # (L, d) unit rows, degenerate rows dropped
    positives: np.ndarray     # sorted positive category ids


class PromptModel:
    """Hierarchical prompts for both branches against one frozen encoder."""

    def __init__(self, cats: CategorySet, partition: SubgroupPartition,
                 comp: TokenComposition, encoder: FrozenTextEncoder,
                 handcraft: HandcraftPromptMap | None = None,
                 seed: int = 0, sigma_init: float = 0.02):
        self.cats = cats
        self.partition = partition
        self.encoder = encoder
        self.handcraft = handcraft or HandcraftPromptMap()
        self.layouts: dict[str, PromptLayout] = {
            b: build_layout(partition, comp, len(cats), branch=b)
            for b in BRANCHES
        }
        self.branch_seeds = {"global": 2 * seed + 1, "local": 2 * seed + 2}
        self.stores: dict[str, ParameterStore] = {}
        for b in BRANCHES:
            store = ParameterStore.allocate(self.layouts[b].n_params,
                                            encoder.cfg.dim)
            init_parameters(store, self.branch_seeds[b], sigma_init)
            self.stores[b] = store
        # name + EOS input rows are fixed; cache them per category
        self.name_rows = [
            encoder.embeddings[np.asarray(
                prompt_token_ids(name, encoder.vocab), dtype=np.intp)]
            for name in cats.names
        ]

    # -- differentiable bank -------------------------------------------------

    def bank_tensors(self, store_tensors: dict[str, ad.Tensor]
                     ) -> dict[str, ad.Tensor]:
        """Encode every category prompt; returns unit-row (N, d) per branch."""
        banks: dict[str, ad.Tensor] = {}
        for branch in BRANCHES:
            layout = self.layouts[branch]
            rows = []
            for cat in range(len(self.cats)):
                x = ad.concat_rows([
                    ad.gather(store_tensors[branch],
                              layout.slot_matrix[cat]),
                    ad.Tensor(self.name_rows[cat]),
                ])
                _, eos_row = self.encoder.encode_rows(x)
                rows.append(eos_row.reshape(1, -1))
            banks[branch] = ad.normalize_rows(ad.concat_rows(rows))
        return banks

    def handcraft_anchor(self, tau_order: float) -> np.ndarray:
        """Row-softmaxed similarity matrix of the handcraft prompt embeddings."""
        rows = []
        for name in self.cats.names:
            text = render_handcraft(self.handcraft, name)
            feat = self.encoder.encode_text(text).global_feature
            unit, degenerate = l2_normalize(feat)
            if degenerate:
                raise DegenerateFeature(
                    f"handcraft prompt for {name!r} encodes to zero")
            rows.append(unit)
        d_hand = np.stack(rows) @ np.stack(rows).T
        return row_softmax(d_hand, tau_order)


def featurize(corpus: Corpus, encoder: FrozenTextEncoder
              ) -> list[RecordFeatures]:
    out = []
    for rec in corpus:
        enc = encoder.encode_text(rec.text)
        unit, degenerate = l2_normalize(enc.global_feature)
        if degenerate:
            raise DegenerateFeature(f"global feature of {rec.text!r} is zero")
        token_units = []
        for row in enc.tokens:
            u, deg = l2_normalize(row)
            if deg:
                log.warning("dropping degenerate token row in %r", rec.text)
                continue
            token_units.append(u)
        out.append(RecordFeatures(
            global_unit=unit,
            token_units=np.stack(token_units),
            positives=np.asarray(sorted(rec.positives), dtype=np.intp),
        ))
    return out


@dataclass
class BatchLoss:
    total: ad.Tensor
    rank_mean: float
    order_value: float
    hinge_gaps: float | None = None  # min |margin - S_i + S_j| over active pairs


def batch_loss_graph(model: PromptModel, batch: list[RecordFeatures],
                     store_tensors: dict[str, ad.Tensor],
                     loss_cfg: LossConfig,
                     anchor: np.ndarray | None,
                     include_rank: bool = True,
                     collect_hinge_gaps: bool = False) -> BatchLoss:
    """Mean per-record ranking loss over both branches, plus the order term."""
    n = len(model.cats)
    b = len(batch)
    banks = model.bank_tensors(store_tensors)

    rank_mean = 0.0
    hinge_gaps: float | None = None
    total: ad.Tensor | None = None
    if include_rank or collect_hinge_gaps:
        # global scores: (B, N)
        tg = np.stack([r.global_unit for r in batch])
        s_global = ad.Tensor(tg) @ banks["global"].T

        # local scores: softmax-weighted pooling over padded token rows
        lmax = max(r.token_units.shape[0] for r in batch)
        d = tg.shape[1]
        tl = np.zeros((b, lmax, d))
        tl_mask = np.zeros((b, lmax, 1))
        for i, r in enumerate(batch):
            li = r.token_units.shape[0]
            tl[i, :li] = r.token_units
            tl_mask[i, :li, 0] = 1.0
        s_tokens = ad.Tensor(tl) @ banks["local"].T          # (B, Lmax, N)
        weights = ad.softmax(s_tokens, axis=1, mask=tl_mask)
        s_local = (weights * s_tokens).sum(axis=1)           # (B, N)

        # hinge over every (positive, negative) pair of each record
        pair_mask = np.zeros((b, n, n))
        for i, r in enumerate(batch):
            pos = np.zeros(n, dtype=bool)
            pos[r.positives] = True
            pair_mask[i] = np.outer(pos, ~pos)
        rank_terms = []
        gaps = []
        for scores in (s_global, s_local):
            diffs = (loss_cfg.margin - scores.reshape(b, n, 1)
                     + scores.reshape(b, 1, n))
            if collect_hinge_gaps:
                active = np.abs(diffs.value[pair_mask > 0])
                if active.size:
                    gaps.append(active.min())
            rank_terms.append((diffs.relu() * ad.Tensor(pair_mask)).sum())
        if collect_hinge_gaps:
            hinge_gaps = float(min(gaps)) if gaps else None
        if include_rank:
            total = (rank_terms[0] + rank_terms[1]) * (1.0 / b)
            rank_mean = float(total.value)

    order_value = 0.0
    if loss_cfg.lambda1 > 0 and anchor is not None:
        log_anchor = ad.Tensor(np.log(anchor))
        order_terms = []
        for branch in BRANCHES:
            d_learned = banks[branch] @ banks[branch].T
            p = ad.softmax(d_learned * (1.0 / loss_cfg.tau_order), axis=-1)
            kl = (p * (p.log() - log_anchor)).sum(axis=-1).mean()
            order_terms.append(kl)
        order = order_terms[0] + order_terms[1]
        order_value = float(order.value)
        scaled = loss_cfg.lambda1 * order
        total = scaled if total is None else total + scaled
    if total is None:
        total = ad.Tensor(0.0)
    return BatchLoss(total=total, rank_mean=rank_mean,
                     order_value=order_value, hinge_gaps=hinge_gaps)


def compute_gradients(model: PromptModel, batch: list[RecordFeatures],
                      loss_cfg: LossConfig, anchor: np.ndarray | None
                      ) -> tuple[dict[str, np.ndarray], BatchLoss]:
    """d(batch loss)/d(parameter row) for every id of both branches.

    Tied rows accumulate contributions from every category and position that
    uses them; encoder weights and the anchor receive no gradient.
    """
    if not batch:
        raise EmptyCorpus("gradient computation needs a non-empty batch")
    store_tensors = {b: ad.parameter(model.stores[b].table) for b in BRANCHES}
    out = batch_loss_graph(model, batch, store_tensors, loss_cfg, anchor)
    if not np.isfinite(out.total.value):
        raise NonFiniteLoss(
            f"non-finite batch loss (rank={out.rank_mean}, "
            f"order={out.order_value}); first record positives="
            f"{batch[0].positives.tolist()}")
    out.total.backward()
    grads = {
        b: (store_tensors[b].grad if store_tensors[b].grad is not None
            else np.zeros_like(model.stores[b].table))
        for b in BRANCHES
    }
    return grads, out


@dataclass
class FitResult:
    model: PromptModel
    log_rows: list[dict] = field(default_factory=list)

    @property
    def stores(self) -> dict[str, ParameterStore]:
        return self.model.stores


def fit(corpus: Corpus, partition: SubgroupPartition, cats: CategorySet, *,
        encoder_cfg: EncoderConfig = EncoderConfig(),
        comp: TokenComposition = TokenComposition(),
        loss_cfg: LossConfig = LossConfig(),
        train_cfg: TrainConfig = TrainConfig(),
        handcraft: HandcraftPromptMap | None = None,
        encoder: FrozenTextEncoder | None = None,
        extra_vocab_texts: list[str] | None = None) -> FitResult:
    """Run the full schedule; only prompt parameters move.

    The vocabulary is built from the corpus plus category names and the
    handcraft prompts (so the anchor never collapses to UNK tokens).
    """
    if not corpus:
        raise EmptyCorpus("training corpus is empty")
    handcraft = handcraft or HandcraftPromptMap()
    if encoder is None:
        texts = [rec.text for rec in corpus]
        texts += list(cats.names)
        texts += [render_handcraft(handcraft, n) for n in cats.names]
        texts += extra_vocab_texts or []
        vocab = build_vocabulary(texts)
        encoder = FrozenTextEncoder(encoder_cfg, vocab)
    model = PromptModel(cats, partition, comp, encoder, handcraft,
                        seed=train_cfg.seed, sigma_init=train_cfg.sigma_init)
    anchor = (model.handcraft_anchor(loss_cfg.tau_order)
              if loss_cfg.lambda1 > 0 else None)
    features = featurize(corpus, encoder)

    rng = np.random.Generator(np.random.PCG64(train_cfg.seed))
    velocity = {b: np.zeros_like(model.stores[b].table) for b in BRANCHES}
    log_rows: list[dict] = []
    for epoch in range(train_cfg.epochs):
        lr = lr_at(epoch, train_cfg)
        order_idx = rng.permutation(len(features))
        rank_losses: list[float] = []
        order_losses: list[float] = []
        totals: list[float] = []
        for start in range(0, len(features), train_cfg.batch_size):
            batch = [features[i] for i in
                     order_idx[start:start + train_cfg.batch_size]]
            grads, losses = compute_gradients(model, batch, loss_cfg, anchor)
            for b in BRANCHES:
                if train_cfg.optimizer == "sgd_momentum":
                    velocity[b] *= train_cfg.momentum
                    velocity[b] += grads[b]
                    model.stores[b].table -= lr * velocity[b]
                else:
                    model.stores[b].table -= lr * grads[b]
            rank_losses.append(losses.rank_mean)
            order_losses.append(losses.order_value)
            totals.append(float(losses.total.value))
        row = {
            "epoch": epoch,
            "lr": lr,
            "mean_rank_loss": float(np.mean(rank_losses)),
            "mean_order_loss": float(np.mean(order_losses)),
            "mean_total": float(np.mean(totals)),
        }
        log_rows.append(row)
        log.info("epoch %d lr=%g rank=%.4f order=%.4f total=%.4f",
                 epoch, lr, row["mean_rank_loss"], row["mean_order_loss"],
                 row["mean_total"])
    return FitResult(model=model, log_rows=log_rows)
