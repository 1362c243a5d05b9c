"""Finite-difference verification of the analytic gradients.

Randomized small instances (few categories, short prompts, tiny dimension)
are checked coordinate-by-coordinate with central differences.  Instances
whose hinge arguments sit within `kink_margin` of the kink are re-drawn, so
the comparison never straddles a non-differentiable point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import autodiff as ad
from ..encoder.text_encoder import EncoderConfig, FrozenTextEncoder
from ..encoder.vocab import build_vocabulary
from ..errors import ConfigError
from ..knowledge.types import CategorySet, SubgroupPartition
from ..promptgraph.layout import TokenComposition
from .losses import LossConfig, row_softmax
from .train import BRANCHES, PromptModel, RecordFeatures, batch_loss_graph

COMPONENTS = ("rank", "order", "total")


@dataclass
class GradcheckReport:
    max_rel_err: dict[str, float] = field(
        default_factory=lambda: {c: 0.0 for c in COMPONENTS})
    trials: int = 0
    tolerance: float = 1e-6

    @property
    def passed(self) -> bool:
        return all(v < self.tolerance for v in self.max_rel_err.values())


def _random_partition(n: int, rng: np.random.Generator) -> SubgroupPartition:
    ids = list(rng.permutation(n))
    n_coarse = 1 if n < 4 else int(rng.integers(1, 3))
    cut = len(ids) if n_coarse == 1 else int(rng.integers(2, n - 1))
    coarse = [set(map(int, ids[:cut]))]
    if cut < n:
        coarse.append(set(map(int, ids[cut:])))
    fine = []
    for group in coarse:
        members = sorted(group)
        if len(members) >= 3 and rng.random() < 0.5:
            split = len(members) // 2
            fine.append(set(members[:split]))
            fine.append(set(members[split:]))
        else:
            fine.append(set(members))
    return SubgroupPartition(coarse_groups=coarse, fine_groups=fine,
                             ungrouped=set())


def _random_instance(rng: np.random.Generator):
    n = int(rng.integers(2, 6))           # categories
    d = int(rng.integers(4, 9))           # embedding dim
    comp = TokenComposition(1, int(rng.integers(1, 3)),
                            1, int(rng.integers(1, 3)))
    batch_size = int(rng.integers(1, 5))
    cats = CategorySet([f"thing{i}" for i in range(n)])
    vocab = build_vocabulary(list(cats.names))
    encoder = FrozenTextEncoder(
        EncoderConfig(dim=d, seed=int(rng.integers(1 << 31)),
                      context_limit=32), vocab)
    model = PromptModel(cats, _random_partition(n, rng), comp, encoder,
                        seed=int(rng.integers(1 << 31)), sigma_init=0.3)
    batch = []
    for _ in range(batch_size):
        length = int(rng.integers(2, 6))
        tokens = rng.normal(size=(length, d))
        tokens /= np.linalg.norm(tokens, axis=1, keepdims=True)
        g = rng.normal(size=d)
        g /= np.linalg.norm(g)
        n_pos = int(rng.integers(1, n))
        positives = np.sort(rng.choice(n, size=n_pos, replace=False))
        batch.append(RecordFeatures(global_unit=g, token_units=tokens,
                                    positives=positives.astype(np.intp)))
    anchor = row_softmax(rng.normal(size=(n, n)), 1.0)
    return model, batch, anchor


def _loss_value(model: PromptModel, batch, loss_cfg: LossConfig, anchor,
                include_rank: bool) -> float:
    tensors = {b: ad.Tensor(model.stores[b].table) for b in BRANCHES}
    out = batch_loss_graph(model, batch, tensors, loss_cfg, anchor,
                           include_rank=include_rank)
    return float(out.total.value)


def _component_cfg(component: str, lambda1: float) -> tuple[LossConfig, bool]:
    if component == "rank":
        return LossConfig(lambda1=0.0), True
    if component == "order":
        return LossConfig(lambda1=1.0), False
    return LossConfig(lambda1=lambda1), True


def _min_hinge_gap(model: PromptModel, batch, loss_cfg: LossConfig) -> float:
    """Smallest |margin - S_i + S_j| over the active (pos, neg) pairs."""
    tensors = {b: ad.Tensor(model.stores[b].table) for b in BRANCHES}
    gaps = batch_loss_graph(model, batch, tensors, loss_cfg, None,
                            collect_hinge_gaps=True).hinge_gaps
    return float(gaps) if gaps is not None else np.inf


def relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def gradient_check(trials: int = 20, seed: int = 0, h: float = 1e-5,
                   tolerance: float = 1e-6, lambda1: float = 0.2,
                   kink_margin: float = 1e-3) -> GradcheckReport:
    """Compare analytic and central-difference gradients per loss component."""
    if trials <= 0:
        raise ConfigError("trials must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    report = GradcheckReport(tolerance=tolerance)
    done = 0
    while done < trials:
        model, batch, anchor = _random_instance(rng)
        if _min_hinge_gap(model, batch, LossConfig(lambda1=0.0)) < kink_margin:
            continue  # re-draw: too close to the hinge kink for FD
        for component in COMPONENTS:
            loss_cfg, include_rank = _component_cfg(component, lambda1)
            tensors = {b: ad.parameter(model.stores[b].table.copy())
                       for b in BRANCHES}
            out = batch_loss_graph(model, batch, tensors, loss_cfg, anchor,
                                   include_rank=include_rank)
            out.total.backward()
            for branch in BRANCHES:
                analytic = (tensors[branch].grad
                            if tensors[branch].grad is not None
                            else np.zeros_like(model.stores[branch].table))
                table = model.stores[branch].table
                it = np.nditer(table, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    orig = table[idx]
                    table[idx] = orig + h
                    up = _loss_value(model, batch, loss_cfg, anchor,
                                     include_rank)
                    table[idx] = orig - h
                    down = _loss_value(model, batch, loss_cfg, anchor,
                                       include_rank)
                    table[idx] = orig
                    fd = (up - down) / (2.0 * h)
                    err = relative_error(float(analytic[idx]), fd)
                    if err > report.max_rel_err[component]:
                        report.max_rel_err[component] = err
        done += 1
    report.trials = trials
    return report
