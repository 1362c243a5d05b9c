"""Human-readable reports, delimited outputs, and figures."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..encoder.text_encoder import FrozenTextEncoder  # noqa: E402
from ..knowledge.types import CategorySet, Corpus  # noqa: E402
from ..learning.similarity import ClassEmbeddingBank  # noqa: E402
from .metrics import MetricsReport, corpus_feature_items  # noqa: E402
from .scoring import InferenceConfig, score  # noqa: E402


def metrics_table(report: MetricsReport, cats: CategorySet) -> str:
    """Aligned plain-text table of the per-class APs plus the summary row."""
    name_width = max(len("category"), *(len(n) for n in cats.names))
    lines = [f"{'category':<{name_width}}  {'AP':>8}"]
    lines.append("-" * (name_width + 10))
    for i, name in enumerate(cats.names):
        ap = report.per_class_ap[i]
        ap_text = f"{ap:8.4f}" if ap is not None else "       -"
        lines.append(f"{name:<{name_width}}  {ap_text}")
    lines.append("-" * (name_width + 10))
    lines.append(f"{'mAP':<{name_width}}  {report.map:8.4f}")
    lines.append(f"{'F1@top-3':<{name_width}}  {report.f1_top3:8.4f}")
    return "\n".join(lines) + "\n"


def save_metrics(report: MetricsReport, cats: CategorySet,
                 out_dir: str | Path, stem: str = "metrics") -> None:
    """Write metrics.json, an aligned table, a TSV, and the AP bar figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    (out / f"{stem}.txt").write_text(metrics_table(report, cats),
                                     encoding="utf-8")
    tsv_lines = ["category\tap"]
    for name, ap in zip(cats.names, report.per_class_ap):
        tsv_lines.append(f"{name}\t{'' if ap is None else f'{ap:.6f}'}")
    (out / f"{stem}_per_class.tsv").write_text(
        "\n".join(tsv_lines) + "\n", encoding="utf-8")
    plot_per_class_ap(report, cats, out / f"{stem}_per_class.png")


def plot_per_class_ap(report: MetricsReport, cats: CategorySet,
                      path: str | Path) -> None:
    aps = [0.0 if ap is None else ap for ap in report.per_class_ap]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.45 * len(aps)), 3.2))
    ax.bar(range(len(aps)), aps, color="#4878d0")
    ax.axhline(report.map, color="#d65f5f", linewidth=1,
               label=f"mAP = {report.map:.3f}")
    ax.set_xticks(range(len(aps)))
    ax.set_xticklabels(cats.names, rotation=60, ha="right", fontsize=7)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("average precision")
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_loss_curve(log_rows: list[dict], path: str | Path) -> None:
    epochs = [row["epoch"] for row in log_rows]
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.plot(epochs, [row["mean_rank_loss"] for row in log_rows],
            marker="o", label="ranking")
    ax.plot(epochs, [row["mean_order_loss"] for row in log_rows],
            marker="s", label="order")
    ax.plot(epochs, [row["mean_total"] for row in log_rows],
            marker="^", label="total")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean loss")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def topk_report(corpus: Corpus, encoder: FrozenTextEncoder,
                bank: ClassEmbeddingBank, icfg: InferenceConfig,
                cats: CategorySet, k: int = 3) -> str:
    """Per item: the k best categories with fused scores; '+' marks truth."""
    items, labels = corpus_feature_items(corpus, encoder)
    icfg_k = InferenceConfig(lambda2=icfg.lambda2, tau=icfg.tau, top_k=k)
    lines = []
    for idx, ((g, dense), positives) in enumerate(zip(items, labels)):
        pred = score(g, dense, bank, icfg_k)
        lines.append(f"[{idx}] {corpus[idx].text}")
        for rank, (cat_id, value) in enumerate(pred.topk, start=1):
            mark = "+" if cat_id in positives else " "
            lines.append(f"    {rank}. {cats.name_of(cat_id):<20} "
                         f"{value:8.4f} [{mark}]")
    return "\n".join(lines) + "\n"
