"""Run configuration: one JSON file drives every command.

Unknown keys are rejected so typos fail fast; every default matches the
hyperparameters the training recipe ships with.  The fully resolved config
is serialized next to a command's outputs for provenance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .encoder.text_encoder import EncoderConfig
from .errors import ConfigError, IoError
from .inference.scoring import InferenceConfig
from .learning.losses import LossConfig
from .learning.train import TrainConfig
from .promptgraph.layout import TokenComposition


@dataclass
class AcquireConfig:
    n_common: int = 90
    n_specific: int = 30
    keep: int = 70
    per_attribute: int = 100
    per_pair: int = 100
    kinds: tuple[str, ...] = ("fine", "relationship")
    augment_name_match: bool = False
    captions: str | None = None
    max_concurrency: int = 4

    def __post_init__(self):
        allowed = {"coarse", "fine", "relationship", "captions"}
        unknown = set(self.kinds) - allowed
        if unknown:
            raise ConfigError(f"unknown corpus kinds: {sorted(unknown)}")
        if min(self.n_common, self.n_specific, self.keep,
               self.per_attribute, self.per_pair) <= 0:
            raise ConfigError("acquisition counts must be positive")


@dataclass
class DataConfig:
    corpora: tuple[str, ...] = ()      # empty -> corpus_<kind>.jsonl in out_dir
    partition: str | None = None       # default: partition.json in out_dir
    eval_corpus: str | None = None
    holdout_fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise ConfigError("holdout_fraction must lie in [0, 1)")


@dataclass
class RunConfig:
    categories: str = "categories.txt"
    out_dir: str = "run"
    seed: int = 0
    acquire: AcquireConfig = field(default_factory=AcquireConfig)
    data: DataConfig = field(default_factory=DataConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    composition: TokenComposition = field(default_factory=TokenComposition)
    loss: LossConfig = field(default_factory=LossConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    handcraft_overrides: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "categories": self.categories,
            "out_dir": self.out_dir,
            "seed": self.seed,
            "acquire": {
                "n_common": self.acquire.n_common,
                "n_specific": self.acquire.n_specific,
                "keep": self.acquire.keep,
                "per_attribute": self.acquire.per_attribute,
                "per_pair": self.acquire.per_pair,
                "kinds": list(self.acquire.kinds),
                "augment_name_match": self.acquire.augment_name_match,
                "captions": self.acquire.captions,
                "max_concurrency": self.acquire.max_concurrency,
            },
            "data": {
                "corpora": list(self.data.corpora),
                "partition": self.data.partition,
                "eval_corpus": self.data.eval_corpus,
                "holdout_fraction": self.data.holdout_fraction,
            },
            "encoder": {
                "dim": self.encoder.dim,
                "seed": self.encoder.seed,
                "hidden_dim": self.encoder.hidden_dim,
                "context_limit": self.encoder.context_limit,
                "positional_scale": self.encoder.positional_scale,
            },
            "composition": list(self.composition.as_tuple()),
            "loss": {
                "margin": self.loss.margin,
                "lambda1": self.loss.lambda1,
                "tau_order": self.loss.tau_order,
            },
            "train": {
                "lr": self.train.lr,
                "milestones": list(self.train.milestones),
                "gamma": self.train.gamma,
                "epochs": self.train.epochs,
                "batch_size": self.train.batch_size,
                "seed": self.train.seed,
                "optimizer": self.train.optimizer,
                "momentum": self.train.momentum,
                "sigma_init": self.train.sigma_init,
            },
            "inference": {
                "lambda2": self.inference.lambda2,
                "tau": self.inference.tau,
                "top_k": self.inference.top_k,
            },
            "handcraft_overrides": dict(self.handcraft_overrides),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8", newline="\n")


def _take(data: dict, section: str, allowed: set[str]) -> dict:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")
    return data


def _tuple_of(value, caster, section: str) -> tuple:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{section} must be a list")
    return tuple(caster(v) for v in value)


def config_from_dict(data: dict) -> RunConfig:
    _take(data, "config",
          {"categories", "out_dir", "seed", "acquire", "data", "encoder",
           "composition", "loss", "train", "inference",
           "handcraft_overrides"})
    cfg = RunConfig()
    cfg.categories = str(data.get("categories", cfg.categories))
    cfg.out_dir = str(data.get("out_dir", cfg.out_dir))
    cfg.seed = int(data.get("seed", cfg.seed))

    acq = _take(dict(data.get("acquire", {})), "acquire",
                {"n_common", "n_specific", "keep", "per_attribute",
                 "per_pair", "kinds", "augment_name_match", "captions",
                 "max_concurrency"})
    base = AcquireConfig()
    cfg.acquire = AcquireConfig(
        n_common=int(acq.get("n_common", base.n_common)),
        n_specific=int(acq.get("n_specific", base.n_specific)),
        keep=int(acq.get("keep", base.keep)),
        per_attribute=int(acq.get("per_attribute", base.per_attribute)),
        per_pair=int(acq.get("per_pair", base.per_pair)),
        kinds=_tuple_of(acq.get("kinds", list(base.kinds)), str, "kinds"),
        augment_name_match=bool(acq.get("augment_name_match",
                                        base.augment_name_match)),
        captions=acq.get("captions"),
        max_concurrency=int(acq.get("max_concurrency",
                                    base.max_concurrency)),
    )

    dat = _take(dict(data.get("data", {})), "data",
                {"corpora", "partition", "eval_corpus", "holdout_fraction"})
    dbase = DataConfig()
    cfg.data = DataConfig(
        corpora=_tuple_of(dat.get("corpora", []), str, "corpora"),
        partition=dat.get("partition"),
        eval_corpus=dat.get("eval_corpus"),
        holdout_fraction=float(dat.get("holdout_fraction",
                                       dbase.holdout_fraction)),
    )

    enc = _take(dict(data.get("encoder", {})), "encoder",
                {"dim", "seed", "hidden_dim", "context_limit",
                 "positional_scale"})
    ebase = EncoderConfig()
    cfg.encoder = EncoderConfig(
        dim=int(enc.get("dim", ebase.dim)),
        seed=int(enc.get("seed", cfg.seed)),
        hidden_dim=(None if enc.get("hidden_dim") is None
                    else int(enc["hidden_dim"])),
        context_limit=int(enc.get("context_limit", ebase.context_limit)),
        positional_scale=float(enc.get("positional_scale",
                                       ebase.positional_scale)),
    )

    comp = data.get("composition", list(TokenComposition().as_tuple()))
    comp = _tuple_of(comp, int, "composition")
    if len(comp) != 4:
        raise ConfigError("composition must have four counts")
    cfg.composition = TokenComposition(*comp)

    los = _take(dict(data.get("loss", {})), "loss",
                {"margin", "lambda1", "tau_order"})
    lbase = LossConfig()
    cfg.loss = LossConfig(
        margin=float(los.get("margin", lbase.margin)),
        lambda1=float(los.get("lambda1", lbase.lambda1)),
        tau_order=float(los.get("tau_order", lbase.tau_order)),
    )

    trn = _take(dict(data.get("train", {})), "train",
                {"lr", "milestones", "gamma", "epochs", "batch_size", "seed",
                 "optimizer", "momentum", "sigma_init"})
    tbase = TrainConfig()
    cfg.train = TrainConfig(
        lr=float(trn.get("lr", tbase.lr)),
        milestones=_tuple_of(trn.get("milestones", list(tbase.milestones)),
                             int, "milestones"),
        gamma=float(trn.get("gamma", tbase.gamma)),
        epochs=int(trn.get("epochs", tbase.epochs)),
        batch_size=int(trn.get("batch_size", tbase.batch_size)),
        seed=int(trn.get("seed", cfg.seed)),
        optimizer=str(trn.get("optimizer", tbase.optimizer)),
        momentum=float(trn.get("momentum", tbase.momentum)),
        sigma_init=float(trn.get("sigma_init", tbase.sigma_init)),
    )

    inf = _take(dict(data.get("inference", {})), "inference",
                {"lambda2", "tau", "top_k"})
    ibase = InferenceConfig()
    cfg.inference = InferenceConfig(
        lambda2=float(inf.get("lambda2", ibase.lambda2)),
        tau=float(inf.get("tau", ibase.tau)),
        top_k=int(inf.get("top_k", ibase.top_k)),
    )

    overrides = data.get("handcraft_overrides", {})
    if not isinstance(overrides, dict):
        raise ConfigError("handcraft_overrides must be an object")
    cfg.handcraft_overrides = {str(k).lower(): str(v)
                               for k, v in overrides.items()}
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_dict(raw)
