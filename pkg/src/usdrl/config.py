"""Configuration dataclasses, JSON round-trip, and dotted-path overrides.

A run is described by one JSON file with four sections: ``model``, ``loss``,
``train``, ``augment``. The ``model`` and ``loss`` sections both populate
:class:`ModelConfig` (the loss hyperparameters live with the model because
checkpoints embed them); ``train`` and ``augment`` map to their own classes.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError

# ModelConfig fields that belong to the "model" JSON section; the rest of the
# dataclass (minus "seed") is the "loss" section.
_MODEL_SECTION = (
    "c_in", "c_e", "c_r", "c_p", "num_layers", "num_heads", "gap",
    "conv_kernel", "alpha", "beta", "temporal_tokens", "spatial_tokens",
)
_LOSS_SECTION = (
    "tau", "kappa", "eta", "gamma", "epsilon", "mu", "lambda_", "K",
    "eps_norm", "var_ddof", "cov_ddof",
)
# "lambda" is a Python keyword; the JSON key drops the underscore.
_JSON_ALIASES = {"lambda_": "lambda"}


@dataclass
class ModelConfig:
    """Encoder dimensions plus every loss hyperparameter a checkpoint needs."""

    # channels: input coords, embedding, representation, projection
    c_in: int = 3
    c_e: int = 64
    c_r: int = 64
    c_p: int = 32
    num_layers: int = 2
    num_heads: int = 4
    gap: int = 2
    conv_kernel: int = 5
    alpha: float = 0.5
    beta: Optional[float] = None  # derived as 1 - alpha when omitted
    # token counts per stream; None means "derive from the dataset"
    temporal_tokens: Optional[int] = None
    spatial_tokens: Optional[int] = None
    # loss hyperparameters
    tau: float = 0.5
    kappa: float = 25.0
    eta: float = 1.0
    gamma: float = 1.0
    epsilon: float = 1e-4
    mu: float = 25.0
    lambda_: float = 0.005
    K: int = 2
    eps_norm: float = 1e-8  # floor under the column-standardization square root
    var_ddof: int = 0       # population variance in the variance hinge
    cov_ddof: int = 1       # sample covariance in the auto-covariance term
    seed: int = 0

    def __post_init__(self):
        if self.beta is None:
            self.beta = 1.0 - self.alpha
        self.validate()

    def validate(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ConfigError(
                f"branch weights must sum to 1: alpha={self.alpha} beta={self.beta}")
        if self.gap < 1:
            raise ConfigError(f"gap must be >= 1, got {self.gap}")
        if self.conv_kernel % 2 == 0:
            raise ConfigError(f"conv_kernel must be odd, got {self.conv_kernel}")
        for name in ("c_in", "c_e", "c_r", "c_p", "num_layers", "num_heads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("c_e", "c_r"):
            if getattr(self, name) % self.num_heads != 0:
                raise ConfigError(
                    f"{name}={getattr(self, name)} not divisible by "
                    f"num_heads={self.num_heads}")
        if self.gamma <= 0:
            raise ConfigError("gamma must be > 0")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")
        for name in ("tau", "kappa", "eta", "mu", "lambda_"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.K < 2:
            raise ConfigError(f"K must be >= 2 (loss terms need view pairs), got {self.K}")
        if self.var_ddof not in (0, 1) or self.cov_ddof not in (0, 1):
            raise ConfigError("var_ddof and cov_ddof must be 0 or 1")


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 24
    lr: float = 1e-3
    weight_decay: float = 1e-5
    optimizer: str = "adam"
    schedule: str = "cosine"  # "cosine" or "none"
    seed: int = 0
    checkpoint_interval: int = 200
    log_file: str = "metrics.log"
    max_steps: Optional[int] = None  # cap across epochs; None = no cap

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2 (batch statistics)")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lr < 0:
            # 0 is allowed: a zero step is the documented no-op debugging mode
            raise ConfigError("learning rate must be >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.schedule not in ("cosine", "none"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if self.checkpoint_interval < 1:
            raise ConfigError("checkpoint_interval must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1 when set")


@dataclass
class AugmentConfig:
    """Which stochastic transforms a view drawing applies, with their ranges."""

    rotation: bool = True
    rotation_max_deg: float = 30.0
    shear: bool = True
    shear_max: float = 0.3
    crop: bool = True
    crop_min_ratio: float = 0.5
    crop_max_ratio: float = 1.0
    jitter: bool = True
    jitter_std: float = 0.01
    joint_dropout: bool = False
    joint_dropout_p: float = 0.1

    @classmethod
    def identity(cls) -> "AugmentConfig":
        """Policy with every transform disabled (augment becomes a copy)."""
        return cls(rotation=False, shear=False, crop=False, jitter=False,
                   joint_dropout=False)

    def validate(self):
        if not (0.0 < self.crop_min_ratio <= self.crop_max_ratio <= 1.0):
            raise ConfigError("crop ratios must satisfy 0 < min <= max <= 1")
        if self.jitter_std < 0 or self.shear_max < 0 or self.rotation_max_deg < 0:
            raise ConfigError("augmentation ranges must be non-negative")
        if not (0.0 <= self.joint_dropout_p <= 1.0):
            raise ConfigError("joint_dropout_p must lie in [0, 1]")


@dataclass
class ExperimentConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    def to_dict(self) -> dict:
        model = {}
        loss = {}
        for f in dataclasses.fields(ModelConfig):
            key = _JSON_ALIASES.get(f.name, f.name)
            value = getattr(self.model, f.name)
            if f.name in _LOSS_SECTION:
                loss[key] = value
            elif f.name in _MODEL_SECTION:
                model[key] = value
        model["seed"] = self.model.seed
        return {
            "model": model,
            "loss": loss,
            "train": dataclasses.asdict(self.train),
            "augment": dataclasses.asdict(self.augment),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json() + "\n")
        return path

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"model", "loss", "train", "augment"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        model_kwargs = {}
        for section, allowed in (("model", _MODEL_SECTION + ("seed",)),
                                 ("loss", _LOSS_SECTION)):
            for key, value in data.get(section, {}).items():
                name = _resolve_field(section, key, allowed)
                model_kwargs[name] = value
        train_kwargs = _section_kwargs("train", data.get("train", {}), TrainConfig)
        augment_kwargs = _section_kwargs("augment", data.get("augment", {}), AugmentConfig)
        cfg = cls(model=ModelConfig(**model_kwargs),
                  train=TrainConfig(**train_kwargs),
                  augment=AugmentConfig(**augment_kwargs))
        cfg.augment.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def apply_overrides(self, overrides: list[str]) -> "ExperimentConfig":
        """Return a new config with ``section.key=value`` overrides applied."""
        data = self.to_dict()
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            dotted, raw = item.split("=", 1)
            parts = dotted.split(".")
            if len(parts) != 2:
                raise ConfigError(
                    f"override key {dotted!r} must be section.field (e.g. loss.lambda)")
            section, key = parts
            if section not in data:
                raise ConfigError(f"unknown config section {section!r}")
            if key not in data[section]:
                raise ConfigError(f"unknown key {key!r} in section {section!r}")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw  # bare strings stay strings
            data[section][key] = value
            if section == "model" and key == "alpha" and "beta" not in [
                    o.split("=", 1)[0].split(".")[-1] for o in overrides]:
                # keep the weight-sum invariant when only alpha is swept
                data[section]["beta"] = None
        return ExperimentConfig.from_dict(data)


def _resolve_field(section: str, key: str, allowed: tuple) -> str:
    for name in allowed:
        if key == _JSON_ALIASES.get(name, name):
            return name
    raise ConfigError(f"unknown key {key!r} in section {section!r}")


def _section_kwargs(section: str, data: dict, klass) -> dict:
    names = {f.name for f in dataclasses.fields(klass)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in section {section!r}")
    return dict(data)
