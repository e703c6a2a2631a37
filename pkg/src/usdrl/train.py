"""Self-supervised pretraining loop with deterministic seeding, metrics
logging, and binary checkpointing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch
from torch import nn

from . import checkpoint as ckpt
from .config import ExperimentConfig
from .dste import SkeletonBackbone, build_backbone, condense, reset_parameters
from .errors import TrainingDivergedError
from .fdloss import LossBreakdown, total_loss
from .projection import DomainProjectors, ProjectionBatch
from .skdata import SkeletonSequence, make_views, reshape_domains


class PretrainModel(nn.Module):
    """Backbone plus the three domain projectors."""

    def __init__(self, backbone: SkeletonBackbone, projectors: DomainProjectors):
        super().__init__()
        self.backbone = backbone
        self.projectors = projectors

    def forward(self, x_t: torch.Tensor, x_s: torch.Tensor) -> dict[str, torch.Tensor]:
        pooled = condense(self.backbone(x_t, x_s))
        return {
            "temporal": self.projectors.temporal(pooled.t_pool),
            "spatial": self.projectors.spatial(pooled.s_pool),
            "instance": self.projectors.instance(pooled.instance),
        }


def build_pretrain_model(cfg: ExperimentConfig, T: int, V: int, M: int) -> PretrainModel:
    backbone = build_backbone(cfg.model, T, V, M)
    projectors = DomainProjectors(cfg.model)
    model = PretrainModel(backbone, projectors)
    # re-run the seeded init over the full model so projector draws are part
    # of the same deterministic stream
    reset_parameters(model, cfg.model.seed)
    return model


def collate_domains(seqs: Sequence[SkeletonSequence]) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack the reshaped domain matrices of a batch: [B, T, M*V*C], [B, M*V, T*C]."""
    mats = [reshape_domains(s) for s in seqs]
    x_t = torch.from_numpy(np.stack([m[0] for m in mats]))
    x_s = torch.from_numpy(np.stack([m[1] for m in mats]))
    return x_t, x_s


@dataclass
class TrainState:
    step: int = 0
    best_loss: float = math.inf


class MetricsWriter:
    """Append-only plain-text metrics file: step=<int> domain=<d> term=<t> value=<v>."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", buffering=1)

    def write_breakdown(self, step: int, breakdown: LossBreakdown):
        for line in breakdown.log_lines(step):
            self._fh.write(line + "\n")

    def close(self):
        self._fh.close()


def _batch_diagnostics(views_by_domain: dict) -> dict:
    stats = {}
    for domain, views in views_by_domain.items():
        for idx, batch in enumerate(views):
            z = batch.Z.detach()
            stats[f"{domain}/view{idx}"] = {
                "mean": float(z.mean()), "std": float(z.std()),
                "min": float(z.min()), "max": float(z.max()),
                "finite": bool(torch.isfinite(z).all()),
            }
    return stats


def _make_optimizer(model: nn.Module, cfg: ExperimentConfig):
    if cfg.train.optimizer == "adam":
        return torch.optim.Adam(model.parameters(), lr=cfg.train.lr,
                                weight_decay=cfg.train.weight_decay)
    return torch.optim.SGD(model.parameters(), lr=cfg.train.lr,
                           momentum=0.9, weight_decay=cfg.train.weight_decay)


def _planned_steps(num_samples: int, cfg: ExperimentConfig) -> int:
    per_epoch = math.ceil(num_samples / cfg.train.batch_size)
    steps = per_epoch * cfg.train.epochs
    if cfg.train.max_steps is not None:
        steps = min(steps, cfg.train.max_steps)
    return steps


def pretrain_step(model: PretrainModel, batch: Sequence[SkeletonSequence],
                  cfg: ExperimentConfig, rng: np.random.Generator,
                  optimizer, step: int) -> LossBreakdown:
    """One optimization step: K views per sample, three-domain projection,
    decorrelation loss, backward, optimizer update.
    """
    views_by_domain = {"instance": [], "spatial": [], "temporal": []}
    # draw K views per sample; the same row index holds the same source sample
    # in every view batch
    per_view_seqs: list[list[SkeletonSequence]] = [[] for _ in range(cfg.model.K)]
    for seq in batch:
        views = make_views(seq, cfg.model.K, cfg.augment, rng)
        for k, view in enumerate(views.views):
            per_view_seqs[k].append(view)
    for k, seqs in enumerate(per_view_seqs):
        x_t, x_s = collate_domains(seqs)
        projections = model(x_t, x_s)
        for domain in views_by_domain:
            views_by_domain[domain].append(
                ProjectionBatch(Z=projections[domain], domain=domain, view_index=k))

    loss, breakdown = total_loss(views_by_domain["instance"],
                                 views_by_domain["spatial"],
                                 views_by_domain["temporal"], cfg.model)
    if not torch.isfinite(loss):
        raise TrainingDivergedError(
            f"non-finite loss at step {step}", _batch_diagnostics(views_by_domain))
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return breakdown


def pretrain(dataset: Sequence[SkeletonSequence], cfg: ExperimentConfig,
             out_dir) -> Path:
    """Run the full self-supervised pretraining and return the final
    checkpoint path. Writes a metrics log and per-interval checkpoints.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    first = dataset[0]
    model = build_pretrain_model(cfg, first.T, first.V, first.M)
    optimizer = _make_optimizer(model, cfg)
    total_steps = _planned_steps(len(dataset), cfg)
    scheduler = None
    if cfg.train.schedule == "cosine":
        scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(
            optimizer, T_max=max(total_steps, 1))

    rng = np.random.default_rng(cfg.train.seed)
    metrics = MetricsWriter(out_dir / cfg.train.log_file)
    state = TrainState()
    dims = {"T": first.T, "V": first.V, "M": first.M}
    final_path = out_dir / "checkpoint.bin"

    try:
        done = False
        for _ in range(cfg.train.epochs):
            if done:
                break
            order = rng.permutation(len(dataset))
            for lo in range(0, len(dataset), cfg.train.batch_size):
                batch = [dataset[i] for i in order[lo:lo + cfg.train.batch_size]]
                state.step += 1
                breakdown = pretrain_step(model, batch, cfg, rng, optimizer,
                                          state.step)
                if scheduler is not None:
                    scheduler.step()
                metrics.write_breakdown(state.step, breakdown)
                state.best_loss = min(state.best_loss, breakdown.total)
                if state.step % cfg.train.checkpoint_interval == 0:
                    save_pretrain_checkpoint(
                        out_dir / f"checkpoint_{state.step:06d}.bin",
                        model, optimizer, cfg, dims, state)
                if state.step >= total_steps:
                    done = True
                    break
    finally:
        metrics.close()

    save_pretrain_checkpoint(final_path, model, optimizer, cfg, dims, state)
    return final_path


def save_pretrain_checkpoint(path, model: PretrainModel, optimizer,
                             cfg: ExperimentConfig, dims: dict,
                             state: TrainState) -> Path:
    config = cfg.to_dict()
    config["dims"] = dims
    config["state"] = {"step": state.step, "best_loss": state.best_loss}
    tensors: dict[str, torch.Tensor] = {}
    for name, tensor in model.state_dict().items():
        tensors[name] = tensor
    if optimizer is not None:
        param_names = {id(p): n for n, p in model.named_parameters()}
        for group in optimizer.param_groups:
            for p in group["params"]:
                opt_state = optimizer.state.get(p)
                if not opt_state:
                    continue
                base = f"optim.{param_names[id(p)]}"
                for key, value in opt_state.items():
                    if isinstance(value, torch.Tensor):
                        tensors[f"{base}.{key}"] = value
                    else:
                        tensors[f"{base}.{key}"] = torch.tensor(float(value),
                                                                dtype=torch.float64)
    return ckpt.save_checkpoint(path, config, tensors)


def load_pretrain_model(path) -> tuple[PretrainModel, ExperimentConfig, dict]:
    """Rebuild the pretrain model (encoder + projectors) from a checkpoint."""
    config, tensors = ckpt.load_checkpoint(path)
    dims = config.get("dims")
    if dims is None:
        raise ValueError(f"{path}: checkpoint lacks data dims")
    cfg = ExperimentConfig.from_dict(
        {k: v for k, v in config.items() if k in ("model", "loss", "train", "augment")})
    model = build_pretrain_model(cfg, dims["T"], dims["V"], dims["M"])
    model_tensors = {k: v for k, v in tensors.items() if not k.startswith("optim.")}
    model.load_state_dict(model_tensors)
    model.eval()
    return model, cfg, dims
