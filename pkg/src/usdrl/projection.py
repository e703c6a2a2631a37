"""Domain-specific MLP projectors mapping condensed vectors to the
decorrelation space: two linear+batchnorm+ReLU stages and a final linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .config import ModelConfig
from .errors import BatchSizeError, ShapeError

DOMAINS = ("temporal", "spatial", "instance")


@dataclass
class ProjectionBatch:
    """Projected vectors for one augmentation view of one domain."""

    Z: torch.Tensor  # [N, D]
    domain: str
    view_index: int = 0

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if self.Z.dim() != 2:
            raise ShapeError(f"projection batch must be [N, D], got {tuple(self.Z.shape)}")


class Projector(nn.Module):
    """Three-layer MLP; hidden width equals the output width."""

    def __init__(self, in_dim: int, out_dim: int, batchnorm: bool = True):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.lin1 = nn.Linear(in_dim, out_dim)
        self.bn1 = nn.BatchNorm1d(out_dim) if batchnorm else nn.Identity()
        self.lin2 = nn.Linear(out_dim, out_dim)
        self.bn2 = nn.BatchNorm1d(out_dim) if batchnorm else nn.Identity()
        self.lin3 = nn.Linear(out_dim, out_dim)
        self.relu = nn.ReLU()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"expected input dim {self.in_dim}, got {x.shape[-1]}")
        single = x.dim() == 1
        if single:
            x = x.unsqueeze(0)
        if self.training and isinstance(self.bn1, nn.BatchNorm1d) and x.shape[0] < 2:
            raise BatchSizeError(
                "projector needs N >= 2 in training mode (batch statistics)")
        x = self.relu(self.bn1(self.lin1(x)))
        x = self.relu(self.bn2(self.lin2(x)))
        x = self.lin3(x)
        return x.squeeze(0) if single else x


class DomainProjectors(nn.Module):
    """The temporal, spatial, and instance projector triple.

    Temporal and spatial map ``C_r`` to ``C_p``; the instance projector maps
    the concatenated ``2*C_r`` vector to ``2*C_p``.
    """

    def __init__(self, cfg: ModelConfig, batchnorm: bool = True):
        super().__init__()
        self.temporal = Projector(cfg.c_r, cfg.c_p, batchnorm)
        self.spatial = Projector(cfg.c_r, cfg.c_p, batchnorm)
        self.instance = Projector(2 * cfg.c_r, 2 * cfg.c_p, batchnorm)

    def project(self, vec: torch.Tensor, domain: str) -> torch.Tensor:
        if domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")
        return getattr(self, domain)(vec)

    def batch_project(self, batch: torch.Tensor, domain: str,
                      view_index: int = 0) -> ProjectionBatch:
        if batch.dim() != 2:
            raise ShapeError(f"expected [N, D] batch, got {tuple(batch.shape)}")
        return ProjectionBatch(Z=self.project(batch, domain), domain=domain,
                               view_index=view_index)
