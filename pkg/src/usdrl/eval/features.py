"""Frozen-encoder feature extraction shared by the evaluators."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch

from ..dste import SkeletonBackbone, condense
from ..skdata import SkeletonSequence
from ..train import PretrainModel, collate_domains


@torch.no_grad()
def extract_instance_features(backbone: SkeletonBackbone,
                              dataset: Sequence[SkeletonSequence],
                              batch_size: int = 64
                              ) -> tuple[np.ndarray, np.ndarray]:
    """Instance condensed vectors [N, 2*C_r] plus labels (-1 where absent)."""
    backbone.eval()
    chunks = []
    for lo in range(0, len(dataset), batch_size):
        batch = dataset[lo:lo + batch_size]
        x_t, x_s = collate_domains(batch)
        chunks.append(condense(backbone(x_t, x_s)).instance.numpy())
    labels = np.array([-1 if s.label is None else s.label for s in dataset],
                      dtype=np.int64)
    return np.concatenate(chunks, axis=0), labels


@torch.no_grad()
def extract_instance_projections(model: PretrainModel,
                                 dataset: Sequence[SkeletonSequence],
                                 batch_size: int = 64) -> np.ndarray:
    """Instance projections [N, 2*C_p] in eval mode (running batch-norm stats)."""
    model.eval()
    chunks = []
    for lo in range(0, len(dataset), batch_size):
        batch = dataset[lo:lo + batch_size]
        x_t, x_s = collate_domains(batch)
        chunks.append(model(x_t, x_s)["instance"].numpy())
    return np.concatenate(chunks, axis=0)


@torch.no_grad()
def extract_dense_temporal(backbone: SkeletonBackbone,
                           seq: SkeletonSequence) -> np.ndarray:
    """Per-frame representation y_t [T, C_r] of one sequence."""
    backbone.eval()
    x_t, x_s = collate_domains([seq])
    return backbone(x_t, x_s).y_t.squeeze(0).numpy()
