"""Frozen-encoder linear probe."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch
from torch import nn

from ..dste import SkeletonBackbone
from ..skdata import SkeletonSequence
from .features import extract_instance_features
from .report import EvalReport


def fit_linear_classifier(features: np.ndarray, labels: np.ndarray,
                          num_classes: int, epochs: int = 200, lr: float = 1e-2,
                          weight_decay: float = 1e-4, seed: int = 0) -> nn.Linear:
    """Full-batch cross-entropy training of one linear layer."""
    g = torch.Generator().manual_seed(seed)
    head = nn.Linear(features.shape[1], num_classes)
    with torch.no_grad():
        head.weight.normal_(0.0, 0.01, generator=g)
        head.bias.zero_()
    x = torch.from_numpy(features.astype(np.float32))
    y = torch.from_numpy(labels)
    optimizer = torch.optim.Adam(head.parameters(), lr=lr,
                                 weight_decay=weight_decay)
    for _ in range(epochs):
        optimizer.zero_grad()
        loss = nn.functional.cross_entropy(head(x), y)
        loss.backward()
        optimizer.step()
    return head


def top1_accuracy(head: nn.Linear, features: np.ndarray,
                  labels: np.ndarray) -> float:
    with torch.no_grad():
        pred = head(torch.from_numpy(features.astype(np.float32))).argmax(dim=1)
    return float((pred.numpy() == labels).mean())


def linear_probe(backbone: SkeletonBackbone,
                 train_set: Sequence[SkeletonSequence],
                 test_set: Sequence[SkeletonSequence],
                 epochs: int = 200, lr: float = 1e-2, seed: int = 0,
                 config_digest: str = "", checkpoint_digest: str = "") -> EvalReport:
    """Train one linear layer on frozen instance vectors; report top-1."""
    train_labels = {s.label for s in train_set}
    test_labels = {s.label for s in test_set}
    if None in train_labels or None in test_labels:
        raise ValueError("linear probe needs labelled sequences")
    if not test_labels <= train_labels:
        raise ValueError(
            f"test labels {sorted(test_labels)} not covered by train labels "
            f"{sorted(train_labels)}")
    num_classes = max(train_labels) + 1

    backbone.eval()
    train_x, train_y = extract_instance_features(backbone, train_set)
    test_x, test_y = extract_instance_features(backbone, test_set)
    head = fit_linear_classifier(train_x, train_y, num_classes, epochs, lr,
                                 seed=seed)
    metrics = {
        "top1": top1_accuracy(head, test_x, test_y),
        "train_top1": top1_accuracy(head, train_x, train_y),
    }
    return EvalReport(task="linear_probe", metrics=metrics,
                      config_digest=config_digest,
                      checkpoint_digest=checkpoint_digest,
                      details={"epochs": epochs, "lr": lr, "seed": seed,
                               "num_classes": num_classes})
