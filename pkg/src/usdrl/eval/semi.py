"""Semi-supervised evaluation: fine-tune encoder plus classifier on a labelled
fraction of the training set.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch
from torch import nn

from ..dste import SkeletonBackbone, condense
from ..skdata import SkeletonSequence
from ..train import collate_domains
from .report import EvalReport


class SequenceClassifier(nn.Module):
    """Backbone with a linear head on the instance condensed vector."""

    def __init__(self, backbone: SkeletonBackbone, num_classes: int, seed: int = 0):
        super().__init__()
        self.backbone = backbone
        self.head = nn.Linear(2 * backbone.cfg.c_r, num_classes)
        g = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            self.head.weight.normal_(0.0, 0.01, generator=g)
            self.head.bias.zero_()

    def forward(self, x_t: torch.Tensor, x_s: torch.Tensor) -> torch.Tensor:
        return self.head(condense(self.backbone(x_t, x_s)).instance)


def sample_fraction(dataset: Sequence[SkeletonSequence], fraction: float,
                    seed: int) -> tuple[list[int], list[str]]:
    """Seeded simple random sample of indices; warns when classes go missing."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    rng = np.random.default_rng(seed)
    count = max(1, int(round(fraction * len(dataset))))
    indices = sorted(rng.choice(len(dataset), size=count, replace=False).tolist())
    all_classes = {s.label for s in dataset}
    kept_classes = {dataset[i].label for i in indices}
    warnings = []
    missing = sorted(all_classes - kept_classes)
    if missing:
        warnings.append(f"classes absent from the labelled subset: {missing}")
    return indices, warnings


def finetune_classifier(model: SequenceClassifier,
                        train_set: Sequence[SkeletonSequence],
                        epochs: int, batch_size: int, lr: float,
                        seed: int) -> None:
    rng = np.random.default_rng(seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    model.train()
    for _ in range(epochs):
        order = rng.permutation(len(train_set))
        for lo in range(0, len(train_set), batch_size):
            batch = [train_set[i] for i in order[lo:lo + batch_size]]
            x_t, x_s = collate_domains(batch)
            y = torch.tensor([s.label for s in batch], dtype=torch.int64)
            optimizer.zero_grad()
            loss = nn.functional.cross_entropy(model(x_t, x_s), y)
            loss.backward()
            optimizer.step()


@torch.no_grad()
def classifier_accuracy(model: SequenceClassifier,
                        dataset: Sequence[SkeletonSequence],
                        batch_size: int = 64) -> float:
    model.eval()
    correct = 0
    for lo in range(0, len(dataset), batch_size):
        batch = dataset[lo:lo + batch_size]
        x_t, x_s = collate_domains(batch)
        pred = model(x_t, x_s).argmax(dim=1).numpy()
        labels = np.array([s.label for s in batch])
        correct += int((pred == labels).sum())
    return correct / len(dataset)


def semi_supervised_finetune(backbone: SkeletonBackbone, fraction: float,
                             train_set: Sequence[SkeletonSequence],
                             test_set: Sequence[SkeletonSequence],
                             epochs: int = 20, batch_size: int = 16,
                             lr: float = 1e-3, seed: int = 0,
                             config_digest: str = "",
                             checkpoint_digest: str = "") -> EvalReport:
    """Fine-tune on a seeded labelled fraction; report top-1 and the subset."""
    labels = {s.label for s in train_set} | {s.label for s in test_set}
    if None in labels:
        raise ValueError("semi-supervised fine-tuning needs labelled sequences")
    num_classes = max(labels) + 1
    indices, warnings = sample_fraction(train_set, fraction, seed)
    subset = [train_set[i] for i in indices]
    model = SequenceClassifier(backbone, num_classes, seed=seed)
    finetune_classifier(model, subset, epochs, batch_size, lr, seed)
    metrics = {"top1": classifier_accuracy(model, test_set),
               "num_labelled": float(len(subset))}
    return EvalReport(task="semi_supervised", metrics=metrics,
                      config_digest=config_digest,
                      checkpoint_digest=checkpoint_digest,
                      details={"fraction": fraction, "seed": seed,
                               "subset_ids": [train_set[i].source_id for i in indices],
                               "warnings": warnings,
                               "epochs": epochs, "lr": lr})
