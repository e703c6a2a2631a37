"""Training-free action retrieval with cosine similarity."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..dste import SkeletonBackbone
from ..skdata import SkeletonSequence
from .features import extract_instance_features
from .report import EvalReport


def cosine_rank(gallery: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Indices of gallery items per query, most similar first."""
    g = gallery / np.maximum(np.linalg.norm(gallery, axis=1, keepdims=True), 1e-12)
    q = queries / np.maximum(np.linalg.norm(queries, axis=1, keepdims=True), 1e-12)
    sim = q @ g.T
    return np.argsort(-sim, axis=1, kind="stable")


def knn_retrieve(backbone: SkeletonBackbone,
                 gallery_set: Sequence[SkeletonSequence],
                 query_set: Sequence[SkeletonSequence], k: int = 1,
                 config_digest: str = "", checkpoint_digest: str = "") -> EvalReport:
    """Nearest-neighbour retrieval: top-1 accuracy plus any-match recall@k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not gallery_set:
        raise ValueError("gallery is empty")
    gallery_x, gallery_y = extract_instance_features(backbone, gallery_set)
    query_x, query_y = extract_instance_features(backbone, query_set)
    order = cosine_rank(gallery_x, query_x)
    top1 = float((gallery_y[order[:, 0]] == query_y).mean())
    topk = gallery_y[order[:, : min(k, gallery_y.size)]]
    recall_k = float((topk == query_y[:, None]).any(axis=1).mean())
    return EvalReport(task="knn_retrieve",
                      metrics={"top1": top1, f"recall@{k}": recall_k},
                      config_digest=config_digest,
                      checkpoint_digest=checkpoint_digest,
                      details={"k": k, "gallery_size": len(gallery_set),
                               "num_queries": len(query_set)})
