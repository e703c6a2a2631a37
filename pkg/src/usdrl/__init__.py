"""Unified skeleton-based dense representation learning via multi-grained
feature decorrelation: data model, dense spatio-temporal encoder, projectors,
decorrelation objective, pretraining, and downstream evaluation.
"""

from .config import AugmentConfig, ExperimentConfig, ModelConfig, TrainConfig
from .dste import (
    CondensedVector,
    DenseRepresentation,
    SkeletonBackbone,
    build_backbone,
    condense,
    dense_shift,
    dsa_hidden,
)
from .fdloss import (
    LossBreakdown,
    autocov_term,
    consistency_loss,
    fd_loss,
    separability_loss,
    standardize_columns,
    total_loss,
    variance_term,
    xcorr_term,
)
from .projection import DomainProjectors, ProjectionBatch, Projector
from .train import PretrainModel, build_pretrain_model, load_pretrain_model, pretrain

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig",
    "CondensedVector",
    "DenseRepresentation",
    "DomainProjectors",
    "ExperimentConfig",
    "LossBreakdown",
    "ModelConfig",
    "PretrainModel",
    "ProjectionBatch",
    "Projector",
    "SkeletonBackbone",
    "TrainConfig",
    "autocov_term",
    "build_backbone",
    "build_pretrain_model",
    "condense",
    "consistency_loss",
    "dense_shift",
    "dsa_hidden",
    "fd_loss",
    "load_pretrain_model",
    "pretrain",
    "separability_loss",
    "standardize_columns",
    "total_loss",
    "variance_term",
    "xcorr_term",
]
