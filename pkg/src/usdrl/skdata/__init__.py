"""Skeleton data model: sequences, file formats, modalities, augmentation."""

from .augment import augment, make_views, random_rotation
from .modality import MODALITIES, NTU_EDGES, chain_edges, derive_modality
from .ntu import load_ntu_skeleton
from .sequence import (
    AugmentedViews,
    SkeletonEdgeSet,
    SkeletonSequence,
    load_dataset,
    load_sequence,
    reshape_domains,
    save_dataset,
    save_sequence,
    unreshape_spatial,
    unreshape_temporal,
)
from .synthetic import generate_detection_clips, generate_synthetic_dataset

__all__ = [
    "AugmentedViews",
    "MODALITIES",
    "NTU_EDGES",
    "SkeletonEdgeSet",
    "SkeletonSequence",
    "augment",
    "chain_edges",
    "derive_modality",
    "generate_detection_clips",
    "generate_synthetic_dataset",
    "load_dataset",
    "load_ntu_skeleton",
    "load_sequence",
    "make_views",
    "random_rotation",
    "reshape_domains",
    "save_dataset",
    "save_sequence",
    "unreshape_spatial",
    "unreshape_temporal",
]
