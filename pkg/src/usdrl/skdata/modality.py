"""Joint / bone / motion modality derivation."""

from __future__ import annotations

import numpy as np

from .sequence import SkeletonEdgeSet, SkeletonSequence

# Kinect V2 skeleton tree used by NTU RGB+D: (child, parent), 0-based.
NTU_EDGES = SkeletonEdgeSet(
    edges=[
        (0, 1), (2, 20), (3, 2), (4, 20), (5, 4), (6, 5), (7, 6), (8, 20),
        (9, 8), (10, 9), (11, 10), (12, 0), (13, 12), (14, 13), (15, 14),
        (16, 0), (17, 16), (18, 17), (19, 18), (21, 22), (22, 7), (23, 24),
        (24, 11), (20, 1),
    ],
    num_joints=25,
)

MODALITIES = ("joint", "bone", "motion")


def chain_edges(num_joints: int) -> SkeletonEdgeSet:
    """Simple chain topology 0-1-2-...-(V-1) for synthetic skeletons."""
    return SkeletonEdgeSet(edges=[(v, v - 1) for v in range(1, num_joints)],
                           num_joints=num_joints)


def derive_modality(seq: SkeletonSequence, modality: str,
                    edges: SkeletonEdgeSet | None = None) -> SkeletonSequence:
    """Return the joint (identity), bone (child minus parent), or motion
    (frame difference, last frame zero) view of a sequence. Labels carry over.
    """
    if modality not in MODALITIES:
        raise ValueError(f"modality must be one of {MODALITIES}, got {modality!r}")
    out = seq.copy()
    if modality == "joint":
        return out
    if modality == "motion":
        motion = np.zeros_like(seq.data)
        motion[:, :-1] = seq.data[:, 1:] - seq.data[:, :-1]
        out.data = motion
        return out
    # bone
    if edges is None:
        raise ValueError("bone modality requires an edge set")
    if edges.num_joints != seq.V:
        raise ValueError(
            f"edge set is over {edges.num_joints} joints but sequence has V={seq.V}")
    bones = np.zeros_like(seq.data)
    for child, parent in edges.edges:
        bones[:, :, child] = seq.data[:, :, child] - seq.data[:, :, parent]
    out.data = bones
    return out
