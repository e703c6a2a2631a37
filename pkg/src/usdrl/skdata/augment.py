"""Stochastic skeleton augmentations used to draw training views."""

from __future__ import annotations

import numpy as np

from ..config import AugmentConfig
from ..errors import ConfigError
from .sequence import AugmentedViews, SkeletonSequence


def _rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    cross = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(axis, axis)


def random_rotation(rng: np.random.Generator, max_deg: float) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= max(np.linalg.norm(axis), 1e-12)
    angle = np.deg2rad(rng.uniform(-max_deg, max_deg))
    return _rotation_matrix(axis, angle)


def _apply_linear(data: np.ndarray, mat: np.ndarray) -> np.ndarray:
    # data is [3, T, V, M]; apply the 3x3 map to the coordinate axis
    return np.einsum("ij,jtvm->itvm", mat, data).astype(np.float32)


def _crop_resize(data: np.ndarray, start: int, crop_len: int,
                 frame_labels: np.ndarray | None):
    """Crop ``crop_len`` frames at ``start`` and linearly resample back to T."""
    c, t, v, m = data.shape
    window = data[:, start:start + crop_len]
    if crop_len == t:
        return data.copy(), None if frame_labels is None else frame_labels.copy()
    pos = np.linspace(0.0, crop_len - 1.0, t)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, crop_len - 1)
    w = (pos - lo).astype(np.float32)
    out = (1.0 - w)[None, :, None, None] * window[:, lo] \
        + w[None, :, None, None] * window[:, hi]
    labels = None
    if frame_labels is not None:
        labels = frame_labels[start:start + crop_len][np.rint(pos).astype(np.int64)]
    return out.astype(np.float32), labels


def augment(seq: SkeletonSequence, policy: AugmentConfig,
            rng: np.random.Generator) -> SkeletonSequence:
    """Draw one stochastic view. Shape and labels are preserved; an empty
    policy returns a plain copy.
    """
    policy.validate()
    data = seq.data.copy()
    frame_labels = None if seq.frame_labels is None else seq.frame_labels.copy()

    if policy.rotation:
        if seq.c_in != 3:
            raise ConfigError("rotation augmentation needs 3 coordinate channels")
        data = _apply_linear(data, random_rotation(rng, policy.rotation_max_deg))
    if policy.shear:
        if seq.c_in != 3:
            raise ConfigError("shear augmentation needs 3 coordinate channels")
        shear = np.eye(3)
        off = ~np.eye(3, dtype=bool)
        shear[off] = rng.uniform(-policy.shear_max, policy.shear_max, size=6)
        data = _apply_linear(data, shear)
    if policy.crop:
        ratio = rng.uniform(policy.crop_min_ratio, policy.crop_max_ratio)
        crop_len = int(np.clip(round(ratio * seq.T), 1, seq.T))
        start = int(rng.integers(0, seq.T - crop_len + 1))
        data, frame_labels = _crop_resize(data, start, crop_len, frame_labels)
    if policy.jitter:
        data = data + rng.normal(0.0, policy.jitter_std,
                                 size=data.shape).astype(np.float32)
    if policy.joint_dropout:
        drop = rng.random(seq.V) < policy.joint_dropout_p
        data[:, :, drop, :] = 0.0

    return SkeletonSequence(data=data.astype(np.float32), label=seq.label,
                            frame_labels=frame_labels, source_id=seq.source_id)


def make_views(seq: SkeletonSequence, K: int, policy: AugmentConfig,
               rng: np.random.Generator) -> AugmentedViews:
    """K independent augmentations of one sequence (loss terms need pairs)."""
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    return AugmentedViews(views=[augment(seq, policy, rng) for _ in range(K)])
