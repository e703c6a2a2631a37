"""Synthetic skeleton datasets: sinusoidal motion families per class.

Each class is a parametrized motion family: a class-specific set of active
joints oscillating at a class-specific frequency along class-specific
directions. Per-sample nuisance (global rotation, phase shift, scale, noise)
makes raw coordinates a poor class signal while the underlying motion pattern
stays recoverable.
"""

from __future__ import annotations

import numpy as np

from .augment import _rotation_matrix
from .sequence import SkeletonSequence


def _class_params(rng: np.random.Generator, num_classes: int, T: int, V: int):
    rest = rng.uniform(-1.0, 1.0, size=(V, 3))
    params = []
    for c in range(num_classes):
        freq = 1.0 + 0.75 * c  # cycles per sequence; >= 2x the noise bandwidth
        active = rng.permutation(V)[: max(1, V // 2)]
        amplitude = np.zeros(V)
        amplitude[active] = rng.uniform(0.6, 1.0, size=active.size)
        direction = rng.normal(size=(V, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=V)
        params.append({"freq": freq, "amplitude": amplitude,
                       "direction": direction, "phase": phase})
    return rest, params


def generate_synthetic_dataset(
    num_classes: int,
    samples_per_class: int,
    T: int,
    V: int,
    M: int = 1,
    seed: int = 0,
    noise_std: float = 0.02,
    rotation_max_deg: float = 40.0,
    phase_max: float = np.pi / 4,
    scale_range: tuple[float, float] = (0.9, 1.1),
) -> list[SkeletonSequence]:
    """Deterministic labelled dataset of ``num_classes * samples_per_class``
    sequences of shape [3, T, V, M]. Bodies beyond the first repeat the motion
    at an offset so M > 1 stays meaningful.
    """
    if min(num_classes, samples_per_class, T, V, M) < 1:
        raise ValueError("all counts must be >= 1")
    rng = np.random.default_rng(seed)
    rest, params = _class_params(rng, num_classes, T, V)
    t_grid = np.arange(T) / T

    dataset = []
    for c in range(num_classes):
        p = params[c]
        for s in range(samples_per_class):
            theta = rng.uniform(-phase_max, phase_max)
            rot = _rotation_matrix(
                rng.normal(size=3) / max(np.linalg.norm(rng.normal(size=3)), 1e-9),
                np.deg2rad(rng.uniform(-rotation_max_deg, rotation_max_deg)))
            scale = rng.uniform(*scale_range)
            data = np.zeros((3, T, V, M), dtype=np.float64)
            for m in range(M):
                offset = np.array([2.5 * m, 0.0, 0.0])
                # [T, V] oscillation per joint, expanded along direction vectors
                wave = np.sin(2.0 * np.pi * p["freq"] * t_grid[:, None]
                              + p["phase"][None, :] + theta)
                traj = (rest[None, :, :] + offset
                        + p["amplitude"][None, :, None] * wave[:, :, None]
                        * p["direction"][None, :, :])
                data[:, :, :, m] = np.transpose(traj, (2, 0, 1))
            data = scale * np.einsum("ij,jtvm->itvm", rot, data)
            if noise_std > 0:
                data = data + rng.normal(0.0, noise_std, size=data.shape)
            dataset.append(SkeletonSequence(
                data=data.astype(np.float32), label=c,
                source_id=f"synth_c{c:02d}_s{s:04d}"))
    return dataset


def generate_detection_clips(
    num_classes: int,
    num_clips: int,
    T: int,
    V: int,
    M: int = 1,
    seed: int = 0,
    segments_per_clip: tuple[int, int] = (1, 3),
    segment_len: tuple[int, int] = (8, 16),
    noise_std: float = 0.02,
) -> list[SkeletonSequence]:
    """Clips of idle background with planted action segments and frame labels.

    The background class index is ``num_classes`` (last). Frames inside a
    planted segment follow that class's motion family; background frames hold
    a noisy rest pose.
    """
    rng = np.random.default_rng(seed)
    rest, params = _class_params(rng, num_classes, T, V)
    background = num_classes

    clips = []
    for i in range(num_clips):
        data = np.zeros((3, T, V, M), dtype=np.float64)
        base = np.transpose(rest, (1, 0))[:, None, :, None]  # [3, 1, V, 1]
        data += base
        frame_labels = np.full(T, background, dtype=np.int64)

        num_segments = int(rng.integers(segments_per_clip[0],
                                        segments_per_clip[1] + 1))
        cursor = 0
        for _ in range(num_segments):
            length = int(rng.integers(segment_len[0], segment_len[1] + 1))
            gap = int(rng.integers(2, 6))
            start = cursor + gap
            end = start + length - 1  # inclusive
            if end >= T - 1:
                break
            c = int(rng.integers(0, num_classes))
            p = params[c]
            local_t = (np.arange(length) / max(length, 1))
            wave = np.sin(2.0 * np.pi * p["freq"] * local_t[:, None]
                          + p["phase"][None, :])
            traj = (rest[None, :, :]
                    + p["amplitude"][None, :, None] * wave[:, :, None]
                    * p["direction"][None, :, :])
            for m in range(M):
                data[:, start:end + 1, :, m] = np.transpose(traj, (2, 0, 1))
            frame_labels[start:end + 1] = c
            cursor = end + 1
        if noise_std > 0:
            data = data + rng.normal(0.0, noise_std, size=data.shape)
        clips.append(SkeletonSequence(
            data=data.astype(np.float32), label=None, frame_labels=frame_labels,
            source_id=f"clip_{i:04d}"))
    return clips
