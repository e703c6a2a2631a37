"""Synthetic dataset generator tests."""

import numpy as np

from usdrl.skdata import generate_detection_clips, generate_synthetic_dataset


def test_counts_shapes_labels():
    ds = generate_synthetic_dataset(5, 20, T=32, V=8, M=1, seed=7)
    assert len(ds) == 100
    assert all(s.data.shape == (3, 32, 8, 1) for s in ds)
    assert sorted({s.label for s in ds}) == [0, 1, 2, 3, 4]
    assert sum(1 for s in ds if s.label == 2) == 20


def test_deterministic_given_seed():
    a = generate_synthetic_dataset(3, 4, T=16, V=4, M=1, seed=9)
    b = generate_synthetic_dataset(3, 4, T=16, V=4, M=1, seed=9)
    for x, y in zip(a, b):
        assert np.array_equal(x.data, y.data)
        assert x.label == y.label


def test_different_seeds_differ():
    a = generate_synthetic_dataset(2, 2, T=16, V=4, M=1, seed=1)
    b = generate_synthetic_dataset(2, 2, T=16, V=4, M=1, seed=2)
    assert not np.array_equal(a[0].data, b[0].data)


def test_interclass_distance_exceeds_intraclass():
    ds = generate_synthetic_dataset(2, 12, T=32, V=8, M=1, seed=3, noise_std=0.0)
    flat = {c: np.stack([s.data.flatten() for s in ds if s.label == c])
            for c in (0, 1)}
    intra = []
    for c in (0, 1):
        x = flat[c]
        for i in range(len(x)):
            for j in range(i + 1, len(x)):
                intra.append(np.linalg.norm(x[i] - x[j]))
    inter = [np.linalg.norm(a - b) for a in flat[0] for b in flat[1]]
    assert np.mean(inter) > np.mean(intra)


def test_multi_body_layout():
    ds = generate_synthetic_dataset(2, 1, T=8, V=4, M=2, seed=0, noise_std=0.0)
    seq = ds[0]
    assert seq.data.shape == (3, 8, 4, 2)
    # second body is the same motion at a spatial offset, so it must differ
    assert not np.allclose(seq.data[:, :, :, 0], seq.data[:, :, :, 1])


def test_detection_clips_have_frame_labels():
    clips = generate_detection_clips(5, 10, T=48, V=8, seed=4)
    assert len(clips) == 10
    background = 5
    for clip in clips:
        assert clip.frame_labels is not None
        assert clip.frame_labels.shape == (48,)
        assert clip.frame_labels.max() <= background
    # at least some planted non-background frames across the batch
    assert any((clip.frame_labels != background).any() for clip in clips)


def test_detection_clips_deterministic():
    a = generate_detection_clips(3, 5, T=32, V=4, seed=11)
    b = generate_detection_clips(3, 5, T=32, V=4, seed=11)
    for x, y in zip(a, b):
        assert np.array_equal(x.data, y.data)
        assert np.array_equal(x.frame_labels, y.frame_labels)
