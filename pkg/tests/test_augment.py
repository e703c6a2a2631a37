"""Augmentation policy tests."""

import numpy as np
import pytest

from usdrl.config import AugmentConfig
from usdrl.skdata import SkeletonSequence, augment, make_views


def _seq(seed=0, t=12, v=6):
    rng = np.random.default_rng(seed)
    return SkeletonSequence(data=rng.normal(size=(3, t, v, 1)), label=4,
                            source_id="s")


def test_empty_policy_is_identity():
    seq = _seq()
    out = augment(seq, AugmentConfig.identity(), np.random.default_rng(0))
    assert np.array_equal(out.data, seq.data)
    assert out.label == seq.label


def test_rotation_preserves_pairwise_distances():
    seq = _seq(1)
    policy = AugmentConfig.identity()
    policy.rotation = True
    out = augment(seq, policy, np.random.default_rng(3))
    for t in range(seq.T):
        before = seq.data[:, t, :, 0].T  # [V, 3]
        after = out.data[:, t, :, 0].T
        d_before = np.linalg.norm(before[:, None] - before[None, :], axis=-1)
        d_after = np.linalg.norm(after[:, None] - after[None, :], axis=-1)
        assert np.allclose(d_after, d_before, rtol=1e-5, atol=1e-5)
    assert not np.allclose(out.data, seq.data)  # actually rotated


def test_full_length_crop_is_identity():
    seq = _seq(2)
    policy = AugmentConfig.identity()
    policy.crop = True
    policy.crop_min_ratio = policy.crop_max_ratio = 1.0
    out = augment(seq, policy, np.random.default_rng(0))
    assert np.array_equal(out.data, seq.data)


def test_crop_preserves_shape_and_label():
    seq = _seq(3)
    policy = AugmentConfig.identity()
    policy.crop = True
    out = augment(seq, policy, np.random.default_rng(1))
    assert out.data.shape == seq.data.shape
    assert out.label == seq.label


def test_crop_resamples_frame_labels():
    data = np.zeros((3, 8, 2, 1), dtype=np.float32)
    labels = np.array([0, 0, 1, 1, 1, 2, 2, 2])
    seq = SkeletonSequence(data=data, frame_labels=labels)
    policy = AugmentConfig.identity()
    policy.crop = True
    policy.crop_min_ratio = 0.5
    policy.crop_max_ratio = 0.5
    out = augment(seq, policy, np.random.default_rng(0))
    assert out.frame_labels is not None
    assert out.frame_labels.shape == (8,)
    assert set(out.frame_labels.tolist()) <= {0, 1, 2}


def test_deterministic_given_rng_state():
    seq = _seq(4)
    policy = AugmentConfig()
    a = augment(seq, policy, np.random.default_rng(42))
    b = augment(seq, policy, np.random.default_rng(42))
    assert np.array_equal(a.data, b.data)


def test_jitter_changes_data_but_not_shape():
    seq = _seq(5)
    policy = AugmentConfig.identity()
    policy.jitter = True
    out = augment(seq, policy, np.random.default_rng(0))
    assert out.data.shape == seq.data.shape
    assert not np.array_equal(out.data, seq.data)


def test_joint_dropout_zeroes_joints():
    seq = _seq(6)
    policy = AugmentConfig.identity()
    policy.joint_dropout = True
    policy.joint_dropout_p = 1.0
    out = augment(seq, policy, np.random.default_rng(0))
    assert np.all(out.data == 0.0)


def test_make_views_k_validation():
    seq = _seq(7)
    with pytest.raises(ValueError, match="K"):
        make_views(seq, 1, AugmentConfig.identity(), np.random.default_rng(0))


def test_make_views_identity_policy_equal():
    seq = _seq(8)
    views = make_views(seq, 3, AugmentConfig.identity(), np.random.default_rng(0))
    assert views.K == 3
    for view in views.views:
        assert np.array_equal(view.data, seq.data)


def test_make_views_nontrivial_policy_differs():
    seq = _seq(9)
    views = make_views(seq, 2, AugmentConfig(), np.random.default_rng(5))
    assert not np.array_equal(views.views[0].data, views.views[1].data)
