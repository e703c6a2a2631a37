"""Detection pipeline tests: segments, IoU, greedy matching vs brute force."""

import numpy as np
import pytest
import torch

import oracle_map
from usdrl.config import ModelConfig
from usdrl.dste import build_backbone
from usdrl.eval import (
    DetectionSegment,
    FrameDetector,
    average_precision,
    compute_map,
    detect_frames,
    ensemble_scores,
    segments_from_frames,
    segments_from_labels,
    temporal_iou,
    train_frame_detector,
)
from usdrl.skdata import generate_detection_clips


def seg(start, end, label, conf=1.0):
    return DetectionSegment(start_frame=start, end_frame=end, label=label,
                            confidence=conf)


class TestSegmentsFromFrames:
    def _scores(self, labels, num_classes):
        scores = np.full((len(labels), num_classes + 1), 0.1)
        for t, c in enumerate(labels):
            scores[t, c] = 0.9
        return scores / scores.sum(axis=1, keepdims=True)

    def test_background_bounded_run(self):
        scores = self._scores([2, 0, 0, 2], num_classes=2)  # background = 2
        segments = segments_from_frames(scores)
        assert len(segments) == 1
        assert (segments[0].start_frame, segments[0].end_frame) == (1, 2)
        assert segments[0].label == 0

    def test_all_background(self):
        scores = self._scores([2, 2, 2], num_classes=2)
        assert segments_from_frames(scores) == []

    def test_run_splitting(self):
        scores = self._scores([0, 0, 2, 0], num_classes=2)
        segments = segments_from_frames(scores)
        assert [(s.start_frame, s.end_frame) for s in segments] == [(0, 1), (3, 3)]

    def test_confidence_is_mean_probability(self):
        scores = np.array([[0.6, 0.3, 0.1], [0.8, 0.1, 0.1], [0.1, 0.1, 0.8]])
        segments = segments_from_frames(scores)
        assert len(segments) == 1
        assert segments[0].confidence == pytest.approx(0.7)

    def test_exhaustive_non_overlapping(self):
        rng = np.random.default_rng(0)
        scores = rng.dirichlet(np.ones(4), size=30)
        segments = segments_from_frames(scores)
        covered = np.zeros(30, dtype=int)
        labels = scores.argmax(axis=1)
        for s in segments:
            covered[s.start_frame:s.end_frame + 1] += 1
        assert np.all(covered[labels != 3] == 1)
        assert np.all(covered[labels == 3] == 0)


class TestIoU:
    def test_exact_overlap(self):
        assert temporal_iou(seg(10, 20, 0), seg(10, 20, 0)) == 1.0

    def test_disjoint(self):
        assert temporal_iou(seg(0, 9, 0), seg(10, 20, 0)) == 0.0

    def test_half_overlap(self):
        # [0,9] vs [5,14]: intersection 5 frames, union 15
        assert temporal_iou(seg(0, 9, 0), seg(5, 14, 0)) == pytest.approx(1 / 3)


class TestComputeMap:
    def test_perfect_match(self):
        preds = {"v": [seg(10, 20, 0, 0.9)]}
        gt = {"v": [seg(10, 20, 0)]}
        assert compute_map(preds, gt, 0.5) == (1.0, 1.0)

    def test_disjoint_prediction(self):
        preds = {"v": [seg(0, 9, 0, 0.9)]}
        gt = {"v": [seg(10, 20, 0)]}
        assert compute_map(preds, gt, 0.5) == (0.0, 0.0)

    def test_duplicate_prediction_counts_as_fp(self):
        preds = {"v": [seg(0, 9, 0, 0.9), seg(0, 9, 0, 0.8)]}
        gt = {"v": [seg(0, 9, 0)]}
        map_a, map_v = compute_map(preds, gt, 0.5)
        assert map_a == 1.0 and map_v == 1.0  # AP unaffected after first match

    def test_class_confusion_scores_zero(self):
        preds = {"v": [seg(0, 9, 1, 0.9)]}
        gt = {"v": [seg(0, 9, 0)]}
        map_a, _ = compute_map(preds, gt, 0.5)
        assert map_a == 0.0

    def test_prediction_order_invariance(self):
        rng = np.random.default_rng(1)
        preds = {"v": [seg(0, 5, 0, 0.9), seg(8, 12, 0, 0.7), seg(20, 25, 1, 0.8)],
                 "w": [seg(3, 9, 1, 0.6)]}
        gt = {"v": [seg(0, 5, 0), seg(9, 13, 0), seg(19, 26, 1)],
              "w": [seg(2, 8, 1)]}
        baseline = compute_map(preds, gt, 0.5)
        for _ in range(5):
            shuffled = {video: [segs[i] for i in rng.permutation(len(segs))]
                        for video, segs in preds.items()}
            assert compute_map(shuffled, gt, 0.5) == baseline

    def test_unmatched_gt_class_drags_mean(self):
        preds = {"v": [seg(0, 9, 0, 0.9)]}
        gt = {"v": [seg(0, 9, 0), seg(20, 29, 1)]}
        map_a, _ = compute_map(preds, gt, 0.5)
        assert map_a == pytest.approx(0.5)  # class 1 has AP 0

    def test_predictions_without_gt_get_zero_ap(self):
        preds = {"v": [seg(0, 9, 3, 0.9), seg(0, 9, 0, 0.9)]}
        gt = {"v": [seg(0, 9, 0)]}
        map_a, _ = compute_map(preds, gt, 0.5)
        assert map_a == pytest.approx(0.5)  # classes {0: 1.0, 3: 0.0}

    def test_better_prediction_never_decreases_ap(self):
        preds = {"v": [seg(0, 5, 0, 0.6)]}
        gt = {"v": [seg(0, 5, 0), seg(10, 15, 0)]}
        before, _ = compute_map(preds, gt, 0.5)
        preds["v"].append(seg(10, 15, 0, 0.9))
        after, _ = compute_map(preds, gt, 0.5)
        assert after >= before

    def test_invalid_threshold(self):
        with pytest.raises(ValueError, match="iou_threshold"):
            compute_map({}, {}, 0.0)

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(2)
        for trial in range(60):
            num_gt = int(rng.integers(0, 4))
            num_pred = int(rng.integers(0, 5 - min(num_gt, 4)) + 1)
            gt_segs, pred_segs = [], []
            for _ in range(num_gt):
                start = int(rng.integers(0, 30))
                gt_segs.append(seg(start, start + int(rng.integers(1, 10)),
                                   int(rng.integers(0, 2))))
            for _ in range(num_pred):
                start = int(rng.integers(0, 30))
                pred_segs.append(seg(start, start + int(rng.integers(1, 10)),
                                     int(rng.integers(0, 2)),
                                     float(rng.uniform(0.1, 1.0))))
            preds = {"v": pred_segs}
            gts = {"v": gt_segs}
            ours = compute_map(preds, gts, 0.5)
            expected = oracle_map.brute_force_map(preds, gts, 0.5)
            assert ours[0] == pytest.approx(expected[0], abs=1e-9), (trial, preds, gts)
            assert ours[1] == pytest.approx(expected[1], abs=1e-9), (trial, preds, gts)


class TestAveragePrecision:
    def test_all_true_positives(self):
        assert average_precision([1, 1, 1], 3) == 1.0

    def test_no_predictions(self):
        assert average_precision([], 2) == 0.0

    def test_interleaved(self):
        # TP, FP, TP over 2 GT: precision 1, 1/2, 2/3 at recall .5, .5, 1
        ap = average_precision([1, 0, 1], 2)
        assert ap == pytest.approx(0.5 * 1.0 + 0.5 * (2 / 3))


class TestEnsemble:
    def test_identical_inputs_unchanged(self):
        rng = np.random.default_rng(3)
        scores = rng.dirichlet(np.ones(4), size=6)
        fused = ensemble_scores([scores, scores.copy(), scores.copy()])
        assert np.allclose(fused, scores)

    def test_majority_by_mean(self):
        confident_1 = np.array([[0.1, 0.8, 0.1]])
        confident_2 = np.array([[0.1, 0.1, 0.8]])
        fused = ensemble_scores([confident_1, confident_1, confident_2])
        assert fused.argmax(axis=1)[0] == 1

    def test_rows_stay_stochastic(self):
        rng = np.random.default_rng(4)
        mats = [rng.dirichlet(np.ones(5), size=7) for _ in range(3)]
        fused = ensemble_scores(mats)
        assert np.allclose(fused.sum(axis=1), 1.0, atol=1e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shapes"):
            ensemble_scores([np.zeros((2, 3)), np.zeros((3, 3))])


class TestFrameDetector:
    def _clips(self):
        return generate_detection_clips(2, 6, T=16, V=4, seed=0)

    def test_scores_row_stochastic(self):
        backbone = build_backbone(
            ModelConfig(c_e=8, c_r=8, c_p=4, num_layers=1, num_heads=2), 16, 4, 1)
        clips = self._clips()
        detector = train_frame_detector(backbone, clips, num_classes=2, epochs=1)
        scores = detect_frames(detector, clips[0])
        assert scores.shape == (16, 3)
        assert np.allclose(scores.sum(axis=1), 1.0, atol=1e-5)

    def test_zero_head_gives_uniform_rows(self):
        backbone = build_backbone(
            ModelConfig(c_e=8, c_r=8, c_p=4, num_layers=1, num_heads=2), 16, 4, 1)
        detector = FrameDetector(backbone, num_classes=2)
        with torch.no_grad():
            detector.head.weight.zero_()
            detector.head.bias.zero_()
        scores = detect_frames(detector, self._clips()[0])
        assert np.allclose(scores, 1.0 / 3.0, atol=1e-6)

    def test_training_requires_frame_labels(self):
        backbone = build_backbone(
            ModelConfig(c_e=8, c_r=8, c_p=4, num_layers=1, num_heads=2), 16, 4, 1)
        clips = self._clips()
        clips[0].frame_labels = None
        with pytest.raises(ValueError, match="frame labels"):
            train_frame_detector(backbone, clips, num_classes=2, epochs=1)


def test_segments_from_labels_round_trip():
    labels = np.array([2, 0, 0, 2, 1, 1, 1, 2])
    segments = segments_from_labels(labels, background=2)
    assert [(s.start_frame, s.end_frame, s.label) for s in segments] == [
        (1, 2, 0), (4, 6, 1)]


def test_segment_validation():
    with pytest.raises(ValueError, match="start"):
        DetectionSegment(start_frame=5, end_frame=3, label=0)
    with pytest.raises(ValueError, match="confidence"):
        DetectionSegment(start_frame=0, end_frame=3, label=0, confidence=1.5)
