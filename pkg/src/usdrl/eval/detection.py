"""Frame-wise action detection: per-frame classification on the dense temporal
representation, segment extraction, and mAP at a temporal IoU threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import torch
from torch import nn

from ..dste import SkeletonBackbone
from ..skdata import SkeletonSequence
from ..train import collate_domains
from .report import EvalReport


@dataclass
class DetectionSegment:
    """One predicted or ground-truth action span (frame indices inclusive)."""

    start_frame: int
    end_frame: int
    label: int
    confidence: float = 1.0

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError(f"segment start {self.start_frame} > end {self.end_frame}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")

    @property
    def length(self) -> int:
        return self.end_frame - self.start_frame + 1


class FrameDetector(nn.Module):
    """Backbone plus a per-frame linear classifier on y_t rows."""

    def __init__(self, backbone: SkeletonBackbone, num_classes: int, seed: int = 0):
        super().__init__()
        self.backbone = backbone
        self.num_classes = num_classes  # foreground classes; background is last
        self.head = nn.Linear(backbone.cfg.c_r, num_classes + 1)
        g = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            self.head.weight.normal_(0.0, 0.01, generator=g)
            self.head.bias.zero_()

    def forward(self, x_t: torch.Tensor, x_s: torch.Tensor) -> torch.Tensor:
        return self.head(self.backbone(x_t, x_s).y_t)  # [B, T, C+1] logits


def train_frame_detector(backbone: SkeletonBackbone,
                         clips: Sequence[SkeletonSequence], num_classes: int,
                         epochs: int = 30, batch_size: int = 8,
                         lr: float = 1e-3, seed: int = 0) -> FrameDetector:
    """Fine-tune the whole model with per-frame cross-entropy."""
    for clip in clips:
        if clip.frame_labels is None:
            raise ValueError(
                f"clip {clip.source_id!r} lacks frame labels; detection training "
                "needs per-frame annotations")
    model = FrameDetector(backbone, num_classes, seed=seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    rng = np.random.default_rng(seed)
    model.train()
    for _ in range(epochs):
        order = rng.permutation(len(clips))
        for lo in range(0, len(clips), batch_size):
            batch = [clips[i] for i in order[lo:lo + batch_size]]
            x_t, x_s = collate_domains(batch)
            y = torch.from_numpy(np.stack([c.frame_labels for c in batch]))
            optimizer.zero_grad()
            logits = model(x_t, x_s)
            loss = nn.functional.cross_entropy(
                logits.reshape(-1, logits.shape[-1]), y.reshape(-1))
            loss.backward()
            optimizer.step()
    model.eval()
    return model


@torch.no_grad()
def detect_frames(model: FrameDetector, seq: SkeletonSequence) -> np.ndarray:
    """Row-stochastic per-frame class scores [T, num_classes + 1]."""
    model.eval()
    x_t, x_s = collate_domains([seq])
    logits = model(x_t, x_s).squeeze(0)
    return torch.softmax(logits, dim=-1).numpy()


def segments_from_frames(scores: np.ndarray,
                         background: int | None = None) -> list[DetectionSegment]:
    """Maximal runs of identical non-background argmax labels become segments;
    confidence is the mean winning-class probability over the run.
    """
    scores = np.asarray(scores)
    if scores.ndim != 2:
        raise ValueError(f"scores must be [T, C+1], got shape {scores.shape}")
    if background is None:
        background = scores.shape[1] - 1
    labels = scores.argmax(axis=1)
    segments = []
    t = 0
    T = scores.shape[0]
    while t < T:
        label = int(labels[t])
        start = t
        while t < T and labels[t] == label:
            t += 1
        if label != background:
            confidence = float(scores[start:t, label].mean())
            segments.append(DetectionSegment(start_frame=start, end_frame=t - 1,
                                             label=label, confidence=confidence))
    return segments


def temporal_iou(a: DetectionSegment, b: DetectionSegment) -> float:
    """Intersection frames over union frames, both counted inclusively."""
    inter = min(a.end_frame, b.end_frame) - max(a.start_frame, b.start_frame) + 1
    if inter <= 0:
        return 0.0
    union = a.length + b.length - inter
    return inter / union


def average_precision(tp_flags: Sequence[int], num_gt: int) -> float:
    """Area under the precision-recall curve with all-point interpolation."""
    if num_gt == 0:
        return 0.0
    if not tp_flags:
        return 0.0
    tp = np.cumsum(tp_flags)
    fp = np.cumsum([1 - f for f in tp_flags])
    precision = tp / (tp + fp)
    recall = tp / num_gt
    mprec = np.concatenate([[0.0], precision, [0.0]])
    mrec = np.concatenate([[0.0], recall, [1.0]])
    for i in range(len(mprec) - 2, -1, -1):
        mprec[i] = max(mprec[i], mprec[i + 1])
    idx = np.where(mrec[1:] != mrec[:-1])[0] + 1
    return float(np.sum((mrec[idx] - mrec[idx - 1]) * mprec[idx]))


def _sort_key(item: tuple[str, DetectionSegment]):
    video, seg = item
    return (-seg.confidence, video, seg.start_frame, seg.end_frame, seg.label)


def _match_flags(predictions: list[tuple[str, DetectionSegment]],
                 ground_truth: Mapping[str, Sequence[DetectionSegment]],
                 iou_threshold: float) -> list[int]:
    """Greedy matching by descending confidence; each GT segment matches at
    most one prediction (highest IoU among available, first on ties).
    """
    matched: dict[tuple[str, int], bool] = {}
    flags = []
    for video, pred in sorted(predictions, key=_sort_key):
        best_iou, best_key = 0.0, None
        for j, gt in enumerate(ground_truth.get(video, [])):
            if gt.label != pred.label or matched.get((video, j)):
                continue
            iou = temporal_iou(pred, gt)
            if iou >= iou_threshold and iou > best_iou:
                best_iou, best_key = iou, (video, j)
        if best_key is not None:
            matched[best_key] = True
            flags.append(1)
        else:
            flags.append(0)
    return flags


def compute_map(predictions: Mapping[str, Sequence[DetectionSegment]],
                ground_truth: Mapping[str, Sequence[DetectionSegment]],
                iou_threshold: float = 0.5) -> tuple[float, float]:
    """(mAP over action classes pooling videos, mean per-video AP).

    A prediction matches an unmatched same-class ground-truth segment with
    temporal IoU >= threshold; matching is greedy by descending confidence.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold}")

    classes = {s.label for segs in ground_truth.values() for s in segs}
    classes |= {s.label for segs in predictions.values() for s in segs}
    aps = []
    for c in sorted(classes):
        preds_c = [(video, s) for video, segs in predictions.items()
                   for s in segs if s.label == c]
        gt_c = {video: [s for s in segs if s.label == c]
                for video, segs in ground_truth.items()}
        num_gt = sum(len(v) for v in gt_c.values())
        flags = _match_flags(preds_c, gt_c, iou_threshold)
        aps.append(average_precision(flags, num_gt))
    map_a = float(np.mean(aps)) if aps else 0.0

    video_aps = []
    for video in sorted(set(ground_truth) | set(predictions)):
        gt_v = {video: list(ground_truth.get(video, []))}
        preds_v = [(video, s) for s in predictions.get(video, [])]
        num_gt = len(gt_v[video])
        if num_gt == 0 and not preds_v:
            continue
        flags = _match_flags(preds_v, gt_v, iou_threshold)
        video_aps.append(average_precision(flags, num_gt))
    map_v = float(np.mean(video_aps)) if video_aps else 0.0
    return map_a, map_v


def segments_from_labels(frame_labels: np.ndarray,
                         background: int) -> list[DetectionSegment]:
    """Ground-truth segments from a frame-label track."""
    T = len(frame_labels)
    segments = []
    t = 0
    while t < T:
        label = int(frame_labels[t])
        start = t
        while t < T and frame_labels[t] == label:
            t += 1
        if label != background:
            segments.append(DetectionSegment(start_frame=start, end_frame=t - 1,
                                             label=label, confidence=1.0))
    return segments


def ensemble_scores(score_matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Unweighted mean of row-stochastic score matrices (3-stream fusion)."""
    if not score_matrices:
        raise ValueError("need at least one score matrix")
    first = np.asarray(score_matrices[0])
    for m in score_matrices[1:]:
        if np.asarray(m).shape != first.shape:
            raise ValueError(
                f"score shapes differ: {np.asarray(m).shape} vs {first.shape}")
    return np.mean([np.asarray(m) for m in score_matrices], axis=0)


def evaluate_detection(model: FrameDetector,
                       clips: Sequence[SkeletonSequence],
                       iou_threshold: float = 0.5,
                       config_digest: str = "",
                       checkpoint_digest: str = "") -> EvalReport:
    """Run detection over clips with frame labels and report mAP_a / mAP_v."""
    predictions = {}
    ground_truth = {}
    background = model.num_classes
    frame_hits = 0
    frame_total = 0
    for clip in clips:
        if clip.frame_labels is None:
            raise ValueError(f"clip {clip.source_id!r} lacks frame labels")
        scores = detect_frames(model, clip)
        predictions[clip.source_id] = segments_from_frames(scores, background)
        ground_truth[clip.source_id] = segments_from_labels(clip.frame_labels,
                                                            background)
        frame_hits += int((scores.argmax(axis=1) == clip.frame_labels).sum())
        frame_total += clip.T
    map_a, map_v = compute_map(predictions, ground_truth, iou_threshold)
    metrics = {"mAP_a": map_a, "mAP_v": map_v,
               "frame_accuracy": frame_hits / max(frame_total, 1),
               "iou_threshold": iou_threshold}
    details = {
        "predictions": {
            video: [[s.label, s.start_frame, s.end_frame, s.confidence]
                    for s in segs]
            for video, segs in predictions.items()
        },
    }
    return EvalReport(task="detection", metrics=metrics,
                      config_digest=config_digest,
                      checkpoint_digest=checkpoint_digest, details=details)
