"""Downstream evaluation protocols and diagnostics."""

from .detection import (
    DetectionSegment,
    FrameDetector,
    average_precision,
    compute_map,
    detect_frames,
    ensemble_scores,
    evaluate_detection,
    segments_from_frames,
    segments_from_labels,
    temporal_iou,
    train_frame_detector,
)
from .diagnostics import correlation_matrix, effective_rank
from .features import (
    extract_dense_temporal,
    extract_instance_features,
    extract_instance_projections,
)
from .probe import fit_linear_classifier, linear_probe, top1_accuracy
from .report import EvalReport
from .retrieval import cosine_rank, knn_retrieve
from .semi import SequenceClassifier, sample_fraction, semi_supervised_finetune

__all__ = [
    "DetectionSegment",
    "EvalReport",
    "FrameDetector",
    "SequenceClassifier",
    "average_precision",
    "compute_map",
    "correlation_matrix",
    "cosine_rank",
    "detect_frames",
    "effective_rank",
    "ensemble_scores",
    "evaluate_detection",
    "extract_dense_temporal",
    "extract_instance_features",
    "extract_instance_projections",
    "fit_linear_classifier",
    "knn_retrieve",
    "linear_probe",
    "sample_fraction",
    "segments_from_frames",
    "segments_from_labels",
    "semi_supervised_finetune",
    "temporal_iou",
    "top1_accuracy",
    "train_frame_detector",
]
