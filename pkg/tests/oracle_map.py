"""Independent brute-force matcher and AP computation for detection metrics.

Enumerates every injective assignment of predictions to ground-truth segments
and selects the one the confidence-greedy criterion defines lexicographically,
then integrates the precision-recall curve directly. No code shared with the
package implementation.
"""

import itertools

import numpy as np


def iou(a, b):
    inter = min(a.end_frame, b.end_frame) - max(a.start_frame, b.start_frame) + 1
    if inter <= 0:
        return 0.0
    union = a.length + b.length - inter
    return inter / union


def _sorted_predictions(predictions):
    items = [(video, seg) for video, segs in predictions.items() for seg in segs]
    return sorted(items, key=lambda x: (-x[1].confidence, x[0], x[1].start_frame,
                                        x[1].end_frame, x[1].label))


def _assignments(preds, gt_items, threshold):
    """Yield every injective assignment; each entry is a tuple of GT indices or
    None per prediction, valid only when class/video match and IoU passes.
    """
    options = []
    for video, pred in preds:
        valid = [None]
        for idx, (gt_video, gt) in enumerate(gt_items):
            if gt_video == video and gt.label == pred.label \
                    and iou(pred, gt) >= threshold:
                valid.append(idx)
        options.append(valid)
    for combo in itertools.product(*options):
        used = [c for c in combo if c is not None]
        if len(used) == len(set(used)):
            yield combo


def brute_force_flags(predictions, ground_truth, threshold):
    """TP flags per confidence-sorted prediction under the greedy criterion,
    found by exhaustive search: maximize ((tp, iou)) lexicographically.
    """
    preds = _sorted_predictions(predictions)
    gt_items = [(video, seg) for video, segs in ground_truth.items()
                for seg in segs]
    best_combo, best_key = None, None
    for combo in _assignments(preds, gt_items, threshold):
        key = []
        for (video, pred), choice in zip(preds, combo):
            if choice is None:
                key.append((0, 0.0, 0))
            else:
                # ties on IoU resolve to the earliest ground-truth segment
                key.append((1, iou(pred, gt_items[choice][1]), -choice))
        key = tuple(key)
        if best_key is None or key > best_key:
            best_key, best_combo = key, combo
    if best_combo is None:
        return [0] * len(preds)
    return [0 if c is None else 1 for c in best_combo]


def brute_force_ap(flags, num_gt):
    """All-point interpolated AP via direct max-to-the-right integration."""
    if num_gt == 0 or not flags:
        return 0.0
    points = []
    tp = fp = 0
    for f in flags:
        tp += f
        fp += 1 - f
        points.append((tp / num_gt, tp / (tp + fp)))
    area = 0.0
    prev_recall = 0.0
    for recall, _ in points:
        if recall <= prev_recall:
            continue
        best_prec = max(p for r, p in points if r >= recall)
        area += (recall - prev_recall) * best_prec
        prev_recall = recall
    return area


def brute_force_map(predictions, ground_truth, threshold):
    """(mAP over classes pooling videos, mean per-video AP)."""
    classes = sorted({s.label for segs in ground_truth.values() for s in segs}
                     | {s.label for segs in predictions.values() for s in segs})
    aps = []
    for c in classes:
        preds_c = {v: [s for s in segs if s.label == c]
                   for v, segs in predictions.items()}
        gt_c = {v: [s for s in segs if s.label == c]
                for v, segs in ground_truth.items()}
        flags = brute_force_flags(preds_c, gt_c, threshold)
        num_gt = sum(len(v) for v in gt_c.values())
        aps.append(brute_force_ap(flags, num_gt))
    map_a = float(np.mean(aps)) if aps else 0.0

    video_aps = []
    for video in sorted(set(ground_truth) | set(predictions)):
        preds_v = {video: list(predictions.get(video, []))}
        gt_v = {video: list(ground_truth.get(video, []))}
        if not gt_v[video] and not preds_v[video]:
            continue
        flags = brute_force_flags(preds_v, gt_v, threshold)
        video_aps.append(brute_force_ap(flags, len(gt_v[video])))
    map_v = float(np.mean(video_aps)) if video_aps else 0.0
    return map_a, map_v
