"""Command-line entry point: pretrain, probe, retrieve, finetune, detect,
gradcheck, synth, plot.

Every run writes its resolved configuration into the output directory so the
run is reproducible from that file alone. Config overrides use dotted paths
after the flags, e.g. ``usdrl pretrain --config cfg.json loss.lambda=0.01``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import torch

from . import fdloss  # noqa: F401  (re-exported for library users)
from .checkpoint import config_digest, file_digest
from .config import ExperimentConfig
from .errors import UsdrlError
from .eval import (
    EvalReport,
    correlation_matrix,
    evaluate_detection,
    extract_instance_projections,
    knn_retrieve,
    linear_probe,
    semi_supervised_finetune,
    train_frame_detector,
)
from .gradcheck import COMPONENTS, DEFAULT_TOLERANCE, run_suite
from .skdata import (
    generate_detection_clips,
    generate_synthetic_dataset,
    load_dataset,
    save_dataset,
)
from .train import load_pretrain_model, pretrain


def _data_root(value: str | None) -> Path:
    if value:
        return Path(value)
    env = os.environ.get("USDRL_DATA_DIR")
    if env:
        return Path(env)
    raise UsdrlError("no data directory: pass --data or set USDRL_DATA_DIR")


def _load_config(args) -> ExperimentConfig:
    cfg = (ExperimentConfig.load(args.config) if getattr(args, "config", None)
           else ExperimentConfig())
    overrides = list(getattr(args, "overrides", []) or [])
    if overrides:
        cfg = cfg.apply_overrides(overrides)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.apply_overrides([f"model.seed={args.seed}",
                                   f"train.seed={args.seed}"])
    return cfg


def _echo_config(out_dir: Path, command: str, args, cfg: ExperimentConfig) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = {
        "command": command,
        "args": {k: (str(v) if isinstance(v, Path) else v)
                 for k, v in vars(args).items() if k != "func"},
        "config": cfg.to_dict(),
    }
    (out_dir / "resolved_config.json").write_text(
        json.dumps(resolved, indent=2, sort_keys=True) + "\n")
    return resolved


def _report_meta(resolved: dict, ckpt_path) -> dict:
    return {"config_digest": config_digest(resolved),
            "checkpoint_digest": file_digest(ckpt_path) if ckpt_path else ""}


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    resolved = _echo_config(out, "synth", args, cfg)
    total = args.per_class + args.test_per_class
    dataset = generate_synthetic_dataset(
        args.classes, total, T=args.frames, V=args.joints, M=args.bodies,
        seed=args.seed if args.seed is not None else cfg.model.seed)
    train, test = [], []
    for seq in dataset:
        index = int(seq.source_id.rsplit("s", 1)[1])
        (train if index < args.per_class else test).append(seq)
    save_dataset(train, out / "train")
    save_dataset(test, out / "test")
    meta = {"classes": args.classes, "train_per_class": args.per_class,
            "test_per_class": args.test_per_class, "frames": args.frames,
            "joints": args.joints, "bodies": args.bodies}
    if args.detection:
        seed = args.seed if args.seed is not None else cfg.model.seed
        clips_train = generate_detection_clips(
            args.classes, args.clips, T=args.frames, V=args.joints,
            M=args.bodies, seed=seed)
        clips_test = generate_detection_clips(
            args.classes, max(args.clips // 4, 1), T=args.frames, V=args.joints,
            M=args.bodies, seed=seed + 1)
        save_dataset(clips_train, out / "clips_train")
        save_dataset(clips_test, out / "clips_test")
        meta["clips_train"] = len(clips_train)
        meta["clips_test"] = len(clips_test)
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(train)} train / {len(test)} test sequences to {out}")
    return 0


def cmd_pretrain(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    _echo_config(out, "pretrain", args, cfg)
    dataset = load_dataset(_data_root(args.data) / "train")
    ckpt = pretrain(dataset, cfg, out)
    print(f"checkpoint: {ckpt}")
    return 0


def _load_eval_inputs(args):
    model, cfg, _dims = load_pretrain_model(args.ckpt)
    root = _data_root(args.data)
    train = load_dataset(root / "train")
    test = load_dataset(root / "test")
    return model, cfg, train, test


def cmd_probe(args) -> int:
    model, cfg, train, test = _load_eval_inputs(args)
    out = Path(args.out)
    resolved = _echo_config(out, "probe", args, cfg)
    meta = _report_meta(resolved, args.ckpt)
    report = linear_probe(model.backbone, train, test, epochs=args.epochs,
                          seed=cfg.train.seed, **meta)
    report.save(out / "report.json")
    print(f"probe top1={report.metrics['top1']:.4f}")
    return 0


def cmd_retrieve(args) -> int:
    model, cfg, train, test = _load_eval_inputs(args)
    out = Path(args.out)
    resolved = _echo_config(out, "retrieve", args, cfg)
    meta = _report_meta(resolved, args.ckpt)
    report = knn_retrieve(model.backbone, train, test, k=args.k, **meta)
    report.save(out / "report.json")
    print(f"retrieval top1={report.metrics['top1']:.4f}")
    return 0


def cmd_finetune(args) -> int:
    model, cfg, train, test = _load_eval_inputs(args)
    out = Path(args.out)
    resolved = _echo_config(out, "finetune", args, cfg)
    meta = _report_meta(resolved, args.ckpt)
    report = semi_supervised_finetune(
        model.backbone, args.fraction, train, test, epochs=args.epochs,
        seed=cfg.train.seed, **meta)
    report.save(out / "report.json")
    print(f"finetune top1={report.metrics['top1']:.4f} "
          f"({int(report.metrics['num_labelled'])} labelled)")
    return 0


def cmd_detect(args) -> int:
    model, cfg, _dims = load_pretrain_model(args.ckpt)
    root = _data_root(args.data)
    clips_train = load_dataset(root / "clips_train")
    clips_test = load_dataset(root / "clips_test")
    out = Path(args.out)
    resolved = _echo_config(out, "detect", args, cfg)
    meta = _report_meta(resolved, args.ckpt)
    background = max(int(c.frame_labels.max()) for c in clips_train)
    detector = train_frame_detector(model.backbone, clips_train,
                                    num_classes=background, epochs=args.epochs,
                                    seed=cfg.train.seed)
    report = evaluate_detection(detector, clips_test, iou_threshold=args.iou,
                                **meta)
    report.save(out / "report.json")
    lines = []
    for video, segs in report.details["predictions"].items():
        for label, start, end, conf in segs:
            lines.append(f"{video} {label} {start} {end} {conf:.6f}")
    (out / "predictions.txt").write_text("\n".join(lines) + ("\n" if lines else ""))
    print(f"detection mAP_a={report.metrics['mAP_a']:.4f} "
          f"mAP_v={report.metrics['mAP_v']:.4f}")
    return 0


def cmd_gradcheck(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out) if args.out else None
    components = args.components.split(",") if args.components else None
    reports = run_suite(components, tolerance=args.tol,
                        seed=cfg.model.seed)
    all_lines = []
    for report in reports:
        all_lines.extend(report.lines())
    text = "\n".join(all_lines)
    print(text)
    if out:
        _echo_config(out, "gradcheck", args, cfg)
        (out / "gradcheck.txt").write_text(text + "\n")
    return 0 if all(r.passed for r in reports) else 1


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    made = []
    if args.metrics:
        totals: dict[str, list[tuple[int, float]]] = {}
        for line in Path(args.metrics).read_text().splitlines():
            fields = dict(part.split("=", 1) for part in line.split())
            if fields.get("term") != "total":
                continue
            totals.setdefault(fields["domain"], []).append(
                (int(fields["step"]), float(fields["value"])))
        fig, ax = plt.subplots(figsize=(7, 4))
        for domain, points in sorted(totals.items()):
            points.sort()
            ax.plot([p[0] for p in points], [p[1] for p in points], label=domain)
        ax.set_xlabel("step")
        ax.set_ylabel("loss")
        ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        path = out / "loss_curves.png"
        fig.savefig(path)
        plt.close(fig)
        made.append(path)
    if args.ckpt and args.data:
        model, _cfg, _dims = load_pretrain_model(args.ckpt)
        dataset = load_dataset(_data_root(args.data) / "train")
        z = extract_instance_projections(model, dataset)
        corr = correlation_matrix(z)
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(corr, vmin=-1, vmax=1, cmap="coolwarm")
        fig.colorbar(im, ax=ax)
        ax.set_title("instance projection correlation")
        fig.tight_layout()
        path = out / "correlation_matrix.png"
        fig.savefig(path)
        plt.close(fig)
        made.append(path)
    if not made:
        raise UsdrlError("plot needs --metrics and/or (--ckpt with --data)")
    print("wrote " + ", ".join(str(p) for p in made))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usdrl",
        description="skeleton representation learning via feature decorrelation")
    parser.add_argument("--threads", type=int, default=None,
                        help="torch thread count (fixed count => deterministic)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ckpt=False, data=False, out=True, config=False, overrides=False):
        if config:
            p.add_argument("--config", type=Path, default=None,
                           help="JSON config with model/loss/train/augment sections")
        if ckpt:
            p.add_argument("--ckpt", type=Path, required=True)
        if data:
            p.add_argument("--data", type=Path, default=None,
                           help="dataset root (default: $USDRL_DATA_DIR)")
        if out:
            p.add_argument("--out", type=Path, required=True)
        p.add_argument("--seed", type=int, default=None)
        if overrides:
            p.add_argument("overrides", nargs="*", metavar="section.key=value",
                           help="config overrides, e.g. loss.lambda=0.01")

    p = sub.add_parser("synth", help="generate the synthetic dataset")
    common(p, config=True, overrides=False)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--test-per-class", type=int, default=20)
    p.add_argument("--frames", type=int, default=48)
    p.add_argument("--joints", type=int, default=8)
    p.add_argument("--bodies", type=int, default=1)
    p.add_argument("--detection", action="store_true",
                   help="also generate frame-labelled detection clips")
    p.add_argument("--clips", type=int, default=80)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pretrain", help="self-supervised pretraining")
    common(p, data=True, config=True, overrides=True)
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("probe", help="frozen-encoder linear probe")
    common(p, ckpt=True, data=True)
    p.add_argument("--epochs", type=int, default=200)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("retrieve", help="cosine nearest-neighbour retrieval")
    common(p, ckpt=True, data=True)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("finetune", help="semi-supervised fine-tuning")
    common(p, ckpt=True, data=True)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=20)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("detect", help="frame-wise detection with mAP@IoU")
    common(p, ckpt=True, data=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--iou", type=float, default=0.5)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    common(p, out=False, config=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--components", type=str, default=None,
                   help=f"comma-separated subset of {','.join(COMPONENTS)}")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("plot", help="loss curves and correlation heatmaps")
    common(p, out=True)
    p.add_argument("--metrics", type=Path, default=None)
    p.add_argument("--ckpt", type=Path, default=None)
    p.add_argument("--data", type=Path, default=None)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads:
        torch.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (UsdrlError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
