"""Skeleton sequence data model, binary container I/O, and domain reshaping.

A sequence is a real tensor of shape ``[C_in, T, V, M]``: coordinate channels,
frames, joints, bodies. Absent bodies are zero-filled.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import ShapeError, SkeletonFormatError

MAGIC = b"SKEL1"


@dataclass
class SkeletonSequence:
    """One skeleton clip with optional sequence-level and frame-level labels."""

    data: np.ndarray  # [C_in, T, V, M], float32
    label: Optional[int] = None
    frame_labels: Optional[np.ndarray] = None  # [T] int, background = num_classes
    source_id: str = ""

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 4:
            raise ShapeError(
                f"skeleton data must be [C_in, T, V, M], got shape {self.data.shape}")
        if min(self.data.shape) < 1:
            raise ShapeError(f"all axes must be >= 1, got shape {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise ValueError(f"sequence {self.source_id!r} contains NaN/Inf entries")
        if self.frame_labels is not None:
            self.frame_labels = np.asarray(self.frame_labels, dtype=np.int64)
            if self.frame_labels.shape != (self.T,):
                raise ShapeError(
                    f"frame_labels length {self.frame_labels.shape} != T={self.T}")

    @property
    def c_in(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]

    @property
    def V(self) -> int:
        return self.data.shape[2]

    @property
    def M(self) -> int:
        return self.data.shape[3]

    def copy(self) -> "SkeletonSequence":
        return SkeletonSequence(
            data=self.data.copy(),
            label=self.label,
            frame_labels=None if self.frame_labels is None else self.frame_labels.copy(),
            source_id=self.source_id,
        )


@dataclass
class SkeletonEdgeSet:
    """Bone topology as (child, parent) joint index pairs over V joints."""

    edges: list[tuple[int, int]]
    num_joints: int

    def __post_init__(self):
        seen = set()
        for child, parent in self.edges:
            if not (0 <= child < self.num_joints and 0 <= parent < self.num_joints):
                raise ValueError(
                    f"edge ({child},{parent}) out of range for V={self.num_joints}")
            if child in seen:
                raise ValueError(f"joint {child} appears as child twice (not a forest)")
            seen.add(child)

    def roots(self) -> list[int]:
        children = {c for c, _ in self.edges}
        return [v for v in range(self.num_joints) if v not in children]


@dataclass
class AugmentedViews:
    """K stochastic views of one source sequence."""

    views: list[SkeletonSequence] = field(default_factory=list)

    def __post_init__(self):
        if len(self.views) < 2:
            raise ValueError(f"need K >= 2 views, got {len(self.views)}")
        shape = self.views[0].data.shape
        for v in self.views[1:]:
            if v.data.shape != shape:
                raise ShapeError("all views must share the source tensor shape")

    @property
    def K(self) -> int:
        return len(self.views)


def reshape_domains(seq: SkeletonSequence) -> tuple[np.ndarray, np.ndarray]:
    """Flatten one sequence into its temporal and spatial domain matrices.

    Returns ``X_t`` of shape ``[T, M*V*C_in]`` (row t flattens frame t in
    (m, v, c) order) and ``X_s`` of shape ``[M*V, T*C_in]`` (row m*V+v
    flattens joint v of body m in (t, c) order). Both are pure permutations
    of the input entries.
    """
    c, t, v, m = seq.data.shape
    x_t = np.transpose(seq.data, (1, 3, 2, 0)).reshape(t, m * v * c)
    x_s = np.transpose(seq.data, (3, 2, 1, 0)).reshape(m * v, t * c)
    return np.ascontiguousarray(x_t), np.ascontiguousarray(x_s)


def unreshape_temporal(x_t: np.ndarray, c_in: int, v: int, m: int) -> np.ndarray:
    """Invert the temporal flattening back to a [C_in, T, V, M] tensor."""
    t = x_t.shape[0]
    if x_t.shape[1] != m * v * c_in:
        raise ShapeError(f"X_t width {x_t.shape[1]} != M*V*C_in = {m * v * c_in}")
    return np.ascontiguousarray(
        np.transpose(x_t.reshape(t, m, v, c_in), (3, 0, 2, 1)))


def unreshape_spatial(x_s: np.ndarray, c_in: int, v: int, m: int) -> np.ndarray:
    """Invert the spatial flattening back to a [C_in, T, V, M] tensor."""
    if x_s.shape[0] != m * v:
        raise ShapeError(f"X_s rows {x_s.shape[0]} != M*V = {m * v}")
    if x_s.shape[1] % c_in != 0:
        raise ShapeError("X_s width is not a multiple of C_in")
    t = x_s.shape[1] // c_in
    return np.ascontiguousarray(
        np.transpose(x_s.reshape(m, v, t, c_in), (3, 2, 1, 0)))


def save_sequence(seq: SkeletonSequence, path) -> Path:
    """Write the binary container: magic, dims, optional label, float32 data."""
    path = Path(path)
    payload = [MAGIC, struct.pack("<4I", seq.c_in, seq.T, seq.V, seq.M)]
    if seq.label is not None:
        payload.append(struct.pack("<Bi", 1, int(seq.label)))
    else:
        payload.append(struct.pack("<B", 0))
    payload.append(np.ascontiguousarray(seq.data, dtype="<f4").tobytes())
    path.write_bytes(b"".join(payload))
    if seq.frame_labels is not None:
        frame_path = path.with_suffix(path.suffix + ".frames")
        frame_path.write_text(" ".join(str(int(x)) for x in seq.frame_labels) + "\n")
    return path


def load_sequence(path) -> SkeletonSequence:
    """Read a binary container written by :func:`save_sequence`."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise SkeletonFormatError(f"{path}: bad magic bytes")
    offset = len(MAGIC)
    c_in, t, v, m = struct.unpack_from("<4I", blob, offset)
    offset += 16
    (flag,) = struct.unpack_from("<B", blob, offset)
    offset += 1
    label = None
    if flag == 1:
        (label,) = struct.unpack_from("<i", blob, offset)
        offset += 4
    elif flag != 0:
        raise SkeletonFormatError(f"{path}: label flag must be 0 or 1, got {flag}")
    count = c_in * t * v * m
    expected = offset + 4 * count
    if len(blob) != expected:
        raise SkeletonFormatError(
            f"{path}: payload has {len(blob) - offset} bytes, expected {4 * count}")
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
    data = data.reshape(c_in, t, v, m).copy()
    frame_labels = None
    frame_path = path.with_suffix(path.suffix + ".frames")
    if frame_path.exists():
        frame_labels = np.array(
            [int(x) for x in frame_path.read_text().split()], dtype=np.int64)
    return SkeletonSequence(data=data, label=label, frame_labels=frame_labels,
                            source_id=path.stem)


def save_dataset(dataset: Sequence[SkeletonSequence], out_dir) -> Path:
    """Write one container per sequence into a directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for seq in dataset:
        if not seq.source_id:
            raise ValueError("sequences need a source_id to be saved into a dataset")
        save_sequence(seq, out_dir / f"{seq.source_id}.skl")
    return out_dir


def load_dataset(root) -> list[SkeletonSequence]:
    """Load every ``*.skl`` container under a directory, sorted by source_id."""
    root = Path(root)
    paths = sorted(root.glob("*.skl"), key=lambda p: p.stem)
    if not paths:
        raise FileNotFoundError(f"no .skl files found under {root}")
    return [load_sequence(p) for p in paths]
