"""Parser for the NTU RGB+D ``.skeleton`` text layout.

Layout: line 1 holds the frame count. Each frame starts with a body-count
line; each body contributes a 10-field metadata line, a joint-count line
(must be 25), and 25 joint lines of 12 numbers whose first three are x y z.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import SkeletonFormatError, SkeletonParseError
from .sequence import SkeletonSequence

NTU_NUM_JOINTS = 25
_BODY_META_FIELDS = 10
_JOINT_FIELDS = 12


class _LineReader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0  # index of the next line to read

    @property
    def line_no(self) -> int:
        return self.pos + 1

    def next(self, what: str) -> str:
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self.pos += 1
            if line.strip():
                return line
        raise SkeletonParseError(f"file truncated while reading {what}",
                                 line=self.line_no)

    def next_int(self, what: str) -> int:
        line = self.next(what)
        token = line.strip()
        try:
            value = int(token)
        except ValueError:
            raise SkeletonParseError(f"expected integer {what}, got {token!r}",
                                     line=self.pos) from None
        if value < 0:
            raise SkeletonParseError(f"{what} must be non-negative, got {value}",
                                     line=self.pos)
        return value


def load_ntu_skeleton(path) -> SkeletonSequence:
    """Parse one ``.skeleton`` file into a [3, T, 25, M] sequence.

    M is the largest body count observed anywhere in the file (at least 1);
    frames with fewer bodies are zero-padded.
    """
    path = Path(path)
    reader = _LineReader(path.read_text().splitlines())
    num_frames = reader.next_int("frame count")
    if num_frames < 1:
        raise SkeletonParseError("frame count must be >= 1", line=1)

    frames: list[list[np.ndarray]] = []
    for t in range(num_frames):
        body_count = reader.next_int(f"body count of frame {t}")
        bodies = []
        for b in range(body_count):
            meta = reader.next(f"body metadata (frame {t}, body {b})").split()
            if len(meta) != _BODY_META_FIELDS:
                raise SkeletonParseError(
                    f"body metadata must have {_BODY_META_FIELDS} fields, "
                    f"got {len(meta)}", line=reader.pos)
            joint_count = reader.next_int(f"joint count (frame {t}, body {b})")
            if joint_count != NTU_NUM_JOINTS:
                raise SkeletonFormatError(
                    f"{path}: line {reader.pos}: joint count {joint_count} != "
                    f"{NTU_NUM_JOINTS}")
            joints = np.zeros((NTU_NUM_JOINTS, 3), dtype=np.float32)
            for j in range(joint_count):
                fields = reader.next(f"joint {j} (frame {t}, body {b})").split()
                if len(fields) != _JOINT_FIELDS:
                    raise SkeletonParseError(
                        f"joint line must have {_JOINT_FIELDS} fields, "
                        f"got {len(fields)}", line=reader.pos)
                try:
                    joints[j] = [float(fields[0]), float(fields[1]), float(fields[2])]
                except ValueError:
                    raise SkeletonParseError(
                        "joint coordinates are not numbers", line=reader.pos) from None
            bodies.append(joints)
        frames.append(bodies)

    remainder = "".join(reader.lines[reader.pos:]).strip()
    if remainder:
        raise SkeletonParseError("unexpected content after the last frame",
                                 line=reader.pos + 1)

    max_bodies = max((len(bodies) for bodies in frames), default=0)
    max_bodies = max(max_bodies, 1)
    data = np.zeros((3, num_frames, NTU_NUM_JOINTS, max_bodies), dtype=np.float32)
    for t, bodies in enumerate(frames):
        for m, joints in enumerate(bodies):
            data[:, t, :, m] = joints.T
    return SkeletonSequence(data=data, source_id=path.stem)
