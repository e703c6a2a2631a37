"""Binary checkpoint container: versioned config header, name->shape manifest,
then raw little-endian tensor data in declaration order.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np
import torch

MAGIC = b"USDRLCK1"
VERSION = 1

_DTYPES = {
    torch.float32: "f32",
    torch.float64: "f64",
    torch.int64: "i64",
    torch.uint8: "u8",
}
_NP_DTYPES = {"f32": "<f4", "f64": "<f8", "i64": "<i8", "u8": "u1"}


def save_checkpoint(path, config: dict, tensors: dict[str, torch.Tensor]) -> Path:
    """Write the container. ``tensors`` preserves insertion order, which is the
    declaration order recorded in the manifest.
    """
    path = Path(path)
    manifest = []
    blobs = []
    for name, tensor in tensors.items():
        tensor = tensor.detach().cpu().contiguous()
        if tensor.dtype not in _DTYPES:
            raise TypeError(f"unsupported dtype {tensor.dtype} for tensor {name!r}")
        code = _DTYPES[tensor.dtype]
        manifest.append({"name": name, "dtype": code, "shape": list(tensor.shape)})
        blobs.append(tensor.numpy().astype(_NP_DTYPES[code]).tobytes())
    config_bytes = json.dumps(config, sort_keys=True,
                              separators=(",", ":")).encode("utf-8")
    manifest_bytes = json.dumps(manifest, sort_keys=True,
                                separators=(",", ":")).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(config_bytes)))
        fh.write(config_bytes)
        fh.write(struct.pack("<I", len(manifest_bytes)))
        fh.write(manifest_bytes)
        for blob in blobs:
            fh.write(blob)
    return path


def load_checkpoint(path) -> tuple[dict, dict[str, torch.Tensor]]:
    """Read a container back into (config dict, ordered name->tensor map)."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint container (bad magic)")
    offset = len(MAGIC)
    (version,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    (config_len,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    config = json.loads(blob[offset:offset + config_len].decode("utf-8"))
    offset += config_len
    (manifest_len,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    manifest = json.loads(blob[offset:offset + manifest_len].decode("utf-8"))
    offset += manifest_len

    tensors: dict[str, torch.Tensor] = {}
    for entry in manifest:
        np_dtype = _NP_DTYPES[entry["dtype"]]
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        nbytes = count * np.dtype(np_dtype).itemsize
        array = np.frombuffer(blob, dtype=np_dtype, count=count, offset=offset)
        offset += nbytes
        tensors[entry["name"]] = torch.from_numpy(
            array.reshape(entry["shape"]).copy())
    if offset != len(blob):
        raise ValueError(f"{path}: {len(blob) - offset} trailing bytes")
    return config, tensors


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()
