"""Binary portable graymap (P5) I/O for scenes and reconstructions.

8-bit and 16-bit maxvals are supported; 16-bit sample bytes are big-endian
per the netpbm convention. Values map linearly between [0, 1] and
[0, maxval], with round-half-up quantization on write.
"""

from __future__ import annotations

import re

import numpy as np

from .types import SceneImage

__all__ = ["read_pgm", "write_pgm"]

_TOKEN = re.compile(rb"^(P5)\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s")


def write_pgm(scene: SceneImage, path: str, bit_depth: int = 16) -> None:
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    maxval = (1 << bit_depth) - 1
    q = np.floor(scene.data * maxval + 0.5).astype(np.uint32)
    q = np.minimum(q, maxval)
    header = f"P5\n{scene.width} {scene.height}\n{maxval}\n".encode("ascii")
    if bit_depth == 8:
        payload = q.astype(np.uint8).tobytes()
    else:
        payload = q.astype(">u2").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)


def read_pgm(path: str) -> SceneImage:
    with open(path, "rb") as f:
        raw = f.read()
    m = _TOKEN.match(raw)
    if not m:
        raise ValueError(f"{path} is not a binary P5 graymap")
    width, height, maxval = (int(m.group(i)) for i in (2, 3, 4))
    if maxval < 1 or maxval > 65535:
        raise ValueError(f"unsupported maxval {maxval}")
    offset = m.end()
    count = width * height
    if maxval > 255:
        data = np.frombuffer(raw, dtype=">u2", count=count, offset=offset)
    else:
        data = np.frombuffer(raw, dtype=np.uint8, count=count, offset=offset)
    if data.size < count:
        raise ValueError(f"{path}: truncated pixel payload")
    grid = data.reshape(height, width).astype(np.float64) / maxval
    return SceneImage(grid)
