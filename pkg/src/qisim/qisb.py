"""QISB burst container: a minimal binary frame stack plus a JSON sidecar.

File layout (all integers little-endian):

    offset  size  field
    0       4     magic "QISB"
    4       4     version (u32, currently 1)
    8       4     height (u32)
    12      4     width (u32)
    16      4     frame_count (u32)
    20      1     adc_bits (u8)
    21      3     reserved, zero
    24      -     payload: frame-major, row-major, one unsigned byte/sample

The sidecar lives at ``<path>.meta`` and carries the sensor config, the
seed, and optionally the motion trajectory as a JSON document. Writes are
byte-deterministic: the same burst always produces the same file bytes.
"""

from __future__ import annotations

import dataclasses
import json
import os
import struct
from typing import Optional

import numpy as np

from .types import Burst, MotionTrajectory, SensorConfig

__all__ = [
    "write_burst",
    "read_burst",
    "read_header",
    "sidecar_path",
    "QisbError",
    "BadMagicError",
    "VersionError",
    "TruncatedPayloadError",
    "PayloadRangeError",
    "SidecarError",
]

MAGIC = b"QISB"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIB3x")


class QisbError(Exception):
    """Base class for QISB format failures."""


class BadMagicError(QisbError):
    pass


class VersionError(QisbError):
    pass


class TruncatedPayloadError(QisbError):
    pass


class PayloadRangeError(QisbError):
    pass


class SidecarError(QisbError):
    """Missing or malformed sidecar metadata."""


def sidecar_path(path: str) -> str:
    return f"{path}.meta"


def _config_to_dict(config: SensorConfig) -> dict:
    return dataclasses.asdict(config)


def _config_from_dict(d: dict) -> SensorConfig:
    try:
        return SensorConfig(**d)
    except (TypeError, ValueError) as e:
        raise SidecarError(f"invalid sensor config in sidecar: {e}") from e


def write_burst(burst: Burst, path: str,
                trajectory: Optional[MotionTrajectory] = None) -> None:
    """Write ``path`` (binary payload) and ``path + '.meta'`` (metadata)."""
    data = burst.data
    top = (1 << burst.adc_bits) - 1
    if data.size and int(data.max()) > top:
        raise PayloadRangeError(
            f"burst holds value {int(data.max())} > {top}; refusing to write"
        )
    header = _HEADER.pack(MAGIC, VERSION, burst.height, burst.width,
                          burst.frame_count, burst.adc_bits)
    meta = {
        "format": "qisb",
        "version": VERSION,
        "config": _config_to_dict(burst.config),
        "seed": int(burst.seed),
    }
    if trajectory is not None:
        meta["trajectory"] = [[float(dx), float(dy)]
                              for dx, dy in trajectory.displacements]
    with open(path, "wb") as f:
        f.write(header)
        f.write(data.astype(np.uint8, copy=False).tobytes())
    with open(sidecar_path(path), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def read_header(path: str) -> dict:
    """Parse and validate only the fixed-size header."""
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise TruncatedPayloadError(
            f"file holds {len(raw)} bytes, shorter than the {_HEADER.size}-byte header"
        )
    magic, version, height, width, frames, bits = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise VersionError(f"unsupported version {version}, expected {VERSION}")
    return {
        "version": version,
        "height": height,
        "width": width,
        "frame_count": frames,
        "adc_bits": bits,
    }


def _read_sidecar(path: str) -> dict:
    spath = sidecar_path(path)
    if not os.path.exists(spath):
        raise SidecarError(f"sidecar {spath} not found")
    try:
        with open(spath, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise SidecarError(f"unreadable sidecar {spath}: {e}") from e


def read_burst(path: str) -> Burst:
    """Read a QISB file back into a Burst, config restored from the sidecar."""
    hdr = read_header(path)
    expected = hdr["height"] * hdr["width"] * hdr["frame_count"]
    with open(path, "rb") as f:
        f.seek(_HEADER.size)
        payload = f.read()
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"payload holds {len(payload)} bytes, header declares {expected}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(
        hdr["frame_count"], hdr["height"], hdr["width"]
    )
    top = (1 << hdr["adc_bits"]) - 1
    if data.size and int(data.max()) > top:
        raise PayloadRangeError(
            f"payload value {int(data.max())} exceeds {top} for "
            f"{hdr['adc_bits']}-bit data"
        )
    meta = _read_sidecar(path)
    config = _config_from_dict(meta.get("config", {}))
    if config.adc_bits != hdr["adc_bits"]:
        raise SidecarError(
            f"sidecar declares {config.adc_bits}-bit ADC, header says "
            f"{hdr['adc_bits']}-bit"
        )
    seed = meta.get("seed")
    if not isinstance(seed, int):
        raise SidecarError("sidecar is missing the integer seed")
    return Burst(data=data, config=config, seed=seed)


def read_trajectory(path: str) -> Optional[MotionTrajectory]:
    """Trajectory stored alongside a burst, if any."""
    meta = _read_sidecar(path)
    if "trajectory" not in meta:
        return None
    return MotionTrajectory(np.asarray(meta["trajectory"], dtype=np.float64))
