"""Triplet dataset manifest: one JSON document indexing all emitted files.

Each entry records the paths of the ground truth, the clean dynamic frames,
the noisy static frame, and the noisy dynamic burst, together with the
trajectory, optional local-motion spec, sensor config, and seed that
produced them.
"""

from __future__ import annotations

import dataclasses
import json
import os
from typing import List, Optional

import numpy as np

from .types import LocalMotionSpec, MotionTrajectory, SensorConfig

__all__ = ["TripletEntry", "write_manifest", "read_manifest"]

MANIFEST_VERSION = 1


@dataclasses.dataclass
class TripletEntry:
    x_true: str
    x_motion: List[str]
    x_noise: str
    x_qis: str
    trajectory: List[List[float]]
    config: SensorConfig
    seed: int
    local_mask: Optional[str] = None
    local_transforms: Optional[List[List[float]]] = None

    def to_dict(self) -> dict:
        d = {
            "x_true": self.x_true,
            "x_motion": self.x_motion,
            "x_noise": self.x_noise,
            "x_qis": self.x_qis,
            "trajectory": self.trajectory,
            "config": dataclasses.asdict(self.config),
            "seed": int(self.seed),
        }
        if self.local_mask is not None:
            d["local_mask"] = self.local_mask
            d["local_transforms"] = self.local_transforms
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TripletEntry":
        return cls(
            x_true=d["x_true"],
            x_motion=list(d["x_motion"]),
            x_noise=d["x_noise"],
            x_qis=d["x_qis"],
            trajectory=[[float(a), float(b)] for a, b in d["trajectory"]],
            config=SensorConfig(**d["config"]),
            seed=int(d["seed"]),
            local_mask=d.get("local_mask"),
            local_transforms=d.get("local_transforms"),
        )

    def motion_trajectory(self) -> MotionTrajectory:
        return MotionTrajectory(np.asarray(self.trajectory, dtype=np.float64))


def write_manifest(entries: List[TripletEntry], path: str) -> None:
    doc = {
        "format": "qis-triplets",
        "version": MANIFEST_VERSION,
        "triplets": [e.to_dict() for e in entries],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_manifest(path: str) -> List[TripletEntry]:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("format") != "qis-triplets":
        raise ValueError(f"{path} is not a triplet manifest")
    if doc.get("version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {doc.get('version')}")
    return [TripletEntry.from_dict(d) for d in doc["triplets"]]
