"""Quanta image sensor toolkit: simulation, synthesis, reconstruction, evaluation."""

from .types import (
    Burst,
    KernelField,
    LocalMotionSpec,
    MotionTrajectory,
    SceneImage,
    SensorConfig,
    Triplet,
)

__version__ = "0.1.0"

__all__ = [
    "Burst",
    "KernelField",
    "LocalMotionSpec",
    "MotionTrajectory",
    "SceneImage",
    "SensorConfig",
    "Triplet",
    "__version__",
]
