"""Domain types shared across the toolkit.

All types validate their invariants at construction and freeze their array
payloads (numpy ``writeable`` flag cleared), so instances can be shared
across threads without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "SensorConfig",
    "SceneImage",
    "Burst",
    "MotionTrajectory",
    "LocalMotionSpec",
    "Triplet",
    "KernelField",
    "KERNEL_NORMALIZE_MODES",
]

_MAX_SEED = (1 << 64) - 1

KERNEL_NORMALIZE_MODES = ("none", "sum-to-one", "softmax")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SensorConfig:
    """Physical constants of the photon-counting forward model.

    gain_alpha is the expected photoelectrons per unit normalized radiance
    per frame; dark current is in electrons/pixel/second, read noise in
    electrons RMS. Defaults match the prototype sensor the toolkit models:
    3-bit ADC, 75 us integration, 8-frame bursts.
    """

    gain_alpha: float
    dark_current_rate: float = 0.0068
    read_noise_sigma: float = 0.25
    adc_bits: int = 3
    single_bit_threshold: int = 1
    integration_time: float = 75e-6
    frames_per_burst: int = 8

    def __post_init__(self):
        if not (np.isfinite(self.gain_alpha) and self.gain_alpha > 0):
            raise ValueError(f"gain_alpha must be positive, got {self.gain_alpha}")
        if not (np.isfinite(self.dark_current_rate) and self.dark_current_rate >= 0):
            raise ValueError("dark_current_rate must be >= 0")
        if not (np.isfinite(self.read_noise_sigma) and self.read_noise_sigma >= 0):
            raise ValueError("read_noise_sigma must be >= 0")
        if not (np.isfinite(self.integration_time) and self.integration_time > 0):
            raise ValueError("integration_time must be > 0")
        if not 1 <= int(self.adc_bits) <= 8:
            raise ValueError(f"adc_bits must be in [1, 8], got {self.adc_bits}")
        if int(self.single_bit_threshold) < 1:
            raise ValueError("single_bit_threshold must be >= 1")
        if self.adc_bits == 1 and not (
            1 <= int(self.single_bit_threshold) <= (1 << self.adc_bits) - 1
        ):
            raise ValueError(
                "single_bit_threshold must lie in [1, 2^bits - 1] for 1-bit ADC"
            )
        if int(self.frames_per_burst) < 1:
            raise ValueError("frames_per_burst must be >= 1")

    @property
    def max_level(self) -> int:
        return (1 << self.adc_bits) - 1

    @property
    def dark_electrons_per_frame(self) -> float:
        return self.dark_current_rate * self.integration_time

    def with_frames(self, frames_per_burst: int) -> "SensorConfig":
        return replace(self, frames_per_burst=frames_per_burst)


@dataclass(frozen=True)
class SceneImage:
    """Ground-truth radiance grid, normalized to [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"scene must be a 2-D grid, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("scene values must be finite")
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueError("scene values must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(a))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Burst:
    """A stack of quantized sensor frames plus the config that produced it."""

    data: np.ndarray
    config: SensorConfig
    seed: int

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.ndim != 3:
            raise ValueError(f"burst data must be (T, H, W), got shape {a.shape}")
        if not np.issubdtype(a.dtype, np.integer):
            raise ValueError("burst data must be integer-valued")
        top = (1 << self.config.adc_bits) - 1
        if a.size and (a.min() < 0 or a.max() > top):
            raise ValueError(
                f"burst values must lie in [0, {top}] for {self.config.adc_bits}-bit ADC"
            )
        if not 0 <= int(self.seed) <= _MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "data", _frozen(a.astype(np.uint8)))

    @property
    def frame_count(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def adc_bits(self) -> int:
        return self.config.adc_bits


@dataclass(frozen=True)
class MotionTrajectory:
    """Per-frame global displacements (dx, dy) relative to frame 0."""

    displacements: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.displacements, dtype=np.float64)
        if d.ndim != 2 or d.shape[1] != 2 or d.shape[0] < 1:
            raise ValueError(f"displacements must be (T, 2), got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("displacements must be finite")
        if d[0, 0] != 0.0 or d[0, 1] != 0.0:
            raise ValueError("displacement at t=0 must be exactly (0, 0)")
        object.__setattr__(self, "displacements", _frozen(d))

    @property
    def frame_count(self) -> int:
        return self.displacements.shape[0]

    @property
    def magnitude(self) -> float:
        """Euclidean length of the endpoint displacement."""
        return float(np.hypot(*self.displacements[-1]))


@dataclass(frozen=True)
class LocalMotionSpec:
    """Foreground mask plus per-frame rigid transforms about its centroid."""

    mask: np.ndarray
    transforms: np.ndarray  # (T, 3): dx, dy, rotation in degrees

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        t = np.asarray(self.transforms, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError("mask must be 2-D")
        if not m.any():
            raise ValueError("mask must contain at least one foreground pixel")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"transforms must be (T, 3), got shape {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("transforms must be finite")
        if np.any(t[:, 2] < 0.0) or np.any(t[:, 2] > 15.0):
            raise ValueError("rotation angles must lie in [0, 15] degrees")
        if np.any(t[0] != 0.0):
            raise ValueError("transform at t=0 must be the identity")
        object.__setattr__(self, "mask", _frozen(m))
        object.__setattr__(self, "transforms", _frozen(t))

    @property
    def centroid(self) -> Tuple[float, float]:
        """Foreground centroid as (cx, cy) in pixel coordinates."""
        ys, xs = np.nonzero(self.mask)
        return float(xs.mean()), float(ys.mean())


@dataclass(frozen=True)
class Triplet:
    """The three aligned training views plus ground truth.

    x_motion is the clean dynamic stack (frame 0 is the ground-truth pose),
    x_noise a single noisy static frame, x_qis the noisy dynamic burst.
    """

    x_true: SceneImage
    x_motion: Tuple[SceneImage, ...]
    x_noise: Burst
    x_qis: Burst
    trajectory: MotionTrajectory
    local_spec: Optional[LocalMotionSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "x_motion", tuple(self.x_motion))
        shape = self.x_true.data.shape
        for f in self.x_motion:
            if f.data.shape != shape:
                raise ValueError("x_motion frames must match x_true dimensions")
        for b in (self.x_noise, self.x_qis):
            if (b.height, b.width) != shape:
                raise ValueError("bursts must match x_true dimensions")
        if self.x_noise.frame_count != 1:
            raise ValueError("x_noise must hold exactly one frame")
        if not np.array_equal(self.x_motion[0].data, self.x_true.data):
            raise ValueError("x_motion frame 0 must equal x_true exactly")
        if self.x_noise.config.adc_bits != self.x_qis.config.adc_bits:
            raise ValueError("x_noise and x_qis must share the sensor config")


@dataclass(frozen=True)
class KernelField:
    """Per-pixel K x K x T merge weights for burst fusion."""

    weights: np.ndarray  # (H, W, T, K, K)
    normalize_mode: str = "sum-to-one"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 5 or w.shape[3] != w.shape[4]:
            raise ValueError(f"weights must be (H, W, T, K, K), got shape {w.shape}")
        k = w.shape[3]
        if k < 1 or k % 2 == 0:
            raise ValueError(f"kernel size must be odd and >= 1, got {k}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if self.normalize_mode not in KERNEL_NORMALIZE_MODES:
            raise ValueError(f"unknown normalize_mode {self.normalize_mode!r}")
        if self.normalize_mode == "sum-to-one":
            sums = w.reshape(w.shape[0], w.shape[1], -1).sum(axis=2)
            if np.any(np.abs(sums - 1.0) > 1e-6):
                raise ValueError("sum-to-one weights must sum to 1 +- 1e-6 per pixel")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def kernel_size(self) -> int:
        return self.weights.shape[3]

    @property
    def frame_count(self) -> int:
        return self.weights.shape[2]
