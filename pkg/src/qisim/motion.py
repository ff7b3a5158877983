"""Motion trajectories, warped frame stacks, and training triplets.

The reference pose is always frame 0: trajectories start at (0, 0) and the
first warped frame is the scene itself, bit for bit. Global motion is a
continuous translation; local motion moves a masked foreground rigidly
(translation plus rotation about the mask centroid) over a fixed,
fully-known background.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from . import sensor
from .types import (
    Burst,
    LocalMotionSpec,
    MotionTrajectory,
    SceneImage,
    SensorConfig,
    Triplet,
)

__all__ = [
    "linear_trajectory",
    "sample_global_trajectory",
    "sample_local_spec",
    "warp_sequence",
    "crop_patch",
    "sample_crop_offset",
    "make_triplet",
    "assemble_triplet",
    "derive_seed",
    "TRAJECTORY_MODELS",
]

TRAJECTORY_MODELS = ("linear", "smooth-random")

# Per-frame jitter of the smooth-random model, in pixels.
_SMOOTH_JITTER_SIGMA = 0.5

_MASK64 = (1 << 64) - 1

# Stream tags for deriving independent sensor seeds from one triplet seed.
_STREAM_NOISE = 0x1D9B
_STREAM_QIS = 0x2A47


def derive_seed(seed: int, stream: int) -> int:
    """Stable 64-bit seed derivation (splitmix64 finalizer)."""

    def mix(z: int) -> int:
        z = (z + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    return mix((int(seed) & _MASK64) ^ mix(stream))


def linear_trajectory(total: Tuple[float, float],
                      frame_count: int) -> MotionTrajectory:
    """Displacement spaced uniformly from (0, 0) to ``total`` over the burst."""
    if frame_count < 2:
        raise ValueError("a trajectory needs at least 2 frames")
    steps = np.arange(frame_count, dtype=np.float64)[:, None] / (frame_count - 1)
    disp = steps * np.asarray(total, dtype=np.float64)[None, :]
    disp[0] = 0.0
    return MotionTrajectory(disp)


def sample_global_trajectory(seed: int,
                             magnitude_range: Tuple[float, float] = (7.0, 35.0),
                             frame_count: int = 8,
                             model: str = "linear") -> MotionTrajectory:
    """Random global camera translation over the burst.

    The endpoint displacement magnitude (pixels traveled along the dominant
    direction) is uniform in ``magnitude_range`` with a uniform random
    direction. ``linear`` spaces the displacement uniformly across frames;
    ``smooth-random`` adds small per-frame jitter while keeping t=0 at the
    origin and the endpoint on the sampled magnitude.
    """
    lo, hi = float(magnitude_range[0]), float(magnitude_range[1])
    if lo > hi:
        raise ValueError(f"magnitude range is inverted: [{lo}, {hi}]")
    if lo < 0:
        raise ValueError("magnitudes must be nonnegative")
    if frame_count < 2:
        raise ValueError("a trajectory needs at least 2 frames")
    if model not in TRAJECTORY_MODELS:
        raise ValueError(f"unknown trajectory model {model!r}")

    rng = np.random.default_rng(seed)
    magnitude = rng.uniform(lo, hi)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    total = np.array([magnitude * math.cos(angle), magnitude * math.sin(angle)])

    steps = np.arange(frame_count)[:, None] / (frame_count - 1)
    disp = steps * total[None, :]
    if model == "smooth-random":
        jitter = rng.normal(0.0, _SMOOTH_JITTER_SIGMA, size=(frame_count, 2))
        disp = disp + jitter - jitter[0]
        disp[-1] = total
    disp[0] = 0.0
    return MotionTrajectory(disp)


def sample_local_spec(mask: np.ndarray, seed: int,
                      magnitude_range: Tuple[float, float] = (7.0, 35.0),
                      frame_count: int = 8,
                      max_rotation_deg: float = 15.0) -> LocalMotionSpec:
    """Rigid foreground motion: translation like the global model, plus a
    rotation ramping linearly from 0 to a sampled angle in [0, 15] degrees."""
    if not 0.0 <= max_rotation_deg <= 15.0:
        raise ValueError("max_rotation_deg must lie in [0, 15]")
    traj = sample_global_trajectory(derive_seed(seed, 0x10C0), magnitude_range,
                                    frame_count, "linear")
    rng = np.random.default_rng(derive_seed(seed, 0x10C1))
    angle_end = rng.uniform(0.0, max_rotation_deg)
    steps = np.arange(frame_count) / (frame_count - 1)
    transforms = np.column_stack([traj.displacements, angle_end * steps])
    transforms[0] = 0.0
    return LocalMotionSpec(mask=mask, transforms=transforms)


def _translate(scene: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Sample scene at (y - dy, x - dx): content moves by +d. Edge-clamped."""
    hh, ww = scene.shape
    ys, xs = np.meshgrid(np.arange(hh, dtype=np.float64),
                         np.arange(ww, dtype=np.float64), indexing="ij")
    coords = np.stack([ys - dy, xs - dx])
    return ndimage.map_coordinates(scene, coords, order=1, mode="nearest")


def _rigid_inverse(coords_y: np.ndarray, coords_x: np.ndarray,
                   dx: float, dy: float, angle_deg: float,
                   cx: float, cy: float):
    """Map output coordinates through the inverse of the rigid transform."""
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    x = coords_x - dx - cx
    y = coords_y - dy - cy
    # inverse rotation by -theta
    src_x = cos_t * x + sin_t * y + cx
    src_y = -sin_t * x + cos_t * y + cy
    return src_y, src_x


def _warp_local(scene: np.ndarray, spec: LocalMotionSpec,
                t: int, out: np.ndarray) -> np.ndarray:
    dx, dy, angle = spec.transforms[t]
    if dx == 0.0 and dy == 0.0 and angle == 0.0:
        return out
    cx, cy = spec.centroid
    hh, ww = scene.shape
    ys, xs = np.meshgrid(np.arange(hh, dtype=np.float64),
                         np.arange(ww, dtype=np.float64), indexing="ij")
    src_y, src_x = _rigid_inverse(ys, xs, dx, dy, angle, cx, cy)
    coords = np.stack([src_y, src_x])
    moved = ndimage.map_coordinates(scene, coords, order=1, mode="nearest")
    # A pixel belongs to the moved foreground iff its source lies on the mask.
    mask_f = ndimage.map_coordinates(spec.mask.astype(np.float64), coords,
                                     order=1, mode="constant", cval=0.0)
    fg = mask_f > 0.5
    result = out.copy()
    result[fg] = moved[fg]
    return result


def warp_sequence(scene: SceneImage, trajectory: MotionTrajectory,
                  local_spec: Optional[LocalMotionSpec] = None,
                  frame_count: Optional[int] = None) -> Tuple[SceneImage, ...]:
    """Clean dynamic frames: global translation plus optional local motion.

    Frame 0 is the scene itself, exactly. Bilinear resampling with edge
    clamping; warped values therefore never leave the scene's value range.
    """
    t_count = trajectory.frame_count
    if frame_count is not None and frame_count != t_count:
        raise ValueError(
            f"trajectory holds {t_count} frames, {frame_count} requested"
        )
    if local_spec is not None:
        if local_spec.mask.shape != scene.data.shape:
            raise ValueError("local motion mask must match scene dimensions")
        if local_spec.transforms.shape[0] != t_count:
            raise ValueError("local transforms must match trajectory length")

    frames = []
    for t in range(t_count):
        if t == 0:
            frames.append(scene)  # exact anchor, no resampling
            continue
        dx, dy = trajectory.displacements[t]
        if dx == 0.0 and dy == 0.0:
            warped = scene.data
        else:
            warped = _translate(scene.data, dx, dy)
        if local_spec is not None:
            warped = _warp_local(scene.data, local_spec, t, warped)
        frames.append(SceneImage(np.clip(warped, 0.0, 1.0)))
    return tuple(frames)


def sample_crop_offset(height: int, width: int, size: int, margin: int,
                       seed: int) -> Tuple[int, int]:
    """Top-left (y, x) of a crop whose margin band stays inside the source."""
    if size < 1 or margin < 0:
        raise ValueError("size must be >= 1 and margin >= 0")
    if height < size + 2 * margin or width < size + 2 * margin:
        raise ValueError(
            f"source {height}x{width} too small for size {size} with margin {margin}"
        )
    rng = np.random.default_rng(seed)
    y = int(rng.integers(margin, height - size - margin + 1))
    x = int(rng.integers(margin, width - size - margin + 1))
    return y, x


def crop_patch(scene: SceneImage, size: int = 64, margin: int = 0,
               seed: int = 0) -> SceneImage:
    """Random size x size patch placed at least ``margin`` pixels from the border.

    Warps of up to ``margin`` pixels applied to the source around this patch
    never sample outside the image. Deterministic under the seed.
    """
    y, x = sample_crop_offset(scene.height, scene.width, size, margin, seed)
    return SceneImage(scene.data[y:y + size, x:x + size])


def assemble_triplet(x_true: SceneImage, x_motion: Sequence[SceneImage],
                     config: SensorConfig, seed: int,
                     trajectory: MotionTrajectory,
                     local_spec: Optional[LocalMotionSpec] = None) -> Triplet:
    """Simulate the noisy views for an already-warped clean stack.

    x_noise and x_qis are drawn from disjoint counter streams derived from
    the triplet seed, so the static and dynamic noise never correlate.
    """
    x_noise = sensor.simulate_burst(x_true, config.with_frames(1),
                                    derive_seed(seed, _STREAM_NOISE))
    x_qis = sensor.simulate_burst(list(x_motion), config,
                                  derive_seed(seed, _STREAM_QIS))
    return Triplet(
        x_true=x_true,
        x_motion=tuple(x_motion),
        x_noise=x_noise,
        x_qis=x_qis,
        trajectory=trajectory,
        local_spec=local_spec,
    )


def make_triplet(scene: SceneImage, config: SensorConfig, seed: int,
                 trajectory: MotionTrajectory,
                 local_spec: Optional[LocalMotionSpec] = None) -> Triplet:
    """Assemble the three aligned training views of one scene.

    x_motion is noise-free (depends only on scene and trajectory), so two
    triplets with different seeds share identical clean stacks.
    """
    x_motion = warp_sequence(scene, trajectory, local_spec)
    return assemble_triplet(scene, x_motion, config, seed, trajectory, local_spec)
