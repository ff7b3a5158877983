"""Photon-counting sensor forward model.

Per pixel the simulated signal is

    output = adc( Poisson(alpha * (x + dark_rate * t_int)) + N(0, sigma_r) )

with the ADC either thresholding (1-bit) or rounding-and-clipping
(multi-bit). Sampling is counter-based: each draw is keyed on
(seed, frame, y, x, draw kind), so results are independent of pixel
evaluation order and of how work is split across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Union

import numpy as np

from . import backend
from .types import Burst, SceneImage, SensorConfig

__all__ = [
    "calibrate_gain",
    "expected_rate",
    "adc_quantize",
    "simulate_frame",
    "simulate_cis_frame",
    "simulate_burst",
]

FrameSource = Union[SceneImage, Sequence[SceneImage]]


def calibrate_gain(scene: SceneImage, target_ppp: float) -> float:
    """Gain alpha such that the scene's mean photon count equals target_ppp.

    Photon levels are scene-relative: alpha = target_ppp / mean(scene), so
    mean(alpha * scene) lands exactly on the requested photons per pixel.
    """
    if not target_ppp > 0:
        raise ValueError(f"target_ppp must be positive, got {target_ppp}")
    mean = float(scene.data.mean())
    if mean <= 0.0:
        raise ValueError("cannot calibrate gain on an all-zero scene")
    return target_ppp / mean


def expected_rate(scene: SceneImage, config: SensorConfig) -> np.ndarray:
    """Per-pixel Poisson rate lambda, including the dark-current term."""
    return config.gain_alpha * (scene.data + config.dark_electrons_per_frame)


def adc_quantize(analog_value: float, config: SensorConfig) -> int:
    """Quantize one analog electron count.

    Multi-bit: round half up, clamp to [0, 2^B - 1]. Single-bit: 1 when the
    rounded value reaches the threshold. Total on finite inputs.
    """
    if not math.isfinite(analog_value):
        raise ValueError(f"analog value must be finite, got {analog_value}")
    out = backend.active.quantize(
        np.asarray([float(analog_value)]),
        config.adc_bits,
        config.single_bit_threshold,
    )
    return int(out[0])


def _simulate_grid(scene: np.ndarray, config: SensorConfig, seed: int,
                   frame_index: int, threads: int) -> np.ndarray:
    height = scene.shape[0]
    args = (
        config.gain_alpha,
        config.dark_electrons_per_frame,
        config.read_noise_sigma,
        config.adc_bits,
        config.single_bit_threshold,
        int(seed),
        int(frame_index),
    )
    run = backend.active.simulate_rows
    if threads <= 1 or height < 2 * threads:
        return run(scene, 0, height, *args)
    bounds = np.linspace(0, height, threads + 1).astype(int)
    out = np.empty(scene.shape, dtype=np.uint8)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run, scene, int(y0), int(y1), *args)
            for y0, y1 in zip(bounds[:-1], bounds[1:])
        ]
        for (y0, y1), fut in zip(zip(bounds[:-1], bounds[1:]), futures):
            out[y0:y1] = fut.result()
    return out


def simulate_frame(scene: SceneImage, config: SensorConfig, seed: int,
                   frame_index: int, threads: int = 1) -> np.ndarray:
    """One quantized sensor frame as an (H, W) uint8 grid.

    ``threads`` is an execution hint only; the output is bit-identical for
    any thread count.
    """
    if not 0 <= frame_index < config.frames_per_burst:
        raise ValueError(
            f"frame_index {frame_index} outside [0, {config.frames_per_burst})"
        )
    return _simulate_grid(scene.data, config, seed, frame_index, threads)


def simulate_cis_frame(scene: SceneImage, cis_config: SensorConfig, seed: int,
                       frame_index: int, threads: int = 1) -> np.ndarray:
    """Identical pipeline to simulate_frame.

    Exists so a conventional-sensor capture can be emulated by passing a
    config with large read noise and a deep ADC; with photon-counting
    parameters it reduces to the same output as simulate_frame.
    """
    return simulate_frame(scene, cis_config, seed, frame_index, threads)


def simulate_burst(source: FrameSource, config: SensorConfig, seed: int,
                   threads: int = 1) -> Burst:
    """Simulate config.frames_per_burst frames with time-independent noise.

    ``source`` is either a single static scene (reused for every frame) or a
    per-frame sequence of clean scenes whose length must match the burst
    length. Identical (source, config, seed) gives a bit-identical Burst
    regardless of thread count.
    """
    t_count = config.frames_per_burst
    if isinstance(source, SceneImage):
        frames = [source] * t_count
    else:
        frames = list(source)
        if len(frames) != t_count:
            raise ValueError(
                f"got {len(frames)} frames but config.frames_per_burst is {t_count}"
            )
    shape = frames[0].data.shape
    for f in frames:
        if f.data.shape != shape:
            raise ValueError("all frames must share the same dimensions")
    stack = np.empty((t_count,) + shape, dtype=np.uint8)
    for t, f in enumerate(frames):
        stack[t] = _simulate_grid(f.data, config, seed, t, threads)
    return Burst(data=stack, config=config, seed=int(seed))
