"""Training-free burst reconstruction and the kernel-merge primitive.

The classical single-bit pipeline follows the variance-stabilization
recipe: sum the binary frames, apply the binomial Anscombe transform so an
off-the-shelf denoiser sees roughly unit-variance noise, denoise, invert
the transform algebraically, and invert the zero-truncation to a flux
estimate. Multi-bit bursts go through plain averaging (optionally
denoised); non-local means is the built-in denoiser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import backend
from .types import Burst, KernelField, SceneImage

__all__ = [
    "ReconstructionMethod",
    "average_burst",
    "anscombe_binomial",
    "anscombe_binomial_inverse",
    "mle_invert_binary",
    "denoise_nlm",
    "apply_kernel_field",
    "reconstruct_pipeline",
]

METHOD_KINDS = (
    "burst-average",
    "average-then-denoise",
    "anscombe-denoise",
    "mle-binary",
    "kernel-merge",
)

# Non-local means defaults for the two denoised pipelines. The Anscombe
# domain has roughly unit noise variance, the image domain is in [0, 1].
_NLM_PATCH_RADIUS = 1
_NLM_SEARCH_RADIUS = 5
_NLM_H_ANSCOMBE = 1.6
_NLM_H_IMAGE = 0.08


@dataclass(frozen=True)
class ReconstructionMethod:
    """Dispatchable reconstruction choice, with per-method parameters."""

    kind: str
    kernel_field: Optional[KernelField] = None
    patch_radius: int = _NLM_PATCH_RADIUS
    search_radius: int = _NLM_SEARCH_RADIUS
    filter_strength: Optional[float] = None

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"unknown reconstruction method {self.kind!r}")
        if self.kind == "kernel-merge" and self.kernel_field is None:
            raise ValueError("kernel-merge requires an attached KernelField")

    @classmethod
    def burst_average(cls) -> "ReconstructionMethod":
        return cls("burst-average")

    @classmethod
    def average_then_denoise(cls, filter_strength: float = _NLM_H_IMAGE,
                             patch_radius: int = _NLM_PATCH_RADIUS,
                             search_radius: int = _NLM_SEARCH_RADIUS):
        return cls("average-then-denoise", patch_radius=patch_radius,
                   search_radius=search_radius, filter_strength=filter_strength)

    @classmethod
    def anscombe_denoise(cls, filter_strength: float = _NLM_H_ANSCOMBE,
                         patch_radius: int = _NLM_PATCH_RADIUS,
                         search_radius: int = _NLM_SEARCH_RADIUS):
        return cls("anscombe-denoise", patch_radius=patch_radius,
                   search_radius=search_radius, filter_strength=filter_strength)

    @classmethod
    def mle_binary(cls) -> "ReconstructionMethod":
        return cls("mle-binary")

    @classmethod
    def kernel_merge(cls, field: KernelField) -> "ReconstructionMethod":
        return cls("kernel-merge", kernel_field=field)


def average_burst(burst: Burst) -> SceneImage:
    """Temporal mean converted to a flux estimate in [0, 1].

    Unbiased up to ADC clipping: (sum_t y_t) / (T * alpha) minus the mean
    dark count, clamped to the scene range.
    """
    cfg = burst.config
    total = burst.data.sum(axis=0, dtype=np.float64)
    est = total / (burst.frame_count * cfg.gain_alpha) - cfg.dark_electrons_per_frame
    return SceneImage(np.clip(est, 0.0, 1.0))


def anscombe_binomial(summed: np.ndarray, frame_count: int) -> np.ndarray:
    """Variance-stabilizing transform for sums of T binary frames.

    2 sqrt(T + 1/2) asin(sqrt((S + 3/8) / (T + 3/4))); for Binomial(T, p)
    counts away from saturation the output has variance close to 1.
    """
    s = np.asarray(summed, dtype=np.float64)
    if s.size and (s.min() < 0 or s.max() > frame_count):
        raise ValueError(f"summed counts must lie in [0, {frame_count}]")
    return 2.0 * np.sqrt(frame_count + 0.5) * np.arcsin(
        np.sqrt((s + 0.375) / (frame_count + 0.75))
    )


def anscombe_binomial_inverse(values: np.ndarray, frame_count: int) -> np.ndarray:
    """Algebraic inverse of anscombe_binomial, clamped to valid counts."""
    z = np.asarray(values, dtype=np.float64)
    s = (frame_count + 0.75) * np.sin(z / (2.0 * np.sqrt(frame_count + 0.5))) ** 2 - 0.375
    return np.clip(s, 0.0, float(frame_count))


def _binary_rate_to_flux(p_hat: np.ndarray, frame_count: int,
                         gain_alpha: float) -> np.ndarray:
    """Invert p = 1 - exp(-lambda) and normalize by the gain."""
    eps = 1.0 / (2.0 * frame_count)
    p = np.clip(p_hat, 0.0, 1.0 - eps)
    lam = -np.log1p(-p)
    return np.clip(lam / gain_alpha, 0.0, 1.0)


def mle_invert_binary(burst: Burst) -> SceneImage:
    """Maximum-likelihood flux estimate from a 1-bit burst.

    The truncated-Poisson likelihood of binary observations reduces to a
    Binomial in the per-pixel ones count, giving lambda = -ln(1 - p). The
    ones rate is clamped to 1 - 1/(2T) so saturated pixels stay finite.
    """
    if burst.adc_bits != 1:
        raise ValueError(
            f"mle-binary requires a 1-bit burst, got {burst.adc_bits}-bit"
        )
    ones = burst.data.sum(axis=0, dtype=np.float64)
    p_hat = ones / burst.frame_count
    return SceneImage(
        _binary_rate_to_flux(p_hat, burst.frame_count, burst.config.gain_alpha)
    )


def denoise_nlm(image: SceneImage, patch_radius: int = _NLM_PATCH_RADIUS,
                search_radius: int = _NLM_SEARCH_RADIUS,
                filter_strength: float = _NLM_H_IMAGE) -> SceneImage:
    """Non-local means; output values stay inside the input's value range."""
    out = _nlm_array(image.data, patch_radius, search_radius, filter_strength)
    return SceneImage(out)


def _nlm_array(data: np.ndarray, patch_radius: int, search_radius: int,
               filter_strength: float) -> np.ndarray:
    if patch_radius <= 0 or search_radius <= 0:
        raise ValueError("patch and search radii must be positive")
    return backend.active.nlm(data, int(patch_radius), int(search_radius),
                              float(filter_strength))


def _normalized_weights(field: KernelField) -> np.ndarray:
    w = field.weights
    if field.normalize_mode == "none":
        return w
    hh, ww = w.shape[:2]
    flat = w.reshape(hh, ww, -1)
    if field.normalize_mode == "softmax":
        e = np.exp(flat - flat.max(axis=2, keepdims=True))
        flat = e / e.sum(axis=2, keepdims=True)
    else:  # sum-to-one
        sums = flat.sum(axis=2, keepdims=True)
        flat = flat / np.where(sums == 0.0, 1.0, sums)
    return np.ascontiguousarray(flat.reshape(w.shape))


def apply_kernel_field(frames: np.ndarray, field: KernelField) -> SceneImage:
    """Merge a frame stack with per-pixel spatio-temporal kernels.

    frames: (T, H, W) array of clean frames or a normalized burst; the stack
    is zero-padded at the borders. Linear in the frames for fixed weights
    when normalize_mode is "none".
    """
    stack = np.ascontiguousarray(np.asarray(frames, dtype=np.float64))
    if stack.ndim != 3:
        raise ValueError("frames must be a (T, H, W) stack")
    t_count, hh, ww = stack.shape
    if field.weights.shape[:3] != (hh, ww, t_count):
        raise ValueError(
            f"kernel field {field.weights.shape[:3]} does not match "
            f"frame stack {(hh, ww, t_count)}"
        )
    merged = backend.active.kernel_merge(stack, _normalized_weights(field))
    return SceneImage(np.clip(merged, 0.0, 1.0))


def _require_binary(burst: Burst, kind: str) -> None:
    if burst.adc_bits != 1:
        raise ValueError(
            f"{kind} requires a 1-bit burst, got {burst.adc_bits}-bit data"
        )


def reconstruct_pipeline(burst: Burst, method: ReconstructionMethod) -> SceneImage:
    """Dispatch a burst through the chosen reconstruction path."""
    cfg = burst.config
    if method.kind == "burst-average":
        return average_burst(burst)

    if method.kind == "average-then-denoise":
        avg = average_burst(burst)
        return SceneImage(
            np.clip(
                _nlm_array(avg.data, method.patch_radius, method.search_radius,
                           method.filter_strength), 0.0, 1.0)
        )

    if method.kind == "mle-binary":
        return mle_invert_binary(burst)

    if method.kind == "anscombe-denoise":
        _require_binary(burst, "anscombe-denoise")
        t_count = burst.frame_count
        summed = burst.data.sum(axis=0, dtype=np.float64)
        stabilized = anscombe_binomial(summed, t_count)
        denoised = _nlm_array(stabilized, method.patch_radius,
                              method.search_radius, method.filter_strength)
        s_hat = anscombe_binomial_inverse(denoised, t_count)
        return SceneImage(
            _binary_rate_to_flux(s_hat / t_count, t_count, cfg.gain_alpha)
        )

    # kernel-merge: normalize the burst to flux estimates, then merge
    field = method.kernel_field
    if field.frame_count != burst.frame_count:
        raise ValueError("kernel field frame count must match the burst")
    frames = burst.data.astype(np.float64) / cfg.gain_alpha
    return apply_kernel_field(frames, field)
