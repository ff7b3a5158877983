"""Pure-numpy backend: counter-based sampling, NLM, and kernel merging.

This module defines the reference semantics for every hot kernel.  The
compiled backend (``qisim.backend._fastcore``) reimplements the same
operations in C and must agree with this one: bit-for-bit on the sampling
and merge kernels, to floating-point noise on NLM.

The random stream is Philox-4x32-10 keyed on the 64-bit user seed, with
the counter words carrying (x, y, frame, draw-kind | draw-index).  Every
per-pixel draw therefore depends only on the pixel's coordinates and the
seed, never on evaluation order, which is what makes outputs identical
under any serial or parallel schedule.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

# Philox-4x32 round constants (Salmon et al., Random123).
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_GOLDEN0 = 0x9E3779B9
_GOLDEN1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)

# Draw-kind tags placed in the top byte of counter word 3.
KIND_POISSON = 0
KIND_GAUSS = 1

# Poisson means above this are split into equal sub-draws so that
# exp(-lam) stays comfortably inside double range (exp(-500) ~ 7e-218).
_POISSON_CHUNK = 500.0
# Per-chunk hard cap on the inversion search; P(X > 1100 | lam <= 500)
# is below 1e-180, and both backends share the identical cutoff.
_POISSON_KMAX = 1100

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 6.283185307179586


def philox4x32(c0, c1, c2, c3, k0: int, k1: int):
    """One Philox-4x32-10 block per element of the uint32 counter arrays."""
    c0 = np.asarray(c0, dtype=np.uint32)
    c1 = np.asarray(c1, dtype=np.uint32)
    c2 = np.asarray(c2, dtype=np.uint32)
    c3 = np.asarray(c3, dtype=np.uint32)
    k0 = int(k0) & 0xFFFFFFFF
    k1 = int(k1) & 0xFFFFFFFF
    for _ in range(10):
        p0 = _M0 * c0.astype(np.uint64)
        p1 = _M1 * c2.astype(np.uint64)
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = (p0 & _MASK32).astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = (p1 & _MASK32).astype(np.uint32)
        c0 = hi1 ^ c1 ^ np.uint32(k0)
        c1 = lo1
        c2 = hi0 ^ c3 ^ np.uint32(k1)
        c3 = lo0
        k0 = (k0 + _GOLDEN0) & 0xFFFFFFFF
        k1 = (k1 + _GOLDEN1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def _block_u64(c0, c1, c2, c3, k0, k1):
    """Philox block folded into two uint64 words per counter."""
    b0, b1, b2, b3 = philox4x32(c0, c1, c2, c3, k0, k1)
    a = b0.astype(np.uint64) | (b1.astype(np.uint64) << np.uint64(32))
    b = b2.astype(np.uint64) | (b3.astype(np.uint64) << np.uint64(32))
    return a, b


def _key_words(seed: int):
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return seed & 0xFFFFFFFF, seed >> 32


def _pixel_counters(width: int, y0: int, y1: int):
    xs = np.arange(width, dtype=np.uint32)
    ys = np.arange(y0, y1, dtype=np.uint32)
    cx = np.broadcast_to(xs[None, :], (y1 - y0, width))
    cy = np.broadcast_to(ys[:, None], (y1 - y0, width))
    return cx, cy


def _poisson_from_uniform(u: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Exact inversion search: smallest k with u <= CDF_k(lam).

    The recurrence below (p *= lam/k; cum += p) is evaluated per pixel in
    the same order as the compiled backend's scalar loop, so the results
    match bit for bit.
    """
    p = np.exp(-lam)
    cum = p.copy()
    k = np.zeros(lam.shape, dtype=np.int64)
    active = np.flatnonzero(u > cum)
    it = 0
    while active.size and it < _POISSON_KMAX:
        it += 1
        k_flat = k.reshape(-1)
        p_flat = p.reshape(-1)
        cum_flat = cum.reshape(-1)
        k_flat[active] += 1
        p_flat[active] *= lam.reshape(-1)[active] / k_flat[active]
        cum_flat[active] += p_flat[active]
        active = active[u.reshape(-1)[active] > cum_flat[active]]
    return k


def _poisson_field(lam: np.ndarray, seed: int, frame_index: int,
                   cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    k0, k1 = _key_words(seed)
    chunks = 1 + (lam / _POISSON_CHUNK).astype(np.int64)
    lam_c = lam / chunks
    counts = np.zeros(lam.shape, dtype=np.int64)
    for i in range(int(chunks.max())):
        c3 = np.uint32((KIND_POISSON << 24) | i)
        ua, _ = _block_u64(cx, cy, np.uint32(frame_index), c3, k0, k1)
        u = (ua >> np.uint64(11)).astype(np.float64) * _INV_2_53
        draw = _poisson_from_uniform(u, lam_c)
        counts += np.where(i < chunks, draw, 0)
    return counts


def _gaussian_field(sigma: float, seed: int, frame_index: int,
                    cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    k0, k1 = _key_words(seed)
    c3 = np.uint32(KIND_GAUSS << 24)
    ua, ub = _block_u64(cx, cy, np.uint32(frame_index), c3, k0, k1)
    # u1 in (0, 1] keeps the log finite; u2 in [0, 1).
    u1 = ((ua >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = (ub >> np.uint64(11)).astype(np.float64) * _INV_2_53
    return sigma * np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)


def quantize(values: np.ndarray, bits: int, threshold: int) -> np.ndarray:
    """Round half up, then threshold (1-bit) or clip (multi-bit)."""
    rounded = np.floor(values + 0.5)
    if bits == 1:
        return (rounded >= threshold).astype(np.uint8)
    top = float((1 << bits) - 1)
    return np.clip(rounded, 0.0, top).astype(np.uint8)


def simulate_rows(scene: np.ndarray, y0: int, y1: int, alpha: float,
                  dark_electrons: float, read_sigma: float, bits: int,
                  threshold: int, seed: int, frame_index: int) -> np.ndarray:
    """Quantized sensor output for rows [y0, y1) of one frame."""
    block = scene[y0:y1].astype(np.float64, copy=False)
    lam = alpha * (block + dark_electrons)
    cx, cy = _pixel_counters(scene.shape[1], y0, y1)
    analog = _poisson_field(lam, seed, frame_index, cx, cy).astype(np.float64)
    if read_sigma > 0.0:
        analog = analog + _gaussian_field(read_sigma, seed, frame_index, cx, cy)
    return quantize(analog, bits, threshold)


def _box_sum(a: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the (2r+1)^2 window centered at each pixel; input is padded."""
    if radius == 0:
        return a.copy()
    c = np.cumsum(np.cumsum(a, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    size = 2 * radius + 1
    h = a.shape[0] - size + 1
    w = a.shape[1] - size + 1
    return (c[size:size + h, size:size + w] - c[size:size + h, :w]
            - c[:h, size:size + w] + c[:h, :w])


def nlm(image: np.ndarray, patch_radius: int, search_radius: int,
        h: float) -> np.ndarray:
    """Non-local means with Gaussian weights on mean squared patch distance.

    Weight for offset o is exp(-dbar2 / h^2) with dbar2 the patch-mean
    squared difference; the zero offset always contributes weight 1, so
    h -> 0 degenerates to the identity.
    """
    img = np.asarray(image, dtype=np.float64)
    if h <= 0.0:
        return img.copy()
    pr, sr = patch_radius, search_radius
    pad = sr + pr
    padded = np.pad(img, pad, mode="edge")
    hh, ww = img.shape
    n_patch = float((2 * pr + 1) ** 2)
    inv_h2 = 1.0 / (h * h)
    num = np.zeros_like(img)
    den = np.zeros_like(img)
    center = padded[sr:sr + hh + 2 * pr, sr:sr + ww + 2 * pr]
    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            shifted = padded[sr + dy:sr + dy + hh + 2 * pr,
                             sr + dx:sr + dx + ww + 2 * pr]
            if dy == 0 and dx == 0:
                w = np.ones_like(img)
            else:
                d2 = _box_sum((center - shifted) ** 2, pr) / n_patch
                w = np.exp(-d2 * inv_h2)
            num += w * shifted[pr:pr + hh, pr:pr + ww]
            den += w
    return num / den


def kernel_merge(frames: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-pixel spatio-temporal merge, zero-padded at the frame borders.

    frames: (T, H, W); weights: (H, W, T, K, K), already normalized.
    Accumulation order (t, then ky, then kx) matches the compiled kernel
    exactly, keeping the two backends bit-identical.
    """
    t_count, hh, ww = frames.shape
    k = weights.shape[-1]
    r = k // 2
    padded = np.pad(frames, ((0, 0), (r, r), (r, r)))
    out = np.zeros((hh, ww), dtype=np.float64)
    for t in range(t_count):
        for ky in range(k):
            for kx in range(k):
                out += weights[:, :, t, ky, kx] * padded[t, ky:ky + hh, kx:kx + ww]
    return out
