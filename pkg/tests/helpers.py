"""Shared test utilities: procedural scenes and closed-form noise oracles.

The oracles here are computed by direct enumeration of the Poisson pmf and
never touch the simulation path they are used to check.
"""

import math

import numpy as np
from scipy import ndimage

from qisim.types import SceneImage


def make_scene(height, width, seed, lo=0.15, hi=0.75):
    """Smooth random field rescaled into [lo, hi]; textured but band-limited."""
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.0, 1.0, size=(height, width))
    smooth = ndimage.gaussian_filter(noise, sigma=3.0, mode="reflect")
    smooth = smooth - smooth.min()
    if smooth.max() > 0:
        smooth = smooth / smooth.max()
    return SceneImage(lo + (hi - lo) * smooth)


def make_edge_scene(height, width, seed, lo=0.15, hi=0.75):
    """Piecewise-flat scene with sharp edges; averaging blur is punished."""
    rng = np.random.default_rng(seed)
    grid = np.full((height, width), lo)
    for _ in range(6):
        y = rng.integers(0, height - 4)
        x = rng.integers(0, width - 4)
        h = int(rng.integers(height // 6, height // 2))
        w = int(rng.integers(width // 6, width // 2))
        grid[y:y + h, x:x + w] = rng.uniform(lo, hi)
    return SceneImage(grid)


def poisson_pmf(lam, kmax):
    """pmf table p_0..p_kmax via the stable multiplicative recurrence."""
    probs = np.empty(kmax + 1)
    probs[0] = math.exp(-lam)
    for k in range(1, kmax + 1):
        probs[k] = probs[k - 1] * lam / k
    return probs

def clipped_poisson_mean(lam, top, kmax=200):
    """E[min(X, top)] for X ~ Poisson(lam), by direct summation."""
    probs = poisson_pmf(lam, kmax)
    mean = sum(min(k, top) * p for k, p in enumerate(probs))
    return mean + top * max(0.0, 1.0 - probs.sum())


def clipped_poisson_var(lam, top, kmax=200):
    """Var[min(X, top)] for X ~ Poisson(lam), by direct summation."""
    probs = poisson_pmf(lam, kmax)
    m = clipped_poisson_mean(lam, top, kmax)
    second = sum(min(k, top) ** 2 * p for k, p in enumerate(probs))
    second += top ** 2 * max(0.0, 1.0 - probs.sum())
    return second - m * m


def binomial_pmf(n, p):
    return np.array([math.comb(n, s) * p ** s * (1 - p) ** (n - s)
                     for s in range(n + 1)])


def anscombe_reference(s, frame_count):
    """Independent evaluation of the stabilizing transform for scalars."""
    return 2.0 * math.sqrt(frame_count + 0.5) * math.asin(
        math.sqrt((s + 0.375) / (frame_count + 0.75))
    )


def stabilized_variance_oracle(lam, frame_count=8):
    """Exact variance of the transformed binary-frame sum, by enumeration."""
    p = 1.0 - math.exp(-lam)
    probs = binomial_pmf(frame_count, p)
    vals = np.array([anscombe_reference(s, frame_count)
                     for s in range(frame_count + 1)])
    mean = float(np.dot(probs, vals))
    second = float(np.dot(probs, vals ** 2))
    return second - mean * mean
