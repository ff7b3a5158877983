# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of qisim.backend.reference.

Same counter-based Philox streams, same inversion sampler, same
accumulation orders; the sampling and merge kernels must agree with the
reference bit for bit (checked by the parity test suite). Hot loops run
without the GIL so callers can split rows across threads.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, floor, log, sqrt
from libc.stdint cimport int64_t, uint8_t, uint32_t, uint64_t

cnp.import_array()

BACKEND_NAME = "compiled"

KIND_POISSON = 0
KIND_GAUSS = 1

cdef uint32_t _KIND_POISSON = 0
cdef uint32_t _KIND_GAUSS = 1

cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 6.283185307179586
cdef double _POISSON_CHUNK = 500.0
cdef long _POISSON_KMAX = 1100


cdef inline void _philox_block(uint32_t c0, uint32_t c1, uint32_t c2,
                               uint32_t c3, uint32_t k0, uint32_t k1,
                               uint32_t* out) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t hi0, lo0, hi1, lo1
    cdef int r
    for r in range(10):
        p0 = (<uint64_t>0xD2511F53U) * c0
        p1 = (<uint64_t>0xCD9E8D57U) * c2
        hi0 = <uint32_t>(p0 >> 32)
        lo0 = <uint32_t>(p0 & 0xFFFFFFFFU)
        hi1 = <uint32_t>(p1 >> 32)
        lo1 = <uint32_t>(p1 & 0xFFFFFFFFU)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = k0 + 0x9E3779B9U
        k1 = k1 + 0xBB67AE85U
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Array wrapper over the scalar block function, for parity tests."""
    a0 = np.atleast_1d(np.asarray(c0, dtype=np.uint32)).ravel()
    a1 = np.atleast_1d(np.asarray(c1, dtype=np.uint32)).ravel()
    a2 = np.atleast_1d(np.asarray(c2, dtype=np.uint32)).ravel()
    a3 = np.atleast_1d(np.asarray(c3, dtype=np.uint32)).ravel()
    a1, a2, a3 = (np.broadcast_to(a, a0.shape).copy() for a in (a1, a2, a3))
    cdef uint32_t kk0 = <uint32_t>(int(k0) & 0xFFFFFFFF)
    cdef uint32_t kk1 = <uint32_t>(int(k1) & 0xFFFFFFFF)
    out = [np.empty(a0.shape, dtype=np.uint32) for _ in range(4)]
    cdef uint32_t block[4]
    cdef Py_ssize_t i
    for i in range(a0.shape[0]):
        _philox_block(a0[i], a1[i], a2[i], a3[i], kk0, kk1, block)
        out[0][i] = block[0]
        out[1][i] = block[1]
        out[2][i] = block[2]
        out[3][i] = block[3]
    return tuple(out)


cdef inline long _poisson_pixel(double lam, uint32_t x, uint32_t y,
                                uint32_t frame, uint32_t k0,
                                uint32_t k1) noexcept nogil:
    cdef long chunks = 1 + <long>(lam / _POISSON_CHUNK)
    cdef double lam_c = lam / chunks
    cdef long total = 0
    cdef long i, k
    cdef double u, p, cum
    cdef uint32_t block[4]
    cdef uint64_t bits
    for i in range(chunks):
        _philox_block(x, y, frame,
                      (_KIND_POISSON << 24) | <uint32_t>i,
                      k0, k1, block)
        bits = block[0] | (<uint64_t>block[1] << 32)
        u = <double>(bits >> 11) * _INV_2_53
        p = exp(-lam_c)
        cum = p
        k = 0
        while u > cum and k < _POISSON_KMAX:
            k += 1
            p *= lam_c / k
            cum += p
        total += k
    return total


cdef inline double _gauss_pixel(double sigma, uint32_t x, uint32_t y,
                                uint32_t frame, uint32_t k0,
                                uint32_t k1) noexcept nogil:
    cdef uint32_t block[4]
    cdef uint64_t a, b
    cdef double u1, u2
    _philox_block(x, y, frame, _KIND_GAUSS << 24, k0, k1, block)
    a = block[0] | (<uint64_t>block[1] << 32)
    b = block[2] | (<uint64_t>block[3] << 32)
    u1 = (<double>((a >> 11) + 1)) * _INV_2_53
    u2 = (<double>(b >> 11)) * _INV_2_53
    return sigma * sqrt(-2.0 * log(u1)) * cos(_TWO_PI * u2)


cdef inline uint8_t _quantize_pixel(double value, int bits, int threshold,
                                    double top) noexcept nogil:
    cdef double rounded = floor(value + 0.5)
    if bits == 1:
        return 1 if rounded >= threshold else 0
    if rounded < 0.0:
        return 0
    if rounded > top:
        return <uint8_t>top
    return <uint8_t>rounded


def quantize(values, int bits, int threshold):
    v = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    flat = v.ravel()
    out = np.empty(flat.shape[0], dtype=np.uint8)
    cdef const double[::1] src = flat
    cdef uint8_t[::1] dst = out
    cdef double top = <double>((1 << bits) - 1)
    cdef Py_ssize_t i
    with nogil:
        for i in range(src.shape[0]):
            dst[i] = _quantize_pixel(src[i], bits, threshold, top)
    return out.reshape(v.shape)


def simulate_rows(scene, int y0, int y1, double alpha, double dark_electrons,
                  double read_sigma, int bits, int threshold,
                  seed, int frame_index):
    """Quantized sensor output for rows [y0, y1) of one frame."""
    cdef const double[:, :] grid = np.asarray(scene, dtype=np.float64)
    cdef Py_ssize_t width = grid.shape[1]
    out = np.empty((y1 - y0, width), dtype=np.uint8)
    cdef uint8_t[:, ::1] res = out
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint32_t k0 = <uint32_t>(s & 0xFFFFFFFFU)
    cdef uint32_t k1 = <uint32_t>(s >> 32)
    cdef uint32_t frame = <uint32_t>frame_index
    cdef double top = <double>((1 << bits) - 1)
    cdef Py_ssize_t y, x
    cdef double lam, analog
    with nogil:
        for y in range(y0, y1):
            for x in range(width):
                lam = alpha * (grid[y, x] + dark_electrons)
                analog = <double>_poisson_pixel(lam, <uint32_t>x, <uint32_t>y,
                                                frame, k0, k1)
                if read_sigma > 0.0:
                    analog = analog + _gauss_pixel(read_sigma, <uint32_t>x,
                                                   <uint32_t>y, frame, k0, k1)
                res[y - y0, x] = _quantize_pixel(analog, bits, threshold, top)
    return out


def nlm(image, int patch_radius, int search_radius, double h):
    """Non-local means; see the reference backend for the exact weighting."""
    img = np.asarray(image, dtype=np.float64)
    if h <= 0.0:
        return img.copy()
    cdef int pr = patch_radius
    cdef int sr = search_radius
    cdef int pad = pr + sr
    padded = np.pad(img, pad, mode="edge")
    out = np.empty_like(img)
    cdef const double[:, ::1] p = np.ascontiguousarray(padded)
    cdef double[:, ::1] res = out
    cdef Py_ssize_t hh = img.shape[0]
    cdef Py_ssize_t ww = img.shape[1]
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double n_patch = <double>((2 * pr + 1) * (2 * pr + 1))
    cdef Py_ssize_t y, x
    cdef int dy, dx, py, px
    cdef double num, den, ssd, diff, w
    with nogil:
        for y in range(hh):
            for x in range(ww):
                num = 0.0
                den = 0.0
                for dy in range(-sr, sr + 1):
                    for dx in range(-sr, sr + 1):
                        if dy == 0 and dx == 0:
                            w = 1.0
                        else:
                            ssd = 0.0
                            for py in range(-pr, pr + 1):
                                for px in range(-pr, pr + 1):
                                    diff = (p[pad + y + py, pad + x + px]
                                            - p[pad + y + dy + py,
                                                pad + x + dx + px])
                                    ssd += diff * diff
                            w = exp(-(ssd / n_patch) * inv_h2)
                        num += w * p[pad + y + dy, pad + x + dx]
                        den += w
                res[y, x] = num / den
    return out


def kernel_merge(frames, weights):
    """Merge with per-pixel weights; accumulation order matches reference."""
    f = np.ascontiguousarray(np.asarray(frames, dtype=np.float64))
    w = np.ascontiguousarray(np.asarray(weights, dtype=np.float64))
    cdef const double[:, :, ::1] fr = f
    cdef const double[:, :, :, :, ::1] wt = w
    cdef Py_ssize_t t_count = fr.shape[0]
    cdef Py_ssize_t hh = fr.shape[1]
    cdef Py_ssize_t ww = fr.shape[2]
    cdef Py_ssize_t k = wt.shape[3]
    cdef Py_ssize_t r = k // 2
    out = np.zeros((hh, ww), dtype=np.float64)
    cdef double[:, ::1] res = out
    cdef Py_ssize_t y, x, t, ky, kx
    cdef Py_ssize_t sy, sx
    cdef double acc
    with nogil:
        for y in range(hh):
            for x in range(ww):
                acc = 0.0
                for t in range(t_count):
                    for ky in range(k):
                        for kx in range(k):
                            sy = y + ky - r
                            sx = x + kx - r
                            if 0 <= sy < hh and 0 <= sx < ww:
                                acc += wt[y, x, t, ky, kx] * fr[t, sy, sx]
                res[y, x] = acc
    return out
