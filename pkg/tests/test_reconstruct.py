"""Reconstruction baselines against enumeration and direct-loop oracles."""

import math

import numpy as np
import pytest

from helpers import clipped_poisson_mean, make_scene, stabilized_variance_oracle
from qisim import reconstruct, sensor
from qisim.reconstruct import (
    ReconstructionMethod,
    anscombe_binomial,
    anscombe_binomial_inverse,
    apply_kernel_field,
    average_burst,
    denoise_nlm,
    mle_invert_binary,
    reconstruct_pipeline,
)
from qisim.types import Burst, KernelField, SceneImage, SensorConfig


def _flat(value, n):
    return SceneImage(np.full((n, n), value))


def _noiseless(alpha, bits=3, frames=8):
    return SensorConfig(gain_alpha=alpha, dark_current_rate=0.0,
                        read_noise_sigma=0.0, adc_bits=bits,
                        frames_per_burst=frames)


def _zero_burst(frames=2, n=4, bits=3):
    cfg = SensorConfig(gain_alpha=1.0, dark_current_rate=0.0, adc_bits=bits,
                       frames_per_burst=frames)
    return Burst(data=np.zeros((frames, n, n), dtype=np.uint8),
                 config=cfg, seed=0)


class TestAverageBurst:
    def test_zero_burst_maps_to_zero_image(self):
        out = average_burst(_zero_burst())
        assert not out.data.any()

    def test_flat_scene_mean_recovered_within_one_percent(self):
        scene = _flat(0.5, 1000)
        cfg = SensorConfig(gain_alpha=4.0, dark_current_rate=0.0,
                           read_noise_sigma=0.01, adc_bits=3,
                           frames_per_burst=8)
        burst = sensor.simulate_burst(scene, cfg, seed=11)
        out = average_burst(burst)
        assert abs(out.data.mean() - 0.5) < 0.005

    def test_mse_ratio_single_vs_eight_frames(self):
        scene = _flat(0.5, 320)  # 2 ppp at alpha 4
        one = sensor.simulate_burst(scene, _noiseless(4.0, frames=1), seed=3)
        eight = sensor.simulate_burst(scene, _noiseless(4.0, frames=8), seed=4)
        mse1 = np.mean((average_burst(one).data - 0.5) ** 2)
        mse8 = np.mean((average_burst(eight).data - 0.5) ** 2)
        assert 6.0 <= mse1 / mse8 <= 9.5

    def test_noiseless_integer_scene_is_exact(self):
        # alpha*x integral, no noise sources, no clipping: each frame holds
        # the same count and the average inverts exactly
        cfg = _noiseless(alpha=4.0, bits=5, frames=3)
        data = np.full((3, 6, 6), 2, dtype=np.uint8)
        burst = Burst(data=data, config=cfg, seed=0)
        assert np.all(average_burst(burst).data == 0.5)


class TestAnscombeBinomial:
    def test_zero_count_closed_form(self):
        expected = 2.0 * math.sqrt(8.5) * math.asin(math.sqrt(0.375 / 8.75))
        out = anscombe_binomial(np.array([[0]]), 8)
        assert out[0, 0] == pytest.approx(expected, rel=1e-12)

    def test_strictly_monotone_in_count(self):
        vals = anscombe_binomial(np.arange(9), 8)
        assert np.all(np.diff(vals) > 0)

    def test_out_of_range_sum_rejected(self):
        with pytest.raises(ValueError):
            anscombe_binomial(np.array([9]), 8)
        with pytest.raises(ValueError):
            anscombe_binomial(np.array([-1]), 8)

    def test_algebraic_inverse_round_trip(self):
        s = np.arange(9, dtype=np.float64)
        z = anscombe_binomial(s, 8)
        assert np.allclose(anscombe_binomial_inverse(z, 8), s, atol=1e-10)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_variance_stabilized_in_working_range(self, lam):
        # Monte Carlo vs the exact enumeration oracle, and the unit band
        scene = _flat(0.5, 320)
        cfg = _noiseless(alpha=2.0 * lam, bits=1, frames=8)
        burst = sensor.simulate_burst(scene, cfg, seed=int(lam * 10))
        z = anscombe_binomial(burst.data.sum(axis=0), 8)
        v = float(z.var())
        assert abs(v - stabilized_variance_oracle(lam)) < 0.02
        assert 0.7 <= v <= 1.3

    @pytest.mark.parametrize("lam", [3.0, 4.0])
    def test_variance_collapses_at_binary_saturation(self, lam):
        # beyond lam ~ 2.3 the binary channel saturates and no transform of
        # the 9-point support can hold variance near 1; the implementation
        # still matches the exact enumeration oracle
        scene = _flat(0.5, 320)
        cfg = _noiseless(alpha=2.0 * lam, bits=1, frames=8)
        burst = sensor.simulate_burst(scene, cfg, seed=int(lam * 10))
        z = anscombe_binomial(burst.data.sum(axis=0), 8)
        oracle = stabilized_variance_oracle(lam)
        assert abs(float(z.var()) - oracle) < 0.02
        assert oracle < 0.7


class TestMleInvertBinary:
    def test_zero_rate_maps_to_zero(self):
        burst = _zero_burst(frames=8, bits=1)
        assert not mle_invert_binary(burst).data.any()

    def test_inverts_the_binary_rate_law(self):
        # p = 1 - exp(-1) ones rate -> lambda = 1 exactly
        p = 1.0 - math.exp(-1.0)
        lam = reconstruct._binary_rate_to_flux(np.array([p]), 1000, 1.0)
        assert lam[0] == pytest.approx(1.0, rel=1e-12)

    def test_identity_on_noiseless_rates(self):
        # gain 4 keeps lambda/alpha away from the [0, 1] flux clamp; every
        # lambda below the saturation clamp -ln(1/16) inverts exactly
        lams = np.linspace(0.05, 2.7, 20)
        rates = 1.0 - np.exp(-lams)
        out = reconstruct._binary_rate_to_flux(rates, 8, 4.0)
        assert np.allclose(4.0 * out, lams, rtol=1e-12)

    def test_saturated_pixfloat_stays_finite(self):
        cfg = _noiseless(alpha=4.0, bits=1, frames=8)
        burst = Burst(data=np.ones((8, 4, 4), dtype=np.uint8), config=cfg, seed=0)
        out = mle_invert_binary(burst)
        expected = -math.log(1.0 / 16.0) / 4.0
        assert np.allclose(out.data, expected, rtol=1e-12)

    def test_multibit_burst_rejected(self):
        with pytest.raises(ValueError, match="1-bit"):
            mle_invert_binary(_zero_burst(bits=3))


class TestDenoiseNlm:
    def test_constant_image_is_fixed_point(self):
        img = _flat(0.4, 24)
        out = denoise_nlm(img, 1, 3, 0.2)
        assert np.allclose(out.data, 0.4, atol=1e-12)

    def test_vanishing_filter_strength_is_identity(self):
        scene = make_scene(24, 24, 3)
        out = denoise_nlm(scene, 1, 3, 1e-9)
        assert np.max(np.abs(out.data - scene.data)) < 1e-6

    def test_output_range_inside_input_range(self):
        scene = make_scene(32, 32, 4, lo=0.2, hi=0.7)
        out = denoise_nlm(scene, 2, 4, 0.5)
        assert out.data.min() >= scene.data.min() - 1e-12
        assert out.data.max() <= scene.data.max() + 1e-12

    def test_reduces_mse_on_noisy_flat_image(self):
        rng = np.random.default_rng(9)
        truth = np.full((64, 64), 0.5)
        noisy = np.clip(truth + rng.normal(0, 0.1, truth.shape), 0, 1)
        out = denoise_nlm(SceneImage(noisy), 1, 5, 0.3)
        assert np.mean((out.data - truth) ** 2) < np.mean((noisy - truth) ** 2)

    def test_nonpositive_radii_rejected(self):
        scene = make_scene(16, 16, 5)
        with pytest.raises(ValueError):
            denoise_nlm(scene, 0, 3, 0.1)
        with pytest.raises(ValueError):
            denoise_nlm(scene, 1, 0, 0.1)


def _delta_field(h, w, t_count, k, hot_frame=0):
    weights = np.zeros((h, w, t_count, k, k))
    weights[:, :, hot_frame, k // 2, k // 2] = 1.0
    return KernelField(weights=weights, normalize_mode="sum-to-one")


class TestApplyKernelField:
    def test_delta_kernel_returns_reference_frame(self):
        rng = np.random.default_rng(6)
        frames = rng.uniform(0, 1, size=(3, 12, 14))
        field = _delta_field(12, 14, 3, 3)
        out = apply_kernel_field(frames, field)
        assert np.allclose(out.data, frames[0], atol=1e-12)

    def test_uniform_k1_weights_give_temporal_mean(self):
        rng = np.random.default_rng(7)
        frames = rng.uniform(0, 1, size=(4, 10, 10))
        weights = np.full((10, 10, 4, 1, 1), 0.25)
        field = KernelField(weights=weights, normalize_mode="sum-to-one")
        out = apply_kernel_field(frames, field)
        assert np.allclose(out.data, frames.mean(axis=0), atol=1e-12)

    def test_uniform_k3_on_constant_frame_matches_direct_convolution(self):
        frames = np.full((1, 9, 9), 0.6)
        weights = np.full((9, 9, 1, 3, 3), 1.0 / 9.0)
        field = KernelField(weights=weights, normalize_mode="sum-to-one")
        out = apply_kernel_field(frames, field)
        # direct convolution oracle with zero padding
        oracle = np.zeros((9, 9))
        for y in range(9):
            for x in range(9):
                acc = 0.0
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        if 0 <= y + dy < 9 and 0 <= x + dx < 9:
                            acc += 0.6 / 9.0
                oracle[y, x] = acc
        assert np.allclose(out.data, oracle, atol=1e-12)
        assert np.allclose(out.data[1:-1, 1:-1], 0.6, atol=1e-12)

    def test_merge_is_linear_in_frames(self):
        rng = np.random.default_rng(8)
        fa = rng.uniform(0, 0.5, size=(2, 8, 8))
        fb = rng.uniform(0, 0.5, size=(2, 8, 8))
        w = rng.uniform(0, 0.1, size=(8, 8, 2, 3, 3))
        field = KernelField(weights=w, normalize_mode="none")
        out_sum = apply_kernel_field(fa + fb, field)
        out_parts = apply_kernel_field(fa, field).data + apply_kernel_field(fb, field).data
        assert np.allclose(out_sum.data, out_parts, atol=1e-12)

    def test_softmax_mode_normalizes_per_pixel(self):
        rng = np.random.default_rng(9)
        frames = np.full((2, 6, 6), 0.5)
        w = rng.normal(0, 1, size=(6, 6, 2, 1, 1))
        field = KernelField(weights=w, normalize_mode="softmax")
        out = apply_kernel_field(frames, field)
        assert np.allclose(out.data, 0.5, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        frames = np.zeros((2, 8, 8))
        field = _delta_field(8, 9, 2, 3)
        with pytest.raises(ValueError):
            apply_kernel_field(frames, field)


class TestPipeline:
    def test_burst_average_on_zero_burst(self):
        out = reconstruct_pipeline(_zero_burst(), ReconstructionMethod.burst_average())
        assert not out.data.any()

    def test_anscombe_beats_average_at_one_ppp(self):
        scene = make_scene(96, 96, 42)
        alpha = sensor.calibrate_gain(scene, 1.0)
        cfg = _noiseless(alpha, bits=1, frames=8)
        burst = sensor.simulate_burst(scene, cfg, seed=7)
        avg = reconstruct_pipeline(burst, ReconstructionMethod.burst_average())
        ans = reconstruct_pipeline(burst, ReconstructionMethod.anscombe_denoise())
        mse_avg = np.mean((avg.data - scene.data) ** 2)
        mse_ans = np.mean((ans.data - scene.data) ** 2)
        assert mse_ans < mse_avg

    def test_average_then_denoise_runs_and_improves(self):
        scene = make_scene(64, 64, 43)
        cfg = _noiseless(sensor.calibrate_gain(scene, 2.0), bits=3, frames=8)
        burst = sensor.simulate_burst(scene, cfg, seed=9)
        avg = reconstruct_pipeline(burst, ReconstructionMethod.burst_average())
        den = reconstruct_pipeline(burst, ReconstructionMethod.average_then_denoise())
        mse_avg = np.mean((avg.data - scene.data) ** 2)
        mse_den = np.mean((den.data - scene.data) ** 2)
        assert mse_den < mse_avg

    def test_mle_on_multibit_burst_rejected(self):
        with pytest.raises(ValueError):
            reconstruct_pipeline(_zero_burst(bits=3), ReconstructionMethod.mle_binary())

    def test_anscombe_on_multibit_burst_rejected(self):
        with pytest.raises(ValueError):
            reconstruct_pipeline(_zero_burst(bits=3),
                                 ReconstructionMethod.anscombe_denoise())

    def test_kernel_merge_requires_field(self):
        with pytest.raises(ValueError):
            ReconstructionMethod("kernel-merge")

    def test_outputs_live_in_unit_range_with_burst_shape(self):
        scene = make_scene(48, 48, 44)
        cfg = SensorConfig(gain_alpha=sensor.calibrate_gain(scene, 1.0),
                           adc_bits=1, frames_per_burst=8)
        burst = sensor.simulate_burst(scene, cfg, seed=5)
        for method in (ReconstructionMethod.burst_average(),
                       ReconstructionMethod.mle_binary(),
                       ReconstructionMethod.anscombe_denoise(),
                       ReconstructionMethod.average_then_denoise()):
            out = reconstruct_pipeline(burst, method)
            assert out.data.shape == (48, 48)
            assert out.data.min() >= 0.0
            assert out.data.max() <= 1.0
