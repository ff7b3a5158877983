"""Trajectories, warping, cropping, and triplet assembly."""

import math

import numpy as np
import pytest

from helpers import make_scene
from qisim import motion, sensor
from qisim.types import LocalMotionSpec, MotionTrajectory, SceneImage, SensorConfig


def _cfg(alpha, bits=3, frames=8):
    return SensorConfig(gain_alpha=alpha, dark_current_rate=0.0,
                        read_noise_sigma=0.0, adc_bits=bits,
                        frames_per_burst=frames)


class TestTrajectorySampling:
    def test_linear_spacing_is_uniform(self):
        traj = motion.linear_trajectory((28.0, 0.0), 8)
        for t in range(8):
            assert traj.displacements[t, 0] == pytest.approx(4.0 * t, abs=1e-12)
            assert traj.displacements[t, 1] == 0.0

    def test_degenerate_range_gives_static_trajectory(self):
        traj = motion.sample_global_trajectory(3, (0.0, 0.0), 8, "linear")
        assert np.allclose(traj.displacements, 0.0, atol=1e-12)

    def test_magnitudes_land_in_range(self):
        for seed in range(2000):
            traj = motion.sample_global_trajectory(seed)
            assert 7.0 <= traj.magnitude <= 35.0

    def test_smooth_random_keeps_anchor_and_endpoint(self):
        for seed in range(50):
            lin = motion.sample_global_trajectory(seed, (7, 35), 8, "linear")
            sm = motion.sample_global_trajectory(seed, (7, 35), 8, "smooth-random")
            assert np.all(sm.displacements[0] == 0.0)
            assert np.allclose(sm.displacements[-1], lin.displacements[-1])
            assert 7.0 <= sm.magnitude <= 35.0
            # interior frames deviate from the linear path, boundedly
            dev = np.abs(sm.displacements[1:-1] - lin.displacements[1:-1])
            assert dev.max() < 4.0

    def test_inverted_range_rejected(self):
        with pytest.raises(ValueError):
            motion.sample_global_trajectory(0, (5.0, 2.0))

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            motion.sample_global_trajectory(0, model="quadratic")

    def test_sampling_is_deterministic(self):
        a = motion.sample_global_trajectory(123, model="smooth-random")
        b = motion.sample_global_trajectory(123, model="smooth-random")
        assert np.array_equal(a.displacements, b.displacements)


class TestWarpSequence:
    def test_zero_trajectory_frames_equal_scene(self):
        scene = make_scene(24, 24, 0)
        traj = MotionTrajectory(np.zeros((4, 2)))
        frames = motion.warp_sequence(scene, traj)
        for f in frames:
            assert np.array_equal(f.data, scene.data)

    def test_integer_shift_matches_index_oracle(self):
        scene = make_scene(20, 20, 1)
        traj = MotionTrajectory(np.array([[0.0, 0.0], [3.0, 0.0]]))
        frame = motion.warp_sequence(scene, traj)[1]
        # content moves +3 columns: out[y, x] == scene[y, x - 3] off-border
        assert np.array_equal(frame.data[:, 3:], scene.data[:, :-3])

    def test_integer_shift_both_axes(self):
        scene = make_scene(20, 20, 2)
        traj = MotionTrajectory(np.array([[0.0, 0.0], [2.0, 5.0]]))
        frame = motion.warp_sequence(scene, traj)[1]
        assert np.array_equal(frame.data[5:, 2:], scene.data[:-5, :-2])

    def test_translation_composition_on_interior(self):
        scene = make_scene(32, 32, 3)
        one = motion.warp_sequence(
            scene, MotionTrajectory(np.array([[0.0, 0.0], [5.0, 1.0]])))[1]
        two = motion.warp_sequence(
            one, MotionTrajectory(np.array([[0.0, 0.0], [2.0, 3.0]])))[1]
        direct = motion.warp_sequence(
            scene, MotionTrajectory(np.array([[0.0, 0.0], [7.0, 4.0]])))[1]
        assert np.array_equal(two.data[8:, 8:], direct.data[8:, 8:])

    def test_bilinear_respects_value_bounds(self):
        scene = make_scene(48, 48, 4, lo=0.2, hi=0.8)
        for seed in range(10):
            traj = motion.sample_global_trajectory(seed, (1, 10), 6,
                                                   "smooth-random")
            for f in motion.warp_sequence(scene, traj):
                assert f.data.min() >= scene.data.min() - 1e-12
                assert f.data.max() <= scene.data.max() + 1e-12

    def test_rotation_fixes_the_centroid(self):
        grid = np.zeros((17, 17))
        grid[8, 8] = 1.0
        scene = SceneImage(grid)
        mask = np.zeros((17, 17), dtype=bool)
        mask[6:11, 6:11] = True  # centroid exactly (8, 8)
        spec = LocalMotionSpec(
            mask=mask,
            transforms=np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 15.0]]),
        )
        traj = MotionTrajectory(np.zeros((2, 2)))
        frame = motion.warp_sequence(scene, traj, spec)[1]
        assert frame.data[8, 8] == pytest.approx(1.0, abs=1e-12)

    def test_local_translation_moves_foreground_only(self):
        grid = np.full((24, 24), 0.25)
        grid[10:14, 10:14] = 0.75
        scene = SceneImage(grid)
        mask = np.zeros((24, 24), dtype=bool)
        mask[10:14, 10:14] = True
        spec = LocalMotionSpec(
            mask=mask,
            transforms=np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0]]),
        )
        traj = MotionTrajectory(np.zeros((2, 2)))
        frame = motion.warp_sequence(scene, traj, spec)[1]
        # foreground square composited at +4 columns
        assert np.all(frame.data[10:14, 14:18] == 0.75)
        # every pixel not covered by the moved foreground shows the fixed
        # background plate, i.e. the original scene (object ghost included)
        covered = np.zeros((24, 24), dtype=bool)
        covered[10:14, 14:18] = True
        assert np.array_equal(frame.data[~covered], scene.data[~covered])
        # untouched background unchanged
        assert np.all(frame.data[:10, :] == 0.25)

    def test_trajectory_length_mismatch_rejected(self):
        scene = make_scene(16, 16, 5)
        traj = MotionTrajectory(np.zeros((4, 2)))
        with pytest.raises(ValueError):
            motion.warp_sequence(scene, traj, frame_count=8)

    def test_mask_shape_must_match(self):
        scene = make_scene(16, 16, 6)
        mask = np.ones((8, 8), dtype=bool)
        spec = LocalMotionSpec(mask=mask, transforms=np.zeros((2, 3)))
        traj = MotionTrajectory(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            motion.warp_sequence(scene, traj, spec)


class TestCropPatch:
    def test_default_patch_size(self):
        scene = make_scene(160, 160, 7)
        patch = motion.crop_patch(scene, seed=1)
        assert patch.data.shape == (64, 64)

    def test_margin_keeps_offsets_inside(self):
        scene = make_scene(160, 160, 8)
        for seed in range(200):
            y, x = motion.sample_crop_offset(160, 160, 64, 35, seed)
            assert 35 <= y <= 160 - 64 - 35
            assert 35 <= x <= 160 - 64 - 35

    def test_fixed_seed_fixed_crop(self):
        scene = make_scene(128, 128, 9)
        a = motion.crop_patch(scene, 32, 10, seed=77)
        b = motion.crop_patch(scene, 32, 10, seed=77)
        assert np.array_equal(a.data, b.data)

    def test_source_too_small_rejected(self):
        scene = make_scene(100, 100, 10)
        with pytest.raises(ValueError):
            motion.crop_patch(scene, 64, 35, seed=0)


class TestMakeTriplet:
    def test_clean_stack_is_seed_independent(self):
        scene = make_scene(32, 32, 11)
        traj = motion.sample_global_trajectory(5, (2, 6), 4)
        cfg = _cfg(2.0, frames=4)
        t1 = motion.make_triplet(scene, cfg, seed=100, trajectory=traj)
        t2 = motion.make_triplet(scene, cfg, seed=200, trajectory=traj)
        for f1, f2 in zip(t1.x_motion, t2.x_motion):
            assert np.array_equal(f1.data, f2.data)

    def test_anchoring_is_exact(self):
        scene = make_scene(32, 32, 12)
        traj = motion.sample_global_trajectory(6, (2, 6), 4)
        t = motion.make_triplet(scene, _cfg(2.0, frames=4), 1, traj)
        assert t.x_motion[0].data is t.x_true.data or np.array_equal(
            t.x_motion[0].data, t.x_true.data)

    def test_noise_and_qis_streams_are_disjoint(self):
        scene = make_scene(32, 32, 13)
        traj = MotionTrajectory(np.zeros((4, 2)))
        t = motion.make_triplet(scene, _cfg(2.0, frames=4), 3, traj)
        assert not np.array_equal(t.x_noise.data[0], t.x_qis.data[0])

    def test_static_qis_matches_noise_distribution(self):
        # zero trajectory: any x_qis frame must match x_noise in distribution
        scene = make_scene(320, 320, 14)
        traj = MotionTrajectory(np.zeros((8, 2)))
        t = motion.make_triplet(scene, _cfg(2.0), 9, traj)
        a = t.x_noise.data[0].astype(np.float64).ravel()
        b = t.x_qis.data[0].astype(np.float64).ravel()
        se = math.sqrt(a.var() / a.size + b.var() / b.size)
        assert abs(a.mean() - b.mean()) < 4 * se

    def test_noise_burst_is_single_frame(self):
        scene = make_scene(16, 16, 15)
        traj = MotionTrajectory(np.zeros((2, 2)))
        t = motion.make_triplet(scene, _cfg(1.0, frames=2), 4, traj)
        assert t.x_noise.frame_count == 1
        assert t.x_qis.frame_count == 2


class TestLocalSpecSampling:
    def test_sampled_spec_satisfies_invariants(self):
        mask = np.zeros((32, 32), dtype=bool)
        mask[8:20, 8:20] = True
        for seed in range(30):
            spec = motion.sample_local_spec(mask, seed, (3, 9), 8)
            assert np.all(spec.transforms[0] == 0.0)
            assert spec.transforms[:, 2].min() >= 0.0
            assert spec.transforms[:, 2].max() <= 15.0


def test_derive_seed_is_stable_and_spread():
    assert motion.derive_seed(42, 1) == motion.derive_seed(42, 1)
    seen = {motion.derive_seed(42, i) for i in range(1000)}
    assert len(seen) == 1000
    assert all(0 <= s < 2 ** 64 for s in seen)
