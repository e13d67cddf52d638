import math

import numpy as np
import pytest

import radexpo as rx
from radexpo.sim import (
    C_LIGHT,
    doppler_axis,
    occluded_ids,
    range_axis,
    range_to_bin,
    synth_pm_samples,
    velocity_to_bin,
)


CFG = rx.ChirpConfig()


def one_worker_scene(pos=(0.0, 2.7), activity=rx.Activity.GRINDING, seed=3, **kw):
    return rx.Scene(
        workers=(rx.WorkerSpec("w1", pos, activity, motion_axis_rad=math.radians(80), **kw),),
        radars=(rx.RadarPose("r0", (0.0, 0.0), yaw_rad=0.0),),
        rng_seed=seed,
    )


class TestChirpMath:
    def test_beat_freq_zero(self):
        assert rx.beat_freq_to_range(0.0, CFG) == 0.0

    def test_beat_freq_hand_value(self):
        # oracle: d = c/2 * T_C/B * f_b evaluated independently
        expected = (C_LIGHT / 2.0) * (72e-6 / 4e9) * 1e6
        got = rx.beat_freq_to_range(1e6, CFG)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(2.7, abs=0.01)

    def test_range_resolution_about_4cm(self):
        assert CFG.range_resolution_m == pytest.approx(0.0375, abs=1e-3)

    def test_negative_beat_freq_rejected(self):
        with pytest.raises(ValueError):
            rx.beat_freq_to_range(-1.0, CFG)

    def test_phase_shift_zero(self):
        assert rx.phase_shift_to_velocity(0.0, CFG) == 0.0

    def test_phase_shift_pi_unambiguous_velocity(self):
        # oracle: v = delta_phi * lambda / (4 pi T_C)
        lam = C_LIGHT / 79e9
        expected = math.pi * lam / (4 * math.pi * 72e-6)
        got = rx.phase_shift_to_velocity(math.pi, CFG)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(13.18, abs=0.02)

    def test_phase_shift_odd_symmetry(self):
        for phi in (0.3, 1.1, 2.9):
            assert rx.phase_shift_to_velocity(-phi, CFG) == -rx.phase_shift_to_velocity(phi, CFG)

    def test_invalid_chirp_rejected(self):
        with pytest.raises(ValueError):
            rx.ChirpConfig(bandwidth_hz=0.0)

    def test_axis_round_trips_within_half_bin(self):
        r_centers = range_axis(CFG)
        for j in (0, 5, 100, CFG.range_bins - 1):
            assert range_to_bin(float(r_centers[j]), CFG) == j
        v_centers = doppler_axis(CFG)
        for i in (0, 1, 90, 91, CFG.doppler_bins - 1):
            assert velocity_to_bin(float(v_centers[i]), CFG) == i


class TestSimulateFrame:
    def test_empty_scene(self):
        scene = rx.Scene(workers=(), radars=(rx.RadarPose("r0", (0.0, 0.0)),), rng_seed=1)
        frame, hm = rx.simulate_frame(scene, 0, 0.0)
        assert len(frame) == 0
        assert np.all(hm.data == 0.0)

    def test_peak_at_worker_range_bin(self):
        scene = one_worker_scene()
        acc = np.zeros((CFG.doppler_bins, CFG.range_bins))
        for k in range(10):
            _, hm = rx.simulate_frame(scene, 0, k / 10.0)
            acc += hm.data
        peak_bin = int(np.argmax(acc.sum(axis=0)))
        expected = range_to_bin(2.7, CFG)
        assert abs(peak_bin - expected) <= 1

    def test_determinism_bit_identical(self):
        scene = one_worker_scene(seed=9)
        f1, h1 = rx.simulate_frame(scene, 0, 1.3)
        f2, h2 = rx.simulate_frame(scene, 0, 1.3)
        assert np.array_equal(f1.points, f2.points)
        assert np.array_equal(h1.data, h2.data)

    def test_points_within_spread_radius(self):
        scene = one_worker_scene()
        w = scene.workers[0]
        for k in range(20):
            frame, _ = rx.simulate_frame(scene, 0, k / 10.0)
            if len(frame) == 0:
                continue
            d = np.hypot(frame.xy[:, 0] - w.position[0], frame.xy[:, 1] - w.position[1])
            assert np.all(d <= w.spread_radius_m + 1e-9)

    def test_heatmap_energy_non_increasing_with_range(self):
        energies = []
        for r in (2.0, 3.5, 5.0, 7.0):
            scene = one_worker_scene(pos=(0.0, r), seed=5)
            total = 0.0
            for k in range(8):
                _, hm = rx.simulate_frame(scene, 0, k / 10.0)
                total += float(hm.data.sum())
            energies.append(total)
        assert all(a >= b for a, b in zip(energies, energies[1:]))

    def test_view_correlation_drops_with_angle(self):
        # two probe views of the same worker: a 90 degree azimuth offset
        # decorrelates the RD patch far more than a 15 degree offset
        from scipy.stats import pearsonr

        from radexpo.signatures import extract_signature, range_bin_of

        wpos = (0.0, 0.0)
        rring = 5.0
        poses = []
        for i, a in enumerate((270.0, 285.0, 0.0)):
            rad = math.radians(a)
            p = (wpos[0] + rring * math.cos(rad), wpos[1] + rring * math.sin(rad))
            los = math.atan2(wpos[1] - p[1], wpos[0] - p[0])
            poses.append(rx.RadarPose(f"a{i}", p, yaw_rad=los - math.pi / 2))
        scene = rx.Scene(
            workers=(
                rx.WorkerSpec(
                    "w", wpos, rx.Activity.GRINDING, motion_axis_rad=math.radians(55),
                    amplitude_mps=0.7, frequency_hz=2.1,
                ),
            ),
            radars=tuple(poses),
            rng_seed=3,
        )
        c15, c90 = [], []
        for k in range(20, 50):
            patches = []
            for ridx, pose in enumerate(poses):
                _, hm = rx.simulate_frame(scene, ridx, k / 10.0)
                local = pose.to_local(np.array([wpos]))[0]
                patches.append(extract_signature(hm, range_bin_of(local, pose, scene.chirp)).patch)
            c15.append(pearsonr(patches[0].ravel(), patches[1].ravel())[0])
            c90.append(pearsonr(patches[0].ravel(), patches[2].ravel())[0])
        assert np.mean(c90) < np.mean(c15)

    def test_invalid_args(self):
        scene = one_worker_scene()
        with pytest.raises(ValueError):
            rx.simulate_frame(scene, 0, -1.0)
        with pytest.raises(ValueError):
            rx.simulate_frame(scene, 5, 0.0)


class TestGroundTruth:
    def test_static_positions_at_any_time(self):
        scene = one_worker_scene(pos=(1.0, 2.0))
        for t in (0.0, 3.3, 10.0):
            truth = rx.ground_truth(scene, t)
            assert truth == [("w1", (1.0, 2.0), rx.Activity.GRINDING)]

    def test_count_matches_scene(self):
        from radexpo.scenes import lab_scene

        scene = lab_scene(4)
        assert len(rx.ground_truth(scene, 1.0)) == 4

    def test_oscillating_worker_centroid_constant(self):
        scene = one_worker_scene()
        a = rx.ground_truth(scene, 0.0)
        b = rx.ground_truth(scene, 7.7)
        assert a[0][1] == b[0][1]


class TestSceneValidation:
    def test_duplicate_worker_ids(self):
        with pytest.raises(ValueError):
            rx.Scene(
                workers=(
                    rx.WorkerSpec("w", (0, 2), rx.Activity.GRINDING),
                    rx.WorkerSpec("w", (1, 2), rx.Activity.CHIPPING),
                ),
                radars=(rx.RadarPose("r0", (0.0, 0.0)),),
            )

    def test_worker_outside_all_fov(self):
        with pytest.raises(ValueError):
            rx.Scene(
                workers=(rx.WorkerSpec("w", (0.0, -5.0), rx.Activity.GRINDING),),
                radars=(rx.RadarPose("r0", (0.0, 0.0), yaw_rad=0.0),),
            )

    def test_fov_bounds(self):
        with pytest.raises(ValueError):
            rx.RadarPose("r", (0, 0), fov_azimuth_rad=0.0)


class TestDetectPoints:
    def test_detects_worker_above_noise(self):
        scene = one_worker_scene()
        _, hm = rx.simulate_frame(scene, 0, 0.5)
        det = rx.detect_points(hm, k_db=6.0, noise_floor=1e-4)
        assert det.shape[1] == 3
        assert len(det) > 0
        # strongest detection sits near the worker's range
        strongest = det[np.argmax(det[:, 2])]
        assert abs(strongest[0] - 2.7) < 0.3

    def test_empty_heatmap(self):
        hm = rx.RDHeatmap("r", 0.0, np.zeros((8, 8)), 0.1, 0.1)
        assert len(rx.detect_points(hm)) == 0


class TestOcclusion:
    def test_blocker_between(self):
        pose = rx.RadarPose("r", (0.0, 0.0), yaw_rad=0.0)
        positions = {"near": (0.0, 2.0), "far": (0.1, 5.0)}
        assert occluded_ids(positions, pose) == {"far"}

    def test_lateral_clearance(self):
        pose = rx.RadarPose("r", (0.0, 0.0), yaw_rad=0.0)
        positions = {"near": (1.5, 2.0), "far": (0.0, 5.0)}
        assert occluded_ids(positions, pose) == set()

    def test_behind_does_not_block(self):
        pose = rx.RadarPose("r", (0.0, 0.0), yaw_rad=0.0)
        positions = {"near": (0.0, 2.0), "far": (0.05, 5.0)}
        assert "near" not in occluded_ids(positions, pose)


class TestPMSampler:
    def test_activity_ordering(self):
        readings = {}
        for act in rx.Activity:
            scene = rx.Scene(
                workers=(rx.WorkerSpec("w", (0.0, 2.0), act, motion_axis_rad=1.0),),
                radars=(rx.RadarPose("r0", (0.0, 0.0)),),
                pm_sensors=(rx.PMSensorSpec("s0", (0.5, 2.0)),),
                rng_seed=4,
            )
            vals = [synth_pm_samples(scene, float(t))[0][4] for t in range(10)]
            readings[act] = np.mean(vals)
        assert readings[rx.Activity.GRINDING] > readings[rx.Activity.CHIPPING]
        assert readings[rx.Activity.CHIPPING] > readings[rx.Activity.POLISHING]

    def test_proximity_effect(self):
        scene = rx.Scene(
            workers=(rx.WorkerSpec("w", (0.0, 2.0), rx.Activity.GRINDING, motion_axis_rad=1.0),),
            radars=(rx.RadarPose("r0", (0.0, 0.0)),),
            pm_sensors=(
                rx.PMSensorSpec("close", (0.3, 2.0)),
                rx.PMSensorSpec("far", (4.0, 2.0)),
            ),
            rng_seed=4,
        )
        rows = synth_pm_samples(scene, 0.0)
        by_id = {r[0]: r[4] for r in rows}
        assert by_id["close"] > 3 * by_id["far"]
