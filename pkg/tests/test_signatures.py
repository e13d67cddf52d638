import math

import numpy as np
import pytest

import radexpo as rx
from radexpo.signatures import (
    PATCH_ROWS,
    Normalization,
    extract_signature,
    median_signature,
    normalize_signature,
    range_bin_of,
)


def heatmap(d=64, r=256, seed=0):
    rng = np.random.default_rng(seed)
    return rx.RDHeatmap("r0", 0.0, rng.uniform(0, 1, (d, r)).astype(np.float32), 0.0375, 0.14)


class TestExtract:
    def test_center_patch_rows(self):
        hm = heatmap()
        sig = extract_signature(hm, 50)
        assert sig.patch.shape == (PATCH_ROWS, 64)
        np.testing.assert_array_equal(sig.patch, hm.data[:, 40:61].T)

    def test_boundary_zero_fill(self):
        hm = heatmap()
        sig = extract_signature(hm, 5)
        assert np.all(sig.patch[:5, :] == 0.0)
        np.testing.assert_array_equal(sig.patch[5:, :], hm.data[:, 0:16].T)

    def test_overlap_bit_identical(self):
        hm = heatmap(seed=3)
        sig = extract_signature(hm, 100)
        assert np.array_equal(sig.patch, hm.data[:, 90:111].T.astype(float))

    def test_out_of_range_center(self):
        hm = heatmap()
        with pytest.raises(ValueError):
            extract_signature(hm, 256)
        with pytest.raises(ValueError):
            extract_signature(hm, -1)


class TestRangeBinOf:
    POSE = rx.RadarPose("r0", (0.0, 0.0), max_range_m=9.0)
    CFG = rx.ChirpConfig()

    def test_hand_value(self):
        # 2.7 m at ~3.75 cm resolution falls in bin 72
        assert range_bin_of((0.0, 2.7), self.POSE, self.CFG) == 72

    def test_zero_range(self):
        assert range_bin_of((0.0, 0.0), self.POSE, self.CFG) == 0

    def test_beyond_max_range_clamps_with_warning(self):
        with pytest.warns(UserWarning):
            b = range_bin_of((0.0, 9.8), self.POSE, self.CFG)
        assert b == self.CFG.range_bins - 1

    def test_behind_radar_rejected(self):
        with pytest.raises(ValueError):
            range_bin_of((0.0, -1.0), self.POSE, self.CFG)


class TestNormalize:
    def sig_of(self, patch):
        return rx.RDSignature(1, "r0", 0.0, patch, 50)

    def test_constant_patch_value(self):
        sig = self.sig_of(np.full((21, 182), 2.0))
        out = normalize_signature(sig)
        expected = 2.0 / math.sqrt(21 * 182 * 4.0)
        np.testing.assert_allclose(out.patch, expected, rtol=1e-12)
        assert out.normalization is Normalization.UNIT_ENERGY
        assert abs(np.linalg.norm(out.patch) - 1.0) < 1e-9

    def test_idempotent(self):
        sig = self.sig_of(np.random.default_rng(0).uniform(0, 1, (21, 40)))
        once = normalize_signature(sig)
        twice = normalize_signature(once)
        assert twice is once

    def test_scale_invariance(self):
        patch = np.random.default_rng(1).uniform(0, 1, (21, 40))
        a = normalize_signature(self.sig_of(patch))
        b4 = normalize_signature(self.sig_of(patch * 4.0))
        assert np.array_equal(a.patch, b4.patch)  # power-of-two scale is exact
        b5 = normalize_signature(self.sig_of(patch * 5.0))
        np.testing.assert_allclose(a.patch, b5.patch, rtol=1e-12)

    def test_zero_patch_rejected(self):
        with pytest.raises(ValueError):
            normalize_signature(self.sig_of(np.zeros((21, 40))))

    def test_patch_shape_enforced(self):
        with pytest.raises(ValueError):
            rx.RDSignature(1, "r0", 0.0, np.zeros((20, 40)), 50)


class TestEnvironmentAgnostic:
    def test_distant_clutter_never_in_patch(self):
        def scene_with(clutter):
            return rx.Scene(
                workers=(
                    rx.WorkerSpec(
                        "w", (0.0, 2.7), rx.Activity.GRINDING, motion_axis_rad=1.2
                    ),
                ),
                radars=(rx.RadarPose("r0", (0.0, 0.0)),),
                clutter=clutter,
                rng_seed=5,
            )

        clean = scene_with(())
        dirty = scene_with((rx.ClutterSpec((0.0, 7.5)),))  # ~128 bins away
        pose = clean.radars[0]
        for k in range(6):
            _, hm_clean = rx.simulate_frame(clean, 0, k / 10.0)
            _, hm_dirty = rx.simulate_frame(dirty, 0, k / 10.0)
            r0 = range_bin_of((0.0, 2.7), pose, clean.chirp)
            a = extract_signature(hm_clean, r0)
            b = extract_signature(hm_dirty, r0)
            assert np.array_equal(a.patch, b.patch)


class TestMedian:
    def test_median_over_window(self):
        sigs = [
            rx.RDSignature(1, "r0", t / 10, np.full((21, 8), float(v)), 40)
            for t, v in enumerate([1.0, 5.0, 2.0])
        ]
        med = median_signature(sigs)
        assert np.all(med.patch == 2.0)

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            median_signature([])
