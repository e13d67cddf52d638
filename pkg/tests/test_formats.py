import numpy as np
import pytest

import radexpo as rx
from radexpo.exposure import ExposureRecord, PMSensorReading
from radexpo.formats import (
    DataFormatError,
    assoc_from_line,
    assoc_to_line,
    exposure_from_line,
    exposure_to_line,
    frame_from_line,
    frame_to_line,
    iso_to_seconds,
    pm_from_line,
    pm_to_line,
    read_frames,
    read_pm,
    read_rdhm,
    read_signature_dump,
    seconds_to_iso,
    write_frames,
    write_pm,
    write_rdhm,
    write_signature_dump,
    write_zone_csv,
)


class TestRdhm:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        data = rng.uniform(0, 5, (182, 256)).astype(np.float32)
        path = tmp_path / "f.rdhm"
        write_rdhm(path, data)
        back = read_rdhm(path)
        assert back.dtype == np.float32
        assert np.array_equal(back, data)

    def test_header_layout(self, tmp_path):
        path = tmp_path / "f.rdhm"
        write_rdhm(path, np.zeros((3, 5), dtype=np.float32))
        raw = path.read_bytes()
        assert raw[:4] == b"RDHM"
        assert int.from_bytes(raw[4:8], "little") == 3
        assert int.from_bytes(raw[8:12], "little") == 5
        assert int.from_bytes(raw[12:16], "little") == 0
        assert len(raw) == 16 + 3 * 5 * 4

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.rdhm"
        path.write_bytes(b"NOPE" + b"\0" * 30)
        with pytest.raises(DataFormatError):
            read_rdhm(path)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "t.rdhm"
        write_rdhm(path, np.zeros((4, 4), dtype=np.float32))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DataFormatError):
            read_rdhm(path)


class TestPointFrames:
    def test_round_trip_value_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        frames = [
            rx.PointCloudFrame("r0", k / 10.0, rng.uniform(-5, 5, (7, 5)))
            for k in range(4)
        ]
        path = tmp_path / "points.jsonl"
        write_frames(path, frames)
        back = read_frames(path)
        assert len(back) == 4
        for a, b in zip(frames, back):
            assert a.radar_id == b.radar_id
            assert a.timestamp_s == b.timestamp_s
            assert np.array_equal(a.points, b.points)

    def test_bad_record(self):
        with pytest.raises(DataFormatError):
            frame_from_line('{"radar_id": "r0"}')


class TestPm:
    def test_line_round_trip(self):
        r = PMSensorReading("pm0", (1.25, -0.5), 17.0, 10.0, 25.5, 40.125)
        back = pm_from_line(pm_to_line(r))
        assert back == r

    def test_iso_round_trip_integral_seconds(self):
        for t in (0.0, 1.0, 3599.0):
            assert iso_to_seconds(seconds_to_iso(t)) == t

    def test_file_round_trip(self, tmp_path):
        rs = [PMSensorReading(f"s{i}", (float(i), 0.0), float(i), 1, 2, 3) for i in range(5)]
        path = tmp_path / "pm.csv"
        write_pm(path, rs)
        assert read_pm(path) == rs

    def test_field_count_enforced(self):
        with pytest.raises(DataFormatError):
            pm_from_line("a,b,c")


class TestRecordLines:
    def test_assoc_round_trip(self):
        line = assoc_to_line(1.5, "r0", 3, "P2", 0.8125)
        assert assoc_from_line(line) == (1.5, "r0", 3, "P2", 0.8125)

    def test_assoc_no_match(self):
        line = assoc_to_line(1.5, "r0", 3, "P2", None)
        assert assoc_from_line(line) == (1.5, "r0", 3, "P2", None)

    def test_exposure_round_trip(self):
        rec = ExposureRecord("P1", 5.0, 5.0, np.array([10.0, 25.5, 30.25]), 50, True)
        back = exposure_from_line(exposure_to_line(rec))
        assert back.global_id == "P1"
        assert back.t0 == 5.0
        assert np.array_equal(back.values, rec.values)
        assert back.complete


class TestSignatureDump:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        patch = rng.uniform(0, 1, (21, 182)).astype(np.float32).astype(float)
        sig = rx.RDSignature(4, "r1", 2.5, patch, 77)
        path = tmp_path / "sig.rdhm"
        write_signature_dump(path, sig)
        # the dump reuses the RDHM layout with D x 21 dimensions
        raw = read_rdhm(path)
        assert raw.shape == (182, 21)
        back = read_signature_dump(path)
        assert back.local_id == 4
        assert back.radar_id == "r1"
        assert back.center_range_bin == 77
        assert np.array_equal(back.patch, sig.patch)


class TestZoneCsv:
    def test_grid_export(self, tmp_path):
        vals = np.arange(12, dtype=float).reshape(2, 2, 3)
        path = tmp_path / "zones.csv"
        write_zone_csv(path, vals, pm_class_index=1)
        rows = [line.split(",") for line in path.read_text().strip().split("\n")]
        assert float(rows[0][0]) == vals[0, 0, 1]
        assert float(rows[1][1]) == vals[1, 1, 1]
