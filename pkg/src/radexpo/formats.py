"""On-disk formats for datasets and pipeline outputs.

Binary heatmaps use a fixed 16-byte header; every text stream is
line-delimited with documented field order so that a write/read round trip
is lossless (bit-exact for binary, value-exact for records).

    .rdhm       magic "RDHM" | u32 D | u32 R | u32 reserved | D*R f32 LE,
                row-major with Doppler rows
    points      JSONL, one frame per line:
                {"radar_id", "t", "points": [[x, y, z, doppler, power], ...]}
    truth       JSONL: {"t", "workers": [{"id", "x", "y", "activity"}, ...]}
    pm          CSV lines: sensor_id,iso8601,x,y,pm1,pm2_5,pm10
    assoc       CSV lines: t,radar_id,local_id,global_id,rho ('' if no match)
    exposure    CSV lines: window_t0,global_id,pm1,pm2_5,pm10,complete
"""

from __future__ import annotations

import json
import struct
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .exposure import ExposureRecord, PMSensorReading
from .signatures import RDSignature
from .sim import PointCloudFrame, RDHeatmap

RDHM_MAGIC = b"RDHM"


class DataFormatError(ValueError):
    """Raised when an input file does not satisfy its documented schema."""


# --- binary heatmaps ----------------------------------------------------------


def write_rdhm(path: str | Path, data: np.ndarray) -> None:
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 2:
        raise DataFormatError("heatmap must be 2-D (doppler, range)")
    d, r = arr.shape
    with open(path, "wb") as fh:
        fh.write(RDHM_MAGIC + struct.pack("<III", d, r, 0))
        fh.write(arr.tobytes())


def read_rdhm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != RDHM_MAGIC:
            raise DataFormatError(f"{path}: not an RDHM file")
        d, r, _reserved = struct.unpack("<III", header[4:])
        payload = fh.read(d * r * 4)
    if len(payload) != d * r * 4:
        raise DataFormatError(f"{path}: truncated RDHM payload")
    return np.frombuffer(payload, dtype="<f4").reshape(d, r).copy()


def write_signature_dump(path: str | Path, sig: RDSignature) -> None:
    """Signature patches reuse the RDHM layout with D x 21 dimensions plus a
    JSON sidecar carrying the metadata."""
    write_rdhm(path, sig.patch.T)
    meta = {
        "local_id": sig.local_id,
        "radar_id": sig.radar_id,
        "t": sig.timestamp_s,
        "center_range_bin": sig.center_range_bin,
        "normalization": sig.normalization.value,
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def read_signature_dump(path: str | Path) -> RDSignature:
    from .signatures import Normalization

    data = read_rdhm(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    return RDSignature(
        local_id=meta["local_id"],
        radar_id=meta["radar_id"],
        timestamp_s=meta["t"],
        patch=data.T,
        center_range_bin=meta["center_range_bin"],
        normalization=Normalization(meta["normalization"]),
    )


# --- point-cloud frames ---------------------------------------------------------


def frame_to_line(frame: PointCloudFrame) -> str:
    return json.dumps(
        {
            "radar_id": frame.radar_id,
            "t": frame.timestamp_s,
            "points": [[float(v) for v in row] for row in frame.points],
        }
    )


def frame_from_line(line: str) -> PointCloudFrame:
    try:
        obj = json.loads(line)
        pts = np.asarray(obj["points"], dtype=float).reshape(-1, 5)
        return PointCloudFrame(obj["radar_id"], obj["t"], pts)
    except (KeyError, ValueError, TypeError) as exc:
        raise DataFormatError(f"bad point-cloud frame record: {exc}") from exc


def write_frames(path: str | Path, frames: list[PointCloudFrame]) -> None:
    with open(path, "w") as fh:
        for frame in frames:
            fh.write(frame_to_line(frame) + "\n")


def read_frames(path: str | Path) -> list[PointCloudFrame]:
    with open(path) as fh:
        return [frame_from_line(line) for line in fh if line.strip()]


# --- ground truth --------------------------------------------------------------


def truth_to_line(t: float, workers: list[tuple[str, tuple[float, float], object]]) -> str:
    return json.dumps(
        {
            "t": t,
            "workers": [
                {"id": wid, "x": pos[0], "y": pos[1], "activity": str(getattr(act, "value", act))}
                for wid, pos, act in workers
            ],
        }
    )


def read_truth(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --- PM readings -----------------------------------------------------------------

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def seconds_to_iso(t: float) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).isoformat()


def iso_to_seconds(stamp: str) -> float:
    return datetime.fromisoformat(stamp).timestamp()


def pm_to_line(r: PMSensorReading) -> str:
    return ",".join(
        [
            r.sensor_id,
            seconds_to_iso(r.timestamp_s),
            repr(float(r.position[0])),
            repr(float(r.position[1])),
            repr(float(r.pm1)),
            repr(float(r.pm2_5)),
            repr(float(r.pm10)),
        ]
    )


def pm_from_line(line: str) -> PMSensorReading:
    parts = line.strip().split(",")
    if len(parts) != 7:
        raise DataFormatError(f"PM record needs 7 fields, got {len(parts)}: {line!r}")
    sid, stamp, x, y, pm1, pm25, pm10 = parts
    try:
        return PMSensorReading(
            sensor_id=sid,
            position=(float(x), float(y)),
            timestamp_s=iso_to_seconds(stamp),
            pm1=float(pm1),
            pm2_5=float(pm25),
            pm10=float(pm10),
        )
    except ValueError as exc:
        raise DataFormatError(f"bad PM record {line!r}: {exc}") from exc


def write_pm(path: str | Path, readings: list[PMSensorReading]) -> None:
    with open(path, "w") as fh:
        for r in readings:
            fh.write(pm_to_line(r) + "\n")


def read_pm(path: str | Path) -> list[PMSensorReading]:
    with open(path) as fh:
        return [pm_from_line(line) for line in fh if line.strip()]


# --- association and exposure streams ------------------------------------------


def assoc_to_line(t: float, radar_id: str, local_id: int, global_id: str, rho) -> str:
    rho_s = "" if rho is None else repr(float(rho))
    return f"{t!r},{radar_id},{local_id},{global_id},{rho_s}"


def assoc_from_line(line: str) -> tuple[float, str, int, str, float | None]:
    parts = line.rstrip("\n").split(",")
    if len(parts) != 5:
        raise DataFormatError(f"association record needs 5 fields: {line!r}")
    t, radar_id, local_id, global_id, rho = parts
    return (
        float(t),
        radar_id,
        int(local_id),
        global_id,
        float(rho) if rho else None,
    )


def exposure_to_line(rec: ExposureRecord) -> str:
    vals = ",".join(repr(float(v)) for v in rec.values)
    return f"{rec.t0!r},{rec.global_id},{vals},{int(rec.complete)}"


def exposure_from_line(line: str) -> ExposureRecord:
    parts = line.rstrip("\n").split(",")
    if len(parts) != 6:
        raise DataFormatError(f"exposure record needs 6 fields: {line!r}")
    t0, gid, pm1, pm25, pm10, complete = parts
    return ExposureRecord(
        global_id=gid,
        t0=float(t0),
        duration_s=0.0,
        values=np.array([float(pm1), float(pm25), float(pm10)]),
        samples_used=0,
        complete=bool(int(complete)),
    )


def write_zone_csv(path: str | Path, zone_values: np.ndarray, pm_class_index: int = 1) -> None:
    """Zone grid of one PM class as CSV rows (y rows from the grid origin up)."""
    vals = np.asarray(zone_values)[:, :, pm_class_index]
    with open(path, "w") as fh:
        for row in vals:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
