"""Global positioning, pollutant field construction and per-worker exposure.

Per-radar track centroids are projected into a shared frame with each
radar's rigid transform. Sparse PM sensor readings become a spatial field
either by inverse distance weighting or by a coarse smoothed zone grid, and
a worker's exposure over a window is the time average of the field along
their trajectory. Radar tracks (10 Hz) and PM readings (1 Hz) are aligned
on tumbling windows with componentwise medians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sim import RadarPose

PM_CLASSES = ("pm1", "pm2_5", "pm10")
COINCIDENCE_M = 1e-3  # sensor coincidence cutoff: avoids the 1/0 IDW weight


@dataclass(frozen=True)
class RigidTransform:
    rotation_rad: float
    translation: tuple[float, float]

    def apply(self, pts_xy) -> np.ndarray:
        p = np.atleast_2d(np.asarray(pts_xy, dtype=float))
        c, s = math.cos(self.rotation_rad), math.sin(self.rotation_rad)
        rot = np.array([[c, -s], [s, c]])
        out = p @ rot.T + np.asarray(self.translation)
        return out[0] if np.asarray(pts_xy).ndim == 1 else out

    def inverse(self) -> "RigidTransform":
        c, s = math.cos(self.rotation_rad), math.sin(self.rotation_rad)
        tx, ty = self.translation
        return RigidTransform(
            rotation_rad=-self.rotation_rad,
            translation=(-(c * tx + s * ty), -(-s * tx + c * ty)),
        )


def pose_transform(pose: RadarPose) -> RigidTransform:
    return RigidTransform(rotation_rad=pose.yaw_rad, translation=pose.position)


def to_global(u_local, pose: RadarPose) -> np.ndarray:
    """Rotate a radar-local position by the pose yaw, then translate."""
    return pose_transform(pose).apply(u_local)


@dataclass(frozen=True)
class PMSensorReading:
    sensor_id: str
    position: tuple[float, float]
    timestamp_s: float
    pm1: float
    pm2_5: float
    pm10: float

    def __post_init__(self) -> None:
        if min(self.pm1, self.pm2_5, self.pm10) < 0:
            raise ValueError("PM concentrations must be non-negative")

    @property
    def values(self) -> np.ndarray:
        return np.array([self.pm1, self.pm2_5, self.pm10])


def idw_estimate(x, readings: list[PMSensorReading], p: float = 2.0) -> np.ndarray:
    """Inverse-distance-weighted PM estimate at position x.

    Weights are 1 / distance**p; a query within the coincidence cutoff of a
    sensor returns that sensor's reading exactly. Returns (pm1, pm2_5, pm10).
    """
    if not readings:
        raise ValueError("IDW needs at least one sensor reading")
    if p <= 0:
        raise ValueError("IDW exponent must be positive")
    pos = np.asarray(x, dtype=float)
    dists = np.array([float(np.hypot(*(pos - np.asarray(r.position)))) for r in readings])
    nearest = int(np.argmin(dists))
    if dists[nearest] < COINCIDENCE_M:
        return readings[nearest].values.astype(float)
    weights = 1.0 / np.power(dists, p)
    values = np.stack([r.values for r in readings])
    return (weights[:, None] * values).sum(axis=0) / weights.sum()


@dataclass(frozen=True)
class ZoneGrid:
    """Axis-aligned zone discretization of the workspace."""

    x0: float
    y0: float
    cell_size_m: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.cell_size_m <= 0 or self.nx < 1 or self.ny < 1:
            raise ValueError("zone grid must have positive cells and extents")

    def zone_of(self, x) -> tuple[int, int]:
        """Zone indices (ix, iy) of a position; outside points clamp to the
        nearest zone so exposure stays defined at the workspace fringe."""
        ix = int(math.floor((x[0] - self.x0) / self.cell_size_m))
        iy = int(math.floor((x[1] - self.y0) / self.cell_size_m))
        return (min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1))


_SMOOTH_SELF = 0.6
_SMOOTH_NEIGHBOR = 0.1


def _smooth_zones(values: np.ndarray) -> np.ndarray:
    """One neighbor-averaging pass: self 0.6, each 4-neighbor 0.1, with the
    weight of missing border neighbors folded back into the cell itself."""
    ny, nx = values.shape[:2]
    out = np.empty_like(values)
    for iy in range(ny):
        for ix in range(nx):
            acc = _SMOOTH_SELF * values[iy, ix]
            for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                jy, jx = iy + dy, ix + dx
                if 0 <= jy < ny and 0 <= jx < nx:
                    acc = acc + _SMOOTH_NEIGHBOR * values[jy, jx]
                else:
                    acc = acc + _SMOOTH_NEIGHBOR * values[iy, ix]
            out[iy, ix] = acc
    return out


class PMField:
    """Evaluable pollutant field; values are (pm1, pm2_5, pm10) arrays."""

    mode: str

    def evaluate(self, x) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class IdwField(PMField):
    mode = "idw"

    def __init__(self, readings: list[PMSensorReading], p: float = 2.0) -> None:
        if not readings:
            raise ValueError("IDW field needs at least one reading")
        self.readings = list(readings)
        self.p = p

    def evaluate(self, x) -> np.ndarray:
        return idw_estimate(x, self.readings, self.p)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        values = np.stack([r.values for r in self.readings])
        return values.min(axis=0), values.max(axis=0)


class ZoneField(PMField):
    mode = "zones"

    def __init__(self, grid: ZoneGrid, zone_values: np.ndarray) -> None:
        self.grid = grid
        self.zone_values = np.asarray(zone_values, dtype=float)

    def evaluate(self, x) -> np.ndarray:
        ix, iy = self.grid.zone_of(x)
        return self.zone_values[iy, ix]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        flat = self.zone_values.reshape(-1, self.zone_values.shape[-1])
        return flat.min(axis=0), flat.max(axis=0)


def zone_field(
    readings: list[PMSensorReading], grid: ZoneGrid, smoothing: bool = True
) -> ZoneField:
    """Build the discrete pollutant field: per-zone median of the readings of
    sensors inside the zone, then one smoothing pass. Every zone must be
    covered by at least one sensor."""
    per_zone: dict[tuple[int, int], list[np.ndarray]] = {}
    for r in readings:
        per_zone.setdefault(grid.zone_of(r.position), []).append(r.values)
    uncovered = [
        (ix, iy)
        for iy in range(grid.ny)
        for ix in range(grid.nx)
        if (ix, iy) not in per_zone
    ]
    if uncovered:
        raise ValueError(f"zones without any PM sensor: {uncovered}")
    values = np.zeros((grid.ny, grid.nx, len(PM_CLASSES)))
    for (ix, iy), vals in per_zone.items():
        values[iy, ix] = np.median(np.stack(vals), axis=0)
    if smoothing:
        values = _smooth_zones(values)
    return ZoneField(grid, values)


@dataclass
class ExposureRecord:
    global_id: str
    t0: float
    duration_s: float
    values: np.ndarray  # (pm1, pm2_5, pm10) time-averaged ug/m3
    samples_used: int
    complete: bool = True


def exposure(
    trajectory: list[tuple[float, np.ndarray]],
    pm_field: PMField,
    duration_s: float,
    global_id: str = "",
    complete: bool = True,
) -> ExposureRecord:
    """Time-averaged field value along a trajectory (left Riemann sum over
    uniformly spaced samples divided by the window length)."""
    if not trajectory:
        raise ValueError("exposure needs a non-empty trajectory")
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    samples = np.stack([pm_field.evaluate(pos) for _, pos in trajectory])
    return ExposureRecord(
        global_id=global_id,
        t0=trajectory[0][0],
        duration_s=duration_s,
        values=samples.mean(axis=0),
        samples_used=len(trajectory),
        complete=complete,
    )


@dataclass
class AlignedWindow:
    t0: float
    duration_s: float
    positions: dict[str, np.ndarray] = field(default_factory=dict)
    position_counts: dict[str, int] = field(default_factory=dict)
    trajectories: dict[str, list[tuple[float, np.ndarray]]] = field(default_factory=dict)
    pm_medians: dict[str, np.ndarray] = field(default_factory=dict)
    pm_counts: dict[str, int] = field(default_factory=dict)
    pm_readings: list[PMSensorReading] = field(default_factory=list)
    complete: bool = True


def align_streams(
    radar_records: list[tuple[float, str, float, float]],
    pm_readings: list[PMSensorReading],
    window_s: float = 5.0,
) -> list[AlignedWindow]:
    """Align 10 Hz track positions and 1 Hz PM readings on tumbling windows.

    ``radar_records`` rows are (timestamp, global_id, x, y). Per window each
    global id gets a componentwise median position (plus its raw trajectory)
    and each sensor a median reading; windows missing either stream are
    flagged incomplete. Timestamps must be sorted within each stream.
    """
    times_r = [r[0] for r in radar_records]
    times_p = [r.timestamp_s for r in pm_readings]
    for series, name in ((times_r, "radar"), (times_p, "pm")):
        if any(b < a for a, b in zip(series, series[1:])):
            raise ValueError(f"{name} stream timestamps are not sorted")
    all_times = times_r + times_p
    if not all_times:
        return []
    t_start = math.floor(min(all_times) / window_s) * window_s
    t_end = max(all_times)
    n_windows = int(math.floor((t_end - t_start) / window_s)) + 1

    windows = [
        AlignedWindow(t0=t_start + k * window_s, duration_s=window_s)
        for k in range(n_windows)
    ]

    def window_of(t: float) -> int:
        return int(math.floor((t - t_start) / window_s))

    per_gid: list[dict[str, list[tuple[float, np.ndarray]]]] = [dict() for _ in windows]
    for t, gid, x, y in radar_records:
        per_gid[window_of(t)].setdefault(gid, []).append((t, np.array([x, y])))
    per_sensor: list[dict[str, list[np.ndarray]]] = [dict() for _ in windows]
    for r in pm_readings:
        k = window_of(r.timestamp_s)
        per_sensor[k].setdefault(r.sensor_id, []).append(r.values)
        windows[k].pm_readings.append(r)

    for k, win in enumerate(windows):
        for gid, samples in sorted(per_gid[k].items()):
            pts = np.stack([p for _, p in samples])
            win.positions[gid] = np.median(pts, axis=0)
            win.position_counts[gid] = len(samples)
            win.trajectories[gid] = samples
        for sid, vals in sorted(per_sensor[k].items()):
            win.pm_medians[sid] = np.median(np.stack(vals), axis=0)
            win.pm_counts[sid] = len(vals)
        win.complete = bool(win.positions) and bool(win.pm_medians)
    return windows
