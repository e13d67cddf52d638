"""Synthetic multi-radar FMCW scene simulator.

Generates deterministic point clouds and range-Doppler heatmaps for a set of
quasi-static workers observed by several radars, together with exact ground
truth for evaluation. Workers perform oscillatory tool motions (chipping,
grinding, polishing); the Doppler each radar observes is the projection of
that motion onto its line of sight, which is what makes signatures
viewpoint-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

C_LIGHT = 299_792_458.0

# Stream tags for per-call RNG derivation (seed, tag, ...); motion streams are
# shared across radars so every viewpoint observes the same instantaneous
# motion, observation/noise streams are per radar.
_RNG_MOTION = 0
_RNG_OBS = 1
_RNG_NOISE = 2
_RNG_PM = 3


@dataclass(frozen=True)
class ChirpConfig:
    """FMCW chirp profile; defaults follow a 79 GHz, 4 GHz-sweep radar."""

    bandwidth_hz: float = 4.0e9
    chirp_duration_s: float = 72.0e-6
    carrier_hz: float = 79.0e9
    chirps_per_frame: int = 182
    frame_rate_hz: float = 10.0
    range_bins: int = 256
    doppler_bins: int = 182

    def __post_init__(self) -> None:
        for name in (
            "bandwidth_hz",
            "chirp_duration_s",
            "carrier_hz",
            "chirps_per_frame",
            "frame_rate_hz",
            "range_bins",
            "doppler_bins",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"ChirpConfig.{name} must be strictly positive")

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT / self.carrier_hz

    @property
    def range_resolution_m(self) -> float:
        return C_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def max_velocity_mps(self) -> float:
        """Unambiguous radial velocity: a pi phase step between chirps."""
        return self.wavelength_m / (4.0 * self.chirp_duration_s)

    @property
    def doppler_resolution_mps(self) -> float:
        return 2.0 * self.max_velocity_mps / self.doppler_bins

    @property
    def max_range_m(self) -> float:
        return self.range_bins * self.range_resolution_m


def beat_freq_to_range(f_b: float, cfg: ChirpConfig) -> float:
    """Range of a reflector whose dechirped IF tone sits at ``f_b`` hertz."""
    if f_b < 0:
        raise ValueError(f"beat frequency must be non-negative, got {f_b}")
    return (C_LIGHT / 2.0) * (cfg.chirp_duration_s / cfg.bandwidth_hz) * f_b


def phase_shift_to_velocity(delta_phi: float, cfg: ChirpConfig) -> float:
    """Radial velocity producing a chirp-to-chirp phase step ``delta_phi``."""
    return delta_phi * cfg.wavelength_m / (4.0 * math.pi * cfg.chirp_duration_s)


def range_axis(cfg: ChirpConfig) -> np.ndarray:
    """Bin-center ranges in meters, length R."""
    dr = cfg.range_resolution_m
    return (np.arange(cfg.range_bins) + 0.5) * dr


def doppler_axis(cfg: ChirpConfig) -> np.ndarray:
    """Bin-center radial velocities in m/s, length D, spanning [-vmax, +vmax]."""
    vmax = cfg.max_velocity_mps
    dv = cfg.doppler_resolution_mps
    return -vmax + (np.arange(cfg.doppler_bins) + 0.5) * dv


def range_to_bin(r_m: float, cfg: ChirpConfig) -> int:
    """Range bin index covering ``r_m``; clipped to the valid axis."""
    b = int(math.floor(r_m / cfg.range_resolution_m))
    return min(max(b, 0), cfg.range_bins - 1)


def velocity_to_bin(v_mps: float, cfg: ChirpConfig) -> int:
    b = int(math.floor((v_mps + cfg.max_velocity_mps) / cfg.doppler_resolution_mps))
    return min(max(b, 0), cfg.doppler_bins - 1)


@dataclass(frozen=True)
class RadarPose:
    """Radar extrinsics. Boresight points along local +y; ``to_global`` in the
    exposure module maps local coordinates via R(yaw) then translation."""

    radar_id: str
    position: tuple[float, float]
    yaw_rad: float = 0.0
    fov_azimuth_rad: float = math.radians(120.0)
    max_range_m: float = 9.0
    mount_height_m: float = 2.0

    def __post_init__(self) -> None:
        if not (0.0 < self.fov_azimuth_rad <= 2.0 * math.pi):
            raise ValueError("fov_azimuth_rad must lie in (0, 2*pi]")
        if self.max_range_m <= 0:
            raise ValueError("max_range_m must be positive")

    def rotation(self) -> np.ndarray:
        c, s = math.cos(self.yaw_rad), math.sin(self.yaw_rad)
        return np.array([[c, -s], [s, c]])

    def to_local(self, pts_xy: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(np.asarray(pts_xy, dtype=float)) - np.asarray(self.position)
        return p @ self.rotation()  # equals R(-yaw) @ p per point

    def in_fov(self, pts_xy: np.ndarray) -> np.ndarray:
        """Boolean mask of global points inside the azimuth cone and range."""
        local = self.to_local(pts_xy)
        rng = np.hypot(local[:, 0], local[:, 1])
        # angle off the local +y boresight
        off = np.abs(np.arctan2(local[:, 0], local[:, 1]))
        return (off <= self.fov_azimuth_rad / 2.0 + 1e-12) & (rng <= self.max_range_m)

    def los_angle(self, target_xy) -> float:
        """Global-frame angle of the line of sight from radar to target."""
        dx = target_xy[0] - self.position[0]
        dy = target_xy[1] - self.position[1]
        return math.atan2(dy, dx)


class Activity(str, Enum):
    CHIPPING = "chipping"
    GRINDING = "grinding"
    POLISHING = "polishing"


# (bulk amplitude m/s, oscillation/burst rate Hz); amplitudes keep most body
# points inside the human Doppler band used by the clustering front end.
_ACTIVITY_DEFAULTS = {
    Activity.CHIPPING: (0.50, 1.4),
    Activity.GRINDING: (0.70, 2.3),
    Activity.POLISHING: (0.24, 1.1),
}

_CHIPPING_DUTY = 0.2  # fraction of each burst cycle the impulsive arm swing is active
_ARM_FRACTION = 0.35  # share of a worker's points on the moving arm/tool
_ARM_GAIN = 1.9  # arm tip velocity relative to the activity amplitude
_TOOL_GAIN = 7.0  # tool-tip micro-Doppler extends well past the bulk band
_BODY_SWAY = 0.50  # body bulk velocity as a fraction of the activity amplitude

# a worker standing between a radar and a colleague fully shadows the return
OCCLUSION_RADIUS_M = 0.45

# relative heatmap energy of the component classes: the tool's harmonic comb
# dominates the micro-Doppler structure of an RD signature
_W_BODY = 0.12
_W_ARM = 0.15
_W_TOOL = 1.3

# tool vibration comb per activity: line positions scale with the activity
# amplitude and the view projection, weights fall off with order. Grinding is
# a broadband comb, chipping a dense low-order set that extends during
# strikes, polishing a narrow two-line pair.
_TOOL_COMBS = {
    Activity.GRINDING: (
        np.array([0.30, 0.46, 0.63, 0.82, 1.00, 1.22]),
        np.array([1.0, 0.85, 0.7, 0.58, 0.48, 0.4]),
    ),
    Activity.CHIPPING: (
        np.array([0.22, 0.34, 0.47, 0.60, 0.74]),
        np.array([1.0, 0.9, 0.75, 0.6, 0.5]),
    ),
    Activity.POLISHING: (
        np.array([0.55, 1.0]),
        np.array([1.0, 0.75]),
    ),
}


@dataclass(frozen=True)
class WorkerSpec:
    worker_id: str
    position: tuple[float, float]
    activity: Activity
    motion_axis_rad: float = 0.0
    amplitude_mps: float | None = None
    frequency_hz: float | None = None
    spread_radius_m: float = 0.40
    points_per_frame: int = 24
    reflectivity: float = 1.0

    @property
    def amplitude(self) -> float:
        if self.amplitude_mps is not None:
            return self.amplitude_mps
        return _ACTIVITY_DEFAULTS[self.activity][0]

    @property
    def frequency(self) -> float:
        if self.frequency_hz is not None:
            return self.frequency_hz
        return _ACTIVITY_DEFAULTS[self.activity][1]


@dataclass(frozen=True)
class ClutterSpec:
    position: tuple[float, float]
    reflectivity: float = 1.0
    points_per_frame: int = 6


@dataclass(frozen=True)
class PMSensorSpec:
    sensor_id: str
    position: tuple[float, float]


@dataclass(frozen=True)
class Scene:
    workers: tuple[WorkerSpec, ...]
    radars: tuple[RadarPose, ...]
    clutter: tuple[ClutterSpec, ...] = ()
    pm_sensors: tuple[PMSensorSpec, ...] = ()
    rng_seed: int = 0
    chirp: ChirpConfig = field(default_factory=ChirpConfig)
    noise_floor: float = 0.0
    jitter_sigma_m: float = 0.03

    def __post_init__(self) -> None:
        ids = [w.worker_id for w in self.workers]
        if len(set(ids)) != len(ids):
            raise ValueError("worker ids must be unique")
        rids = [r.radar_id for r in self.radars]
        if len(set(rids)) != len(rids):
            raise ValueError("radar ids must be unique")
        for w in self.workers:
            pos = np.asarray([w.position])
            if self.radars and not any(r.in_fov(pos)[0] for r in self.radars):
                raise ValueError(
                    f"worker {w.worker_id} is outside every radar field of view"
                )

    def frame_index(self, t: float) -> int:
        return int(round(t * self.chirp.frame_rate_hz))


@dataclass
class PointCloudFrame:
    """One radar frame of detections.

    ``points`` has shape (N, 5) with columns (x, y, z, doppler, power); x/y/z
    are radar-local meters, doppler is the signed radial velocity in m/s
    (receding positive) and power is linear.
    """

    radar_id: str
    timestamp_s: float
    points: np.ndarray

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 5)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point cloud contains non-finite values")

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2]

    @property
    def doppler(self) -> np.ndarray:
        return self.points[:, 3]

    @property
    def power(self) -> np.ndarray:
        return self.points[:, 4]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class RDHeatmap:
    """Doppler-by-range power matrix for one frame; ``data`` is (D, R) float32."""

    radar_id: str
    timestamp_s: float
    data: np.ndarray
    range_resolution_m: float
    doppler_resolution_mps: float

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ValueError("heatmap data must be 2-D (doppler, range)")
        if np.any(self.data < 0):
            raise ValueError("heatmap entries must be non-negative")


def _rng(scene: Scene, *stream: int) -> np.random.Generator:
    return np.random.default_rng((scene.rng_seed,) + stream)


def _path_gain(r: np.ndarray | float) -> np.ndarray | float:
    # monotone power decay with range; soft knee avoids the r -> 0 singularity
    return 1.0 / (1.0 + np.square(r))


@dataclass
class _MotionState:
    """One frame of a worker's scatterers, shared by every radar.

    ``offsets``/``velocities`` cover body and arm points (arm points last);
    the tool entries describe the vibration comb at the tool tip, whose
    Doppler comb positions are what carry most of the identity information.
    """

    offsets: np.ndarray
    heights: np.ndarray
    velocities: np.ndarray
    n_arm: int
    tool_offsets: np.ndarray
    tool_velocities: np.ndarray
    tool_weights: np.ndarray


def _activity_drive(worker: WorkerSpec, t: float, rng: np.random.Generator) -> float:
    """Scalar motion drive in [-1, 1]; it evolves smoothly with t so the
    instantaneous phase both radars observe is identical and survives a few
    frames of temporal smoothing."""
    f = worker.frequency
    phase = worker.frequency * 11.7  # worker-specific, fixed over a run
    if worker.activity is Activity.GRINDING:
        # continuous abrasive contact: near-constant speed with a slow wobble
        wobble = 0.5 + 0.5 * math.sin(2.0 * math.pi * 0.21 * f * t + phase)
        return float((0.55 + 0.45 * wobble) * rng.uniform(0.97, 1.0))
    if worker.activity is Activity.POLISHING:
        return float(math.sin(2.0 * math.pi * f * t + phase))
    cycle = (t * f) % 1.0
    # hammer recoil keeps a moderate continuous comb; strikes extend it
    base = 0.40 + 0.35 * math.sin(2.0 * math.pi * 0.9 * f * t + phase)
    if cycle < _CHIPPING_DUTY:
        return float(base + rng.uniform(0.75, 0.95))
    return float(base)


def _worker_motion(worker: WorkerSpec, t: float, rng: np.random.Generator) -> _MotionState:
    """Sample one frame of scatterers; depends only on (worker, frame)."""
    n = worker.points_per_frame
    n_arm = max(1, int(round(n * _ARM_FRACTION)))
    n_body = n - n_arm
    a = worker.amplitude
    f = worker.frequency
    axis = np.array([math.cos(worker.motion_axis_rad), math.sin(worker.motion_axis_rad)])
    drive = _activity_drive(worker, t, rng)

    # body points: compact disk, slow sway along the motion axis
    theta = rng.uniform(0.0, 2.0 * math.pi, n_body)
    rad = worker.spread_radius_m * 0.55 * np.sqrt(rng.uniform(0.0, 1.0, n_body))
    body_off = np.column_stack([rad * np.cos(theta), rad * np.sin(theta)])
    phase = rng.uniform(-0.9, 0.9, n_body)
    body_v = _BODY_SWAY * a * np.sin(2.0 * math.pi * f * t + phase)
    body_v *= rng.uniform(0.75, 1.0, n_body)

    # arm points along the motion axis; lever arm: speed grows with offset
    arm_len = worker.spread_radius_m * 0.85
    s = rng.uniform(-1.0, 1.0, n_arm) * arm_len
    lateral = rng.normal(0.0, 0.06, n_arm)
    perp = np.array([-axis[1], axis[0]])
    arm_off = np.outer(s, axis) + np.outer(lateral, perp)
    arm_v = (s / arm_len) * a * _ARM_GAIN * drive * rng.uniform(0.8, 1.0, n_arm)

    # tool contact point: compact scatterer at the work piece under the body
    # center, emitting a harmonic velocity comb. The sidebands are symmetric
    # around zero (vibration micro-Doppler), so the observed comb is
    # invariant to the sign of the view projection and only its spacing
    # scales across viewpoints.
    harmonics, line_weights = _TOOL_COMBS[worker.activity]
    k = len(harmonics)
    # per-worker detune: different tools resonate differently, so two workers
    # of the same activity never share the full line pattern even when their
    # overall Doppler scales momentarily coincide
    detune = 0.22 * (math.modf(worker.frequency * 7.31)[0] - 0.5)
    harmonics = harmonics * (1.0 + detune * np.arange(1, k + 1))
    tip = rng.normal(0.0, 0.008, (2 * k, 2))
    line_v = harmonics * a * _TOOL_GAIN * abs(drive)
    tool_v = np.concatenate([line_v, -line_v])
    tool_w = np.tile(line_weights, 2) * rng.uniform(0.9, 1.0, 2 * k)

    return _MotionState(
        offsets=np.vstack([body_off, arm_off]),
        heights=rng.uniform(0.4, 1.8, n),
        velocities=np.concatenate([body_v, arm_v]),
        n_arm=n_arm,
        tool_offsets=tip,
        tool_velocities=tool_v,
        tool_weights=tool_w,
    )


def occluded_ids(
    positions: dict[str, tuple[float, float]], pose: RadarPose
) -> set[str]:
    """Worker ids whose line of sight from ``pose`` passes within the
    occlusion radius of another worker standing closer to the radar."""
    out: set[str] = set()
    rp = np.asarray(pose.position)
    for wid, wpos in positions.items():
        target = np.asarray(wpos) - rp
        dist = float(np.hypot(*target))
        if dist <= 0:
            continue
        direction = target / dist
        for oid, opos in positions.items():
            if oid == wid:
                continue
            rel = np.asarray(opos) - rp
            proj = float(rel @ direction)
            if not (0.25 < proj < dist - 0.25):
                continue
            lateral = float(np.hypot(*(rel - proj * direction)))
            if lateral <= OCCLUSION_RADIUS_M:
                out.add(wid)
                break
    return out


def occluded_workers(scene: Scene, radar_index: int) -> set[str]:
    positions = {w.worker_id: w.position for w in scene.workers}
    return occluded_ids(positions, scene.radars[radar_index])


def simulate_frame(
    scene: Scene, radar_index: int, t: float
) -> tuple[PointCloudFrame, RDHeatmap]:
    """Simulate one frame for one radar; deterministic in (scene, radar_index, t)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if not (0 <= radar_index < len(scene.radars)):
        raise ValueError(f"radar_index {radar_index} out of range")
    pose = scene.radars[radar_index]
    cfg = scene.chirp
    fidx = scene.frame_index(t)
    radar_pos = np.asarray(pose.position)

    rows: list[np.ndarray] = []
    heatmap = np.zeros((cfg.doppler_bins, cfg.range_bins), dtype=float)
    if scene.noise_floor > 0:
        noise_rng = _rng(scene, _RNG_NOISE, radar_index, fidx)
        heatmap += noise_rng.uniform(0.0, scene.noise_floor, heatmap.shape)

    shadowed = occluded_workers(scene, radar_index)
    for widx, worker in enumerate(scene.workers):
        motion_rng = _rng(scene, _RNG_MOTION, widx, fidx)
        motion = _worker_motion(worker, t, motion_rng)
        offsets, heights, scalar_v = motion.offsets, motion.heights, motion.velocities
        obs_rng = _rng(scene, _RNG_OBS, radar_index, widx, fidx)

        axis = np.array(
            [math.cos(worker.motion_axis_rad), math.sin(worker.motion_axis_rad)]
        )
        occluded = worker.worker_id in shadowed

        # heatmap contribution comes from the physical scatterers themselves:
        # body and arm points at their own range/Doppler positions plus the
        # tool comb at the tip
        if not occluded and pose.in_fov(np.asarray([worker.position]))[0]:
            n_arm = motion.n_arm
            all_off = np.vstack([offsets, motion.tool_offsets])
            all_v = np.concatenate([scalar_v, motion.tool_velocities])
            true_pts = np.asarray(worker.position) + all_off
            true_los = true_pts - radar_pos
            true_norm = np.linalg.norm(true_los, axis=1)
            true_doppler = all_v * (
                (true_los / np.maximum(true_norm, 1e-9)[:, None]) @ axis
            )
            n_body = len(offsets) - n_arm
            class_w = np.concatenate(
                [
                    np.full(n_body, _W_BODY),
                    np.full(n_arm, _W_ARM),
                    _W_TOOL * motion.tool_weights,
                ]
            )
            gain = worker.reflectivity * _path_gain(true_norm)
            _add_scatterers(heatmap, cfg, true_norm, true_doppler, class_w * gain)

        # the point cloud adds detection-stage position jitter on top
        jitter = obs_rng.normal(0.0, scene.jitter_sigma_m, offsets.shape)
        total_off = offsets + jitter
        norms = np.hypot(total_off[:, 0], total_off[:, 1])
        over = norms > worker.spread_radius_m
        if np.any(over):
            total_off[over] *= (worker.spread_radius_m / norms[over])[:, None]
        global_pts = np.asarray(worker.position) + total_off

        los = global_pts - radar_pos
        los_norm = np.linalg.norm(los, axis=1)
        los_unit = los / np.maximum(los_norm, 1e-9)[:, None]
        doppler = scalar_v * (los_unit @ axis)
        power = (
            worker.reflectivity
            * _path_gain(los_norm)
            * obs_rng.uniform(0.6, 1.0, len(global_pts))
        )

        visible = pose.in_fov(global_pts)
        if occluded:
            visible = np.zeros_like(visible)
        if np.any(visible):
            local = pose.to_local(global_pts[visible])
            rows.append(
                np.column_stack(
                    [
                        local,
                        heights[visible],
                        doppler[visible],
                        power[visible],
                    ]
                )
            )

    for cidx, clut in enumerate(scene.clutter):
        obs_rng = _rng(scene, _RNG_OBS, radar_index, 10_000 + cidx, fidx)
        pts = np.asarray(clut.position) + obs_rng.normal(0.0, 0.15, (clut.points_per_frame, 2))
        visible = pose.in_fov(pts)
        r = np.linalg.norm(pts - radar_pos, axis=1)
        doppler = obs_rng.normal(0.0, 0.01, len(pts))
        power = clut.reflectivity * _path_gain(r) * obs_rng.uniform(0.6, 1.0, len(pts))
        if np.any(visible):
            local = pose.to_local(pts[visible])
            z = obs_rng.uniform(0.0, 1.0, int(visible.sum()))
            rows.append(
                np.column_stack([local, z, doppler[visible], power[visible]])
            )
        if pose.in_fov(np.asarray([clut.position]))[0]:
            center_r = float(np.linalg.norm(np.asarray(clut.position) - radar_pos))
            _add_scatterers(
                heatmap,
                cfg,
                np.full(4, center_r),
                np.zeros(4),
                np.full(4, 0.25 * clut.reflectivity * _path_gain(center_r)),
            )

    points = np.vstack(rows) if rows else np.zeros((0, 5))
    frame = PointCloudFrame(pose.radar_id, t, points)
    hm = RDHeatmap(
        pose.radar_id,
        t,
        heatmap.astype(np.float32),
        cfg.range_resolution_m,
        cfg.doppler_resolution_mps,
    )
    return frame, hm


_BLOB_TRUNC_BINS = 4  # hard truncation keeps distant bins exactly zero


def _add_scatterers(
    heatmap: np.ndarray,
    cfg: ChirpConfig,
    ranges_m: np.ndarray,
    dopplers_mps: np.ndarray,
    weights: np.ndarray,
) -> None:
    """Accumulate point scatterers as small 2D Gaussian bumps (sigma of one
    bin on each axis, truncated at 4 bins) at their range/Doppler positions."""
    d_bins, r_bins = heatmap.shape
    dr = cfg.range_resolution_m
    dv = cfg.doppler_resolution_mps
    vmax = cfg.max_velocity_mps
    w = _BLOB_TRUNC_BINS

    # fractional bin-center coordinates of each scatterer
    r_pos = np.asarray(ranges_m) / dr - 0.5
    v_pos = (np.asarray(dopplers_mps) + vmax) / dv - 0.5
    keep = (
        (r_pos > -w)
        & (r_pos < r_bins - 1 + w)
        & (v_pos > -w)
        & (v_pos < d_bins - 1 + w)
        & (np.asarray(weights) > 0)
    )
    if not np.any(keep):
        return
    r_pos, v_pos = r_pos[keep], v_pos[keep]
    wts = np.asarray(weights)[keep]
    k = len(wts)

    offs = np.arange(-w, w + 1)
    r_idx = np.rint(r_pos).astype(int)[:, None] + offs[None, :]  # (k, 2w+1)
    v_idx = np.rint(v_pos).astype(int)[:, None] + offs[None, :]
    r_gauss = np.exp(-0.5 * np.square(r_idx - r_pos[:, None]))
    v_gauss = np.exp(-0.5 * np.square(v_idx - v_pos[:, None]))
    r_ok = (r_idx >= 0) & (r_idx < r_bins)
    v_ok = (v_idx >= 0) & (v_idx < d_bins)
    r_gauss = np.where(r_ok, r_gauss, 0.0)
    v_gauss = np.where(v_ok, v_gauss, 0.0)
    r_idx = np.clip(r_idx, 0, r_bins - 1)
    v_idx = np.clip(v_idx, 0, d_bins - 1)

    bumps = wts[:, None, None] * v_gauss[:, :, None] * r_gauss[:, None, :]
    flat_idx = (v_idx[:, :, None] * r_bins + r_idx[:, None, :]).reshape(-1)
    heatmap += np.bincount(
        flat_idx, weights=bumps.reshape(-1), minlength=d_bins * r_bins
    ).reshape(d_bins, r_bins)


def ground_truth(scene: Scene, t: float) -> list[tuple[str, tuple[float, float], Activity]]:
    """Exact worker states at time t; workers are quasi-static so positions are fixed."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return [(w.worker_id, w.position, w.activity) for w in scene.workers]


def detect_points(
    hm: RDHeatmap, k_db: float = 6.0, noise_floor: float | None = None
) -> np.ndarray:
    """Threshold detector over a heatmap: bins whose power exceeds the noise
    floor by ``k_db``. Returns (N, 3) rows of (range_m, doppler_mps, power);
    a single RD map carries no azimuth, so no x/y is produced."""
    data = hm.data.astype(float)
    if noise_floor is None:
        positive = data[data > 0]
        noise_floor = float(np.median(positive)) if positive.size else 0.0
    threshold = noise_floor * 10.0 ** (k_db / 10.0)
    if threshold <= 0.0:
        threshold = np.finfo(float).tiny
    d_idx, r_idx = np.nonzero(data >= threshold)
    ranges = (r_idx + 0.5) * hm.range_resolution_m
    d = hm.data.shape[0]
    vmax = d * hm.doppler_resolution_mps / 2.0
    vels = -vmax + (d_idx + 0.5) * hm.doppler_resolution_mps
    return np.column_stack([ranges, vels, data[d_idx, r_idx]])


# PM source strength at 1 m, ug/m3 on the PM2.5 channel; grinding dominates,
# then chipping, then polishing.
_PM_STRENGTH = {
    Activity.GRINDING: 520.0,
    Activity.CHIPPING: 300.0,
    Activity.POLISHING: 85.0,
}
_PM_AMBIENT = 18.0
_PM_CLASS_FACTORS = (0.40, 1.0, 1.25)  # pm1, pm2.5, pm10 relative to the pm2.5 channel


def synth_pm_samples(scene: Scene, t: float) -> list[tuple[str, tuple[float, float], float, float, float, float]]:
    """Synthetic PM sensor samples at time t (nominally a 1 Hz cadence).

    Source strength is tied to activity kind and decays with the inverse
    square of distance. Returns rows (sensor_id, position, t, pm1, pm2_5, pm10).
    """
    sec = int(round(t))
    out = []
    for sidx, sensor in enumerate(scene.pm_sensors):
        rng = _rng(scene, _RNG_PM, sidx, sec)
        base = _PM_AMBIENT
        for w in scene.workers:
            d2 = (w.position[0] - sensor.position[0]) ** 2 + (
                w.position[1] - sensor.position[1]
            ) ** 2
            base += _PM_STRENGTH[w.activity] / (1.0 + d2)
        base *= rng.uniform(0.95, 1.05)
        pm1, pm25, pm10 = (base * f for f in _PM_CLASS_FACTORS)
        out.append((sensor.sensor_id, sensor.position, float(t), pm1, pm25, pm10))
    return out


def with_pose_errors(
    scene: Scene, errors: dict[str, tuple[float, float, float]]
) -> tuple[RadarPose, ...]:
    """Poses as the pipeline believes them: true pose perturbed by a small
    calibration error (dx, dy, dyaw) per radar id. Radars without an entry
    keep their true pose."""
    out = []
    for pose in scene.radars:
        err = errors.get(pose.radar_id)
        if err is None:
            out.append(pose)
        else:
            dx, dy, dyaw = err
            out.append(
                replace(
                    pose,
                    position=(pose.position[0] + dx, pose.position[1] + dy),
                    yaw_rad=pose.yaw_rad + dyaw,
                )
            )
    return tuple(out)
