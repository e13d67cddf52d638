"""Pipeline configuration: a single JSON document describing the scene to
simulate and every processing parameter. Loading is strict; unknown keys are
rejected so typos cannot silently fall back to defaults. All defaults match
the values the processing modules document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .exposure import ZoneGrid
from .sim import (
    Activity,
    ChirpConfig,
    ClutterSpec,
    PMSensorSpec,
    RadarPose,
    Scene,
    WorkerSpec,
)
from .tdscan import ClusterParams, DopplerBand


class ConfigError(ValueError):
    pass


def _take(obj: dict, allowed: set[str], context: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")


ADAPTER_MODES = ("analytic", "bridge", "off")
REID_MODES = ("full", "distance-only", "correlation-only")
EXPOSURE_MODES = ("zones", "idw")


@dataclass(frozen=True)
class AdapterConfig:
    mode: str = "analytic"
    endpoint: str | None = None
    timeout_s: float = 0.1
    fallback: str = "analytic"  # what to do when the bridge is unavailable

    def __post_init__(self) -> None:
        if self.mode not in ADAPTER_MODES:
            raise ConfigError(f"adapter mode must be one of {ADAPTER_MODES}")
        if self.mode == "bridge" and not self.endpoint:
            raise ConfigError("bridge adapter needs an endpoint")
        if self.fallback not in ("analytic", "error"):
            raise ConfigError("adapter fallback must be 'analytic' or 'error'")


@dataclass(frozen=True)
class ReidConfig:
    mode: str = "full"
    tau: float = 0.6
    mutual_best: bool = True
    temporal_window_s: float = 3.0
    proximity_m: float = 1.0
    # frames of median smoothing before correlation; the default correlates
    # per-frame signatures, whose instantaneous motion state is what makes
    # cross-radar correlation selective
    signature_window: int = 1

    def __post_init__(self) -> None:
        if self.mode not in REID_MODES:
            raise ConfigError(f"reid mode must be one of {REID_MODES}")
        if self.signature_window < 1:
            raise ConfigError("signature_window must be >= 1")


@dataclass(frozen=True)
class ExposureConfig:
    mode: str = "zones"
    idw_exponent: float = 2.0
    window_s: float = 5.0
    zone_grid: ZoneGrid | None = None

    def __post_init__(self) -> None:
        if self.mode not in EXPOSURE_MODES:
            raise ConfigError(f"exposure mode must be one of {EXPOSURE_MODES}")
        # a missing zone_grid in zones mode is reported when the field is built


@dataclass(frozen=True)
class PipelineConfig:
    scene: Scene
    tdscan_band: DopplerBand = field(default_factory=DopplerBand)
    tdscan_params: ClusterParams = field(default_factory=ClusterParams)
    adapter: AdapterConfig = field(default_factory=AdapterConfig)
    reid: ReidConfig = field(default_factory=ReidConfig)
    exposure: ExposureConfig = field(default_factory=ExposureConfig)
    calibration_errors: dict = field(default_factory=dict)


def _chirp_from(obj: dict) -> ChirpConfig:
    _take(obj, {f for f in ChirpConfig.__dataclass_fields__}, "chirp")
    return ChirpConfig(**obj)


def _radar_from(obj: dict) -> RadarPose:
    _take(obj, {f for f in RadarPose.__dataclass_fields__}, "radar")
    obj = dict(obj)
    obj["position"] = tuple(obj["position"])
    return RadarPose(**obj)


def _worker_from(obj: dict) -> WorkerSpec:
    _take(obj, {f for f in WorkerSpec.__dataclass_fields__}, "worker")
    obj = dict(obj)
    obj["position"] = tuple(obj["position"])
    obj["activity"] = Activity(obj["activity"])
    return WorkerSpec(**obj)


def _clutter_from(obj: dict) -> ClutterSpec:
    _take(obj, {f for f in ClutterSpec.__dataclass_fields__}, "clutter")
    obj = dict(obj)
    obj["position"] = tuple(obj["position"])
    return ClutterSpec(**obj)


def _sensor_from(obj: dict) -> PMSensorSpec:
    _take(obj, {f for f in PMSensorSpec.__dataclass_fields__}, "pm_sensor")
    obj = dict(obj)
    obj["position"] = tuple(obj["position"])
    return PMSensorSpec(**obj)


def _scene_from(obj: dict) -> Scene:
    allowed = {
        "rng_seed",
        "noise_floor",
        "jitter_sigma_m",
        "chirp",
        "radars",
        "workers",
        "clutter",
        "pm_sensors",
    }
    _take(obj, allowed, "scene")
    try:
        return Scene(
            workers=tuple(_worker_from(w) for w in obj.get("workers", [])),
            radars=tuple(_radar_from(r) for r in obj.get("radars", [])),
            clutter=tuple(_clutter_from(c) for c in obj.get("clutter", [])),
            pm_sensors=tuple(_sensor_from(s) for s in obj.get("pm_sensors", [])),
            rng_seed=obj.get("rng_seed", 0),
            chirp=_chirp_from(obj["chirp"]) if "chirp" in obj else ChirpConfig(),
            noise_floor=obj.get("noise_floor", 0.0),
            jitter_sigma_m=obj.get("jitter_sigma_m", 0.03),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scene: {exc}") from exc


def config_from_dict(obj: dict) -> PipelineConfig:
    _take(
        obj,
        {"scene", "tdscan", "adapter", "reid", "exposure", "calibration_errors"},
        "config",
    )
    if "scene" not in obj:
        raise ConfigError("config needs a scene section")
    scene = _scene_from(obj["scene"])

    td = dict(obj.get("tdscan", {}))
    _take(
        td,
        {"tau_min", "tau_max"} | set(ClusterParams.__dataclass_fields__),
        "tdscan",
    )
    band = DopplerBand(td.pop("tau_min", 0.05), td.pop("tau_max", 1.0))
    params = ClusterParams(**td)

    ad = dict(obj.get("adapter", {}))
    _take(ad, set(AdapterConfig.__dataclass_fields__), "adapter")
    adapter = AdapterConfig(**ad)

    rd = dict(obj.get("reid", {}))
    _take(rd, set(ReidConfig.__dataclass_fields__), "reid")
    reid_cfg = ReidConfig(**rd)

    ex = dict(obj.get("exposure", {}))
    _take(ex, set(ExposureConfig.__dataclass_fields__), "exposure")
    if "zone_grid" in ex and ex["zone_grid"] is not None:
        zg = dict(ex["zone_grid"])
        _take(zg, set(ZoneGrid.__dataclass_fields__), "zone_grid")
        ex["zone_grid"] = ZoneGrid(**zg)
    exposure_cfg = ExposureConfig(**ex)

    calib = {
        rid: tuple(err) for rid, err in obj.get("calibration_errors", {}).items()
    }
    for rid, err in calib.items():
        if len(err) != 3:
            raise ConfigError(
                f"calibration error for {rid} must be [dx, dy, dyaw], got {err}"
            )

    try:
        return PipelineConfig(
            scene=scene,
            tdscan_band=band,
            tdscan_params=params,
            adapter=adapter,
            reid=reid_cfg,
            exposure=exposure_cfg,
            calibration_errors=calib,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: PipelineConfig) -> dict:
    """Serialize a config back to the documented JSON schema."""
    scene = config.scene
    out = {
        "scene": {
            "rng_seed": scene.rng_seed,
            "noise_floor": scene.noise_floor,
            "jitter_sigma_m": scene.jitter_sigma_m,
            "chirp": {f: getattr(scene.chirp, f) for f in ChirpConfig.__dataclass_fields__},
            "radars": [
                {
                    "radar_id": r.radar_id,
                    "position": list(r.position),
                    "yaw_rad": r.yaw_rad,
                    "fov_azimuth_rad": r.fov_azimuth_rad,
                    "max_range_m": r.max_range_m,
                    "mount_height_m": r.mount_height_m,
                }
                for r in scene.radars
            ],
            "workers": [
                {
                    "worker_id": w.worker_id,
                    "position": list(w.position),
                    "activity": w.activity.value,
                    "motion_axis_rad": w.motion_axis_rad,
                    "amplitude_mps": w.amplitude_mps,
                    "frequency_hz": w.frequency_hz,
                    "spread_radius_m": w.spread_radius_m,
                    "points_per_frame": w.points_per_frame,
                    "reflectivity": w.reflectivity,
                }
                for w in scene.workers
            ],
            "clutter": [
                {
                    "position": list(c.position),
                    "reflectivity": c.reflectivity,
                    "points_per_frame": c.points_per_frame,
                }
                for c in scene.clutter
            ],
            "pm_sensors": [
                {"sensor_id": s.sensor_id, "position": list(s.position)}
                for s in scene.pm_sensors
            ],
        },
        "tdscan": {
            "tau_min": config.tdscan_band.tau_min,
            "tau_max": config.tdscan_band.tau_max,
            **{f: getattr(config.tdscan_params, f) for f in ClusterParams.__dataclass_fields__},
        },
        "adapter": {
            "mode": config.adapter.mode,
            "endpoint": config.adapter.endpoint,
            "timeout_s": config.adapter.timeout_s,
            "fallback": config.adapter.fallback,
        },
        "reid": {
            "mode": config.reid.mode,
            "tau": config.reid.tau,
            "mutual_best": config.reid.mutual_best,
            "temporal_window_s": config.reid.temporal_window_s,
            "proximity_m": config.reid.proximity_m,
            "signature_window": config.reid.signature_window,
        },
        "exposure": {
            "mode": config.exposure.mode,
            "idw_exponent": config.exposure.idw_exponent,
            "window_s": config.exposure.window_s,
        },
        "calibration_errors": {
            rid: list(err) for rid, err in sorted(config.calibration_errors.items())
        },
    }
    if config.exposure.zone_grid is not None:
        out["exposure"]["zone_grid"] = {
            f: getattr(config.exposure.zone_grid, f)
            for f in ZoneGrid.__dataclass_fields__
        }
    return out


def load_config(path: str | Path) -> PipelineConfig:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config root must be an object")
    return config_from_dict(obj)
