import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

RING_RADIUS_M = 3.8


def scene_config(angle_deg: float, activity: str, seed: int) -> dict:
    def radar(rid: str, ring_deg: float) -> dict:
        rad = math.radians(ring_deg)
        pos = [RING_RADIUS_M * math.cos(rad), RING_RADIUS_M * math.sin(rad)]
        los = math.atan2(-pos[1], -pos[0])
        return {
            "radar_id": rid,
            "position": pos,
            "yaw_rad": los - math.pi / 2,
            "max_range_m": 4.7,
        }

    axis = math.radians(180.0 + angle_deg / 2.0 + 20.0)
    return {
        "scene": {
            "rng_seed": seed,
            "noise_floor": 2e-4,
            "chirp": {"range_bins": 128},
            "radars": [radar("r0", 0.0), radar("r1", angle_deg)],
            "workers": [
                {
                    "worker_id": "w1",
                    "position": [0.0, 0.0],
                    "activity": activity,
                    "motion_axis_rad": axis,
                }
            ],
        }
    }


def simulate(config: dict, duration_s: float, out_dir: Path) -> Path:
    cfg_path = out_dir.parent / (out_dir.name + ".json")
    cfg_path.write_text(json.dumps(config))
    subprocess.run(
        [
            sys.executable, "-m", "radexpo.cli", "simulate",
            "--config", str(cfg_path), "--duration", str(duration_s),
            "--out", str(out_dir),
        ],
        check=True,
        capture_output=True,
    )
    return out_dir


@pytest.fixture(scope="session")
def paired_scene_dirs(tmp_path_factory) -> list[Path]:
    """Three 15-degree-grid paired-view scenes (one activity each)."""
    root = tmp_path_factory.mktemp("paired")
    dirs = []
    for i, (angle, activity) in enumerate(
        [(15.0, "chipping"), (30.0, "grinding"), (45.0, "polishing")]
    ):
        ds = root / f"pair_{int(angle):03d}"
        simulate(scene_config(angle, activity, seed=100 + i), 20.0, ds)
        dirs.append(ds)
    return dirs


@pytest.fixture(scope="session")
def single_scene_dir(paired_scene_dirs) -> Path:
    return paired_scene_dirs[0]
