"""Paired-view dataset built from simulator output directories.

Each scene directory is a dataset written by the radar pipeline's `simulate`
command: a manifest with radar poses, per-radar RDHM heatmap files and a
ground-truth stream. Every frame yields one (source view, target view) patch
pair per worker, time-aligned by construction since both radars observed the
same motion instant.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PATCH_ROWS = 21
PATCH_HALF = 10


class DatasetError(ValueError):
    pass


def read_rdhm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != b"RDHM":
        raise DatasetError(f"{path}: not an RDHM file")
    d, r, _ = struct.unpack("<III", raw[4:16])
    payload = np.frombuffer(raw[16:], dtype="<f4")
    if payload.size != d * r:
        raise DatasetError(f"{path}: truncated RDHM payload")
    return payload.reshape(d, r)


@dataclass
class PairSample:
    source: np.ndarray  # (21, D) range rows
    target: np.ndarray
    az_src: float
    az_tgt: float
    activity: str


@dataclass
class PairedViewDataset:
    samples: list[PairSample]
    train_idx: np.ndarray
    test_idx: np.ndarray
    doppler_bins: int
    skipped: int = 0

    def split(self, which: str) -> list[PairSample]:
        idx = self.train_idx if which == "train" else self.test_idx
        return [self.samples[i] for i in idx]

    @property
    def angle_grid(self) -> tuple[float, ...]:
        grid = sorted({round(s.az_tgt - s.az_src, 6) for s in self.samples})
        return tuple(grid)


def _extract_patch(hm: np.ndarray, r0: int) -> np.ndarray:
    d_bins, r_bins = hm.shape
    patch = np.zeros((PATCH_ROWS, d_bins), dtype=np.float32)
    lo, hi = r0 - PATCH_HALF, r0 + PATCH_HALF + 1
    src_lo, src_hi = max(lo, 0), min(hi, r_bins)
    patch[src_lo - lo : src_hi - lo, :] = hm[:, src_lo:src_hi].T
    return patch


def _scene_pairs(scene_dir: Path, src_id: str, tgt_id: str) -> tuple[list[PairSample], int]:
    manifest = json.loads((scene_dir / "manifest.json").read_text())
    poses = {r["radar_id"]: r for r in manifest["radars"]}
    if src_id not in poses or tgt_id not in poses:
        raise DatasetError(f"{scene_dir}: radars {src_id}/{tgt_id} not in manifest")
    res = 299_792_458.0 / (2.0 * manifest["chirp"]["bandwidth_hz"])
    r_bins = manifest["chirp"]["range_bins"]

    truth = [json.loads(line) for line in (scene_dir / "truth.jsonl").read_text().splitlines() if line]
    n_src = len(list((scene_dir / src_id / "heatmaps").glob("*.rdhm")))
    n_tgt = len(list((scene_dir / tgt_id / "heatmaps").glob("*.rdhm")))
    n = min(n_src, n_tgt, len(truth))
    skipped = max(n_src, n_tgt) - n

    samples = []
    for k in range(n):
        hm_s = read_rdhm(scene_dir / src_id / "heatmaps" / f"frame_{k:06d}.rdhm")
        hm_t = read_rdhm(scene_dir / tgt_id / "heatmaps" / f"frame_{k:06d}.rdhm")
        for w in truth[k]["workers"]:
            pair = []
            for rid, hm in ((src_id, hm_s), (tgt_id, hm_t)):
                pose = poses[rid]
                dx = w["x"] - pose["position"][0]
                dy = w["y"] - pose["position"][1]
                dist = math.hypot(dx, dy)
                r0 = min(max(int(dist // res), 0), r_bins - 1)
                patch = _extract_patch(hm, r0)
                los = math.atan2(dy, dx)
                pair.append((patch, los))
            (src_patch, az_src), (tgt_patch, az_tgt) = pair
            if src_patch.max() <= 0 or tgt_patch.max() <= 0:
                skipped += 1
                continue
            samples.append(PairSample(src_patch, tgt_patch, az_src, az_tgt, w["activity"]))
    return samples, skipped


def build_dataset(
    scene_dirs: list[Path],
    src_id: str = "r0",
    tgt_id: str = "r1",
    split_fraction: float = 0.8,
    seed: int = 0,
) -> PairedViewDataset:
    """Aligned pairs across every scene directory with an 80:20 split."""
    scene_dirs = [Path(p) for p in scene_dirs]
    if not scene_dirs:
        raise DatasetError("no scene directories given")
    samples: list[PairSample] = []
    skipped = 0
    for d in scene_dirs:
        if not (d / "manifest.json").exists():
            raise DatasetError(f"{d}: not a simulator dataset (no manifest.json)")
        got, sk = _scene_pairs(d, src_id, tgt_id)
        samples.extend(got)
        skipped += sk
    if not samples:
        raise DatasetError("scene directories produced no aligned pairs")
    if skipped:
        print(f"build_dataset: skipped {skipped} unpaired/empty frames")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    cut = int(round(len(samples) * split_fraction))
    return PairedViewDataset(
        samples=samples,
        train_idx=np.sort(order[:cut]),
        test_idx=np.sort(order[cut:]),
        doppler_bins=samples[0].source.shape[1],
        skipped=skipped,
    )
