"""Metrics against ground truth: cluster-count accuracy, localization MAE,
re-ID F1 and their per-radar / per-worker breakdowns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exposure import to_global
from .formats import DataFormatError
from .pipeline import AssociationRecord
from .reid import reid_f1
from .sim import RadarPose, occluded_ids
from .tdscan import cluster_count_accuracy

TRUTH_MATCH_GATE_M = 0.75  # a track farther than this from every worker is unmatched


@dataclass
class EvalResult:
    cluster_count_accuracy: float | None = None
    cluster_accuracy_per_radar: dict = field(default_factory=dict)
    mae_m: float | None = None
    mae_within_3m: float | None = None
    mae_per_radar: dict = field(default_factory=dict)
    mae_per_worker: dict = field(default_factory=dict)
    reid_f1: float | None = None

    def rows(self) -> list[tuple[str, str, float]]:
        out = []
        if self.cluster_count_accuracy is not None:
            out.append(("cluster_count_accuracy", "all", self.cluster_count_accuracy))
        for rid, v in sorted(self.cluster_accuracy_per_radar.items()):
            out.append(("cluster_count_accuracy", rid, v))
        if self.mae_m is not None:
            out.append(("localization_mae_m", "all", self.mae_m))
        if self.mae_within_3m is not None:
            out.append(("localization_mae_m", "within_3m", self.mae_within_3m))
        for rid, v in sorted(self.mae_per_radar.items()):
            out.append(("localization_mae_m", rid, v))
        for wid, v in sorted(self.mae_per_worker.items()):
            out.append(("localization_mae_m", wid, v))
        if self.reid_f1 is not None:
            out.append(("reid_f1", "all", self.reid_f1))
        return out


def _truth_by_time(truth: list[dict]) -> dict[float, list[dict]]:
    return {rec["t"]: rec["workers"] for rec in truth}


def match_tracks_to_truth(
    tracks_at_t: list[tuple[int, np.ndarray]],
    workers: list[dict],
    pose: RadarPose,
) -> dict[int, tuple[str, float, float]]:
    """Greedy nearest matching of local tracks to true workers using the true
    pose. Returns local_id -> (worker_id, error_m, worker_range_m)."""
    out: dict[int, tuple[str, float, float]] = {}
    if not workers:
        return out
    wpos = np.array([[w["x"], w["y"]] for w in workers])
    wr = np.linalg.norm(wpos - np.asarray(pose.position), axis=1)
    taken: set[int] = set()
    cands = []
    for lid, local in tracks_at_t:
        gpos = np.asarray(to_global(local, pose))
        d = np.linalg.norm(wpos - gpos, axis=1)
        for wi in range(len(workers)):
            if d[wi] <= TRUTH_MATCH_GATE_M:
                cands.append((float(d[wi]), lid, wi))
    for dist, lid, wi in sorted(cands):
        if lid in out or wi in taken:
            continue
        out[lid] = (workers[wi]["id"], dist, float(wr[wi]))
        taken.add(wi)
    return out


def evaluate_run(
    assoc: list[AssociationRecord],
    track_snapshots: list[tuple[float, str, int, float, float]],
    truth: list[dict],
    true_poses: dict[str, RadarPose],
) -> EvalResult:
    """Score a pipeline run against simulator ground truth.

    A prediction timestamp with no ground-truth record is a data error and is
    reported with the offending timestamps.
    """
    truth_at = _truth_by_time(truth)
    pred_times = sorted({r.timestamp_s for r in assoc} | {s[0] for s in track_snapshots})
    missing = [t for t in pred_times if t not in truth_at]
    if missing:
        raise DataFormatError(
            f"predictions reference timestamps without ground truth: {missing[:10]}"
            + ("..." if len(missing) > 10 else "")
        )

    snap_at: dict[tuple[float, str], list[tuple[int, np.ndarray]]] = {}
    for t, rid, lid, x, y in track_snapshots:
        snap_at.setdefault((t, rid), []).append((lid, np.array([x, y])))

    acc_per_radar: dict[str, list[float]] = {}
    errors_all: list[float] = []
    errors_3m: list[float] = []
    errors_radar: dict[str, list[float]] = {}
    errors_worker: dict[str, list[float]] = {}
    labels: dict[tuple[float, str, int], str] = {}

    for (t, rid), tracks in sorted(snap_at.items()):
        pose = true_poses[rid]
        workers = truth_at[t]
        shadowed = occluded_ids({w["id"]: (w["x"], w["y"]) for w in workers}, pose)
        visible = [
            w
            for w in workers
            if w["id"] not in shadowed
            and pose.in_fov(np.array([[w["x"], w["y"]]]))[0]
        ]
        if visible:
            acc_per_radar.setdefault(rid, []).append(
                cluster_count_accuracy(len(tracks), len(visible))
            )
        matched = match_tracks_to_truth(tracks, visible, pose)
        for lid, (wid, err, wrange) in matched.items():
            labels[(t, rid, lid)] = wid
            errors_all.append(err)
            errors_radar.setdefault(rid, []).append(err)
            errors_worker.setdefault(wid, []).append(err)
            if wrange <= 3.0:
                errors_3m.append(err)

    res = EvalResult()
    if acc_per_radar:
        res.cluster_accuracy_per_radar = {
            rid: float(np.mean(v)) for rid, v in acc_per_radar.items()
        }
        res.cluster_count_accuracy = float(
            np.mean([a for v in acc_per_radar.values() for a in v])
        )
    if errors_all:
        res.mae_m = float(np.mean(errors_all))
        res.mae_per_radar = {rid: float(np.mean(v)) for rid, v in errors_radar.items()}
        res.mae_per_worker = {wid: float(np.mean(v)) for wid, v in errors_worker.items()}
    if errors_3m:
        res.mae_within_3m = float(np.mean(errors_3m))

    frames: dict[float, list[tuple[str, str, str]]] = {}
    for rec in assoc:
        wid = labels.get((rec.timestamp_s, rec.radar_id, rec.local_id))
        if wid is None:
            continue
        frames.setdefault(rec.timestamp_s, []).append((rec.radar_id, rec.global_id, wid))
    if frames:
        res.reid_f1 = reid_f1([frames[t] for t in sorted(frames)])
    return res
