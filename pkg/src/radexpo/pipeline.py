"""End-to-end orchestration: clustering, signatures, view adaptation,
cross-radar association and exposure estimation, with per-stage timing.

Per frame tick, every radar's TDSCAN instance is updated, live tracks get
median window signatures, each ordered radar pair is matched via adapted
signature correlation, and accepted matches feed the identity graph. Track
positions in the global frame accumulate for the exposure stage, which runs
on tumbling windows after the streams end.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from collections import deque
from dataclasses import dataclass, field as dc_field, replace as dc_replace

import numpy as np

from . import bridge as bridge_mod
from .assignment import solve_assignment
from .config import PipelineConfig
from .exposure import (
    AlignedWindow,
    ExposureRecord,
    IdwField,
    PMSensorReading,
    align_streams,
    exposure as exposure_over,
    to_global,
    zone_field,
)
from .reid import (
    IdentityGraph,
    PersistenceParams,
    build_similarity,
    match_pair,
    reactivate,
)
from .signatures import (
    RDSignature,
    extract_signature,
    median_signature,
    normalize_signature,
    range_bin_of,
)
from .sim import PointCloudFrame, RDHeatmap, Scene, simulate_frame, synth_pm_samples, with_pose_errors
from .tdscan import TdscanTracker, Track
from .viewadapt import (
    AnalyticAdapter,
    IdentityAdapter,
    ViewAdapter,
    estimate_motion_axis,
    fidelity_report,
)

log = logging.getLogger(__name__)

DISTANCE_GATE_M = 2.5  # distance-only baseline: drop cross-radar pairs beyond this
FIDELITY_SAMPLE_EVERY = 10  # frames between fidelity probes (SSIM is the slow part)

# pairwise match evidence: an edge enters the identity graph once a pair has
# matched for a few net frames and leaves again when its support decays, so a
# transient wrong match cannot permanently merge two identities
EVIDENCE_CAP = 8.0
EVIDENCE_DECAY = 0.5
EVIDENCE_CONFIRM = 3.5
EVIDENCE_DROP = 1.5

STAGES = ("clustering", "signatures", "adaptation", "association", "exposure")


@dataclass
class AssociationRecord:
    timestamp_s: float
    radar_id: str
    local_id: int
    global_id: str
    rho: float | None


@dataclass
class RunReport:
    frames: int = 0
    stage_latency_ms: dict = dc_field(default_factory=dict)
    cluster_count_accuracy: float | None = None
    localization_mae_m: float | None = None
    reid_f1: float | None = None
    fidelity: dict = dc_field(default_factory=dict)
    exposure_mean: dict = dc_field(default_factory=dict)
    exposure_lag_s: float | None = None

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "stage_latency_ms": self.stage_latency_ms,
            "cluster_count_accuracy": self.cluster_count_accuracy,
            "localization_mae_m": self.localization_mae_m,
            "reid_f1": self.reid_f1,
            "fidelity": self.fidelity,
            "exposure_mean": self.exposure_mean,
            "exposure_lag_s": self.exposure_lag_s,
        }


@dataclass
class _TrackContext:
    track: Track
    global_pos: np.ndarray
    signature: RDSignature | None
    motion_axis: float | None


def build_adapter(config: PipelineConfig) -> ViewAdapter:
    mode = config.adapter.mode
    if mode == "off":
        return IdentityAdapter()
    if mode == "analytic":
        return AnalyticAdapter()
    try:
        return bridge_mod.BridgeAdapter(
            config.adapter.endpoint, timeout_s=config.adapter.timeout_s
        )
    except (OSError, bridge_mod.BridgeError) as exc:
        if config.adapter.fallback == "analytic":
            warnings.warn(
                f"adapter bridge {config.adapter.endpoint!r} unavailable ({exc}); "
                "falling back to the analytic adapter"
            )
            return AnalyticAdapter()
        if isinstance(exc, bridge_mod.BridgeError):
            raise
        raise bridge_mod.BridgeError(
            f"adapter bridge {config.adapter.endpoint!r} unavailable: {exc}"
        ) from exc


class Pipeline:
    """Stateful multi-radar pipeline consuming synchronized frame ticks."""

    def __init__(self, config: PipelineConfig, adapter: ViewAdapter | None = None) -> None:
        self.config = config
        self.scene = config.scene
        self.poses = {p.radar_id: p for p in with_pose_errors(self.scene, config.calibration_errors)}
        self.radar_ids = [p.radar_id for p in self.scene.radars]
        self.trackers = {
            rid: TdscanTracker(rid, config.tdscan_band, config.tdscan_params)
            for rid in self.radar_ids
        }
        self.adapter = adapter if adapter is not None else build_adapter(config)
        self.reid_mode = config.reid.mode
        self.graph = IdentityGraph()
        self.persistence = PersistenceParams(
            config.reid.temporal_window_s, config.reid.proximity_m
        )
        self._sig_windows: dict[tuple[str, int], deque] = {}
        self._axis_state: dict[tuple[str, int], tuple] = {}
        self._evidence: dict[tuple, float] = {}
        self._evidence_edges: set[tuple] = set()
        self.assoc_records: list[AssociationRecord] = []
        self.track_positions: list[tuple[float, str, float, float]] = []
        self.track_snapshots: list[tuple[float, str, int, float, float]] = []
        self.exposure_records: list[ExposureRecord] = []
        self.windows: list[AlignedWindow] = []
        self._fidelity: list = []
        self._stage_time: dict[str, float] = {s: 0.0 for s in STAGES}
        self._stage_count: dict[str, int] = {s: 0 for s in STAGES}
        self.frames_processed = 0

    # -- per-frame processing ------------------------------------------------

    def process_frame(
        self,
        frames: dict[str, PointCloudFrame],
        heatmaps: dict[str, RDHeatmap] | None,
        t: float,
    ) -> list[AssociationRecord]:
        contexts: dict[str, list[_TrackContext]] = {}

        snapshots = {}
        for rid in self.radar_ids:
            if rid in frames:
                start = time.perf_counter()
                snapshots[rid] = self.trackers[rid].update(frames[rid])
                self._tick("clustering", start)  # one tick per radar update

        start = time.perf_counter()
        for rid, snap in snapshots.items():
            pose = self.poses[rid]
            ctxs = []
            for tr in sorted(snap.tracks, key=lambda tr: tr.local_id):
                gpos = to_global(tr.position, pose)
                sig = None
                axis = None
                if self.reid_mode != "distance-only" and heatmaps and rid in heatmaps:
                    sig = self._track_signature(tr, heatmaps[rid], pose)
                    axis = self._track_axis(tr, snap, pose)
                ctxs.append(_TrackContext(tr, np.asarray(gpos), sig, axis))
                self.track_snapshots.append(
                    (t, rid, tr.local_id, float(tr.position[0]), float(tr.position[1]))
                )
            contexts[rid] = ctxs
        self._tick("signatures", start)

        matches = self._associate(contexts, t)

        records = self._update_identities(contexts, matches, t)
        self.assoc_records.extend(records)

        # global position per identity: mean over the radars that see it now
        by_gid: dict[str, list[np.ndarray]] = {}
        for rid in self.radar_ids:
            for ctx in contexts.get(rid, []):
                gid = self.graph.global_id((rid, ctx.track.local_id))
                by_gid.setdefault(gid, []).append(ctx.global_pos)
        for gid in sorted(by_gid):
            pos = np.mean(np.stack(by_gid[gid]), axis=0)
            self.track_positions.append((t, gid, float(pos[0]), float(pos[1])))

        self.frames_processed += 1
        return records

    def _track_signature(
        self, tr: Track, hm: RDHeatmap, pose
    ) -> RDSignature | None:
        try:
            r0 = range_bin_of(tr.position, pose, self.scene.chirp)
        except ValueError:
            return None
        sig = extract_signature(hm, r0, local_id=tr.local_id)
        key = (tr.radar_id, tr.local_id)
        window = self._sig_windows.setdefault(
            key, deque(maxlen=self.config.reid.signature_window)
        )
        window.append(sig.patch.astype(np.float32))
        med = np.median(np.stack(window), axis=0).astype(float)
        if float(np.linalg.norm(med)) == 0.0:
            return None
        return normalize_signature(dc_replace(sig, patch=med))

    def _track_axis(self, tr: Track, snap, pose) -> float | None:
        if tr.last_cluster_index is None or tr.last_cluster_index >= len(snap.clusters):
            return self._axis_state.get((tr.radar_id, tr.local_id), (None,))[0]
        cl = snap.clusters[tr.last_cluster_index]
        pts = snap.window_points[cl.members]
        local_axis = estimate_motion_axis(pts[:, :2], pts[:, 3])
        observed = (local_axis + pose.yaw_rad) % math.pi
        # workers hold their task orientation, so smooth the estimate over the
        # track lifetime (circular mean on the doubled angle)
        key = (tr.radar_id, tr.local_id)
        prev = self._axis_state.get(key)
        if prev is None:
            vec = np.array([math.cos(2 * observed), math.sin(2 * observed)])
        else:
            _, pvec = prev
            obs_vec = np.array([math.cos(2 * observed), math.sin(2 * observed)])
            vec = 0.85 * pvec + 0.15 * obs_vec
        smoothed = (math.atan2(vec[1], vec[0]) / 2.0) % math.pi
        self._axis_state[key] = (smoothed, vec)
        return smoothed

    def _associate(
        self, contexts: dict[str, list[_TrackContext]], t: float
    ) -> list[tuple[tuple[str, int], tuple[str, int], float]]:
        start = time.perf_counter()
        adapt_before = self._stage_time["adaptation"]
        matches: list[tuple[tuple[str, int], tuple[str, int], float]] = []
        for mi in range(len(self.radar_ids)):
            for ni in range(mi + 1, len(self.radar_ids)):
                rm, rn = self.radar_ids[mi], self.radar_ids[ni]
                ctx_m = contexts.get(rm, [])
                ctx_n = contexts.get(rn, [])
                if not ctx_m or not ctx_n:
                    continue
                if self.reid_mode == "distance-only":
                    matches.extend(self._match_by_distance(rm, rn, ctx_m, ctx_n))
                else:
                    matches.extend(self._match_by_correlation(rm, rn, ctx_m, ctx_n, t))
        # adaptation runs inside the pair loop but is budgeted as its own stage
        adapt_delta = self._stage_time["adaptation"] - adapt_before
        self._stage_time["association"] += time.perf_counter() - start - adapt_delta
        self._stage_count["association"] += 1
        return matches

    def _match_by_distance(self, rm, rn, ctx_m, ctx_n):
        cost = np.zeros((len(ctx_m), len(ctx_n)))
        for i, a in enumerate(ctx_m):
            for j, b in enumerate(ctx_n):
                cost[i, j] = float(np.hypot(*(a.global_pos - b.global_pos)))
        out = []
        for i, j in solve_assignment(cost):
            if cost[i, j] <= DISTANCE_GATE_M:
                out.append(
                    (
                        (rm, ctx_m[i].track.local_id),
                        (rn, ctx_n[j].track.local_id),
                        float(cost[i, j]),
                    )
                )
        return out

    def _match_by_correlation(self, rm, rn, ctx_m, ctx_n, t):
        pose_m, pose_n = self.poses[rm], self.poses[rn]
        rows = [c for c in ctx_m if c.signature is not None]
        cols = [c for c in ctx_n if c.signature is not None]
        if not rows or not cols:
            return []

        start = time.perf_counter()
        adapted = []
        for c in rows:
            az_src = pose_m.los_angle(c.global_pos)
            az_tgt = pose_n.los_angle(c.global_pos)
            axis = c.motion_axis if c.motion_axis is not None else 0.0
            adapted.append(self.adapter.adapt(c.signature, az_src, az_tgt, axis))
        self._tick("adaptation", start)

        sim = build_similarity(
            adapted,
            [c.signature for c in cols],
            tau=self.config.reid.tau,
            radar_pair=(rm, rn),
            row_ids=[c.track.local_id for c in rows],
            col_ids=[c.track.local_id for c in cols],
        )
        pairs = match_pair(sim, mutual_best=self.config.reid.mutual_best)

        if self._should_probe_fidelity():
            for i, j, _rho in pairs:
                rep = fidelity_report(adapted[i].patch, cols[j].signature.patch)
                self._fidelity.append(rep)

        return [
            ((rm, rows[i].track.local_id), (rn, cols[j].track.local_id), rho)
            for i, j, rho in pairs
        ]

    def _should_probe_fidelity(self) -> bool:
        return self.frames_processed % FIDELITY_SAMPLE_EVERY == 0

    def _update_identities(self, contexts, matches, t) -> list[AssociationRecord]:
        new_keys = []
        live_keys = []
        for rid in self.radar_ids:
            for ctx in contexts.get(rid, []):
                key = (rid, ctx.track.local_id)
                if key not in self.graph.nodes:
                    new_keys.append((key, ctx.global_pos))
                live_keys.append((key, ctx.global_pos))
        for key, pos in sorted(live_keys, key=lambda kp: kp[0]):
            self.graph.observe(key, t, pos)
        for key, pos in sorted(new_keys, key=lambda kp: kp[0]):
            reactivate(self.graph, key, t, pos, self.persistence)

        # evidence bookkeeping: matches vote an edge in, absence votes it out;
        # votes are weighted by match strength so barely-over-threshold pairs
        # accumulate support far slower than confident ones
        live_set = {key for key, _ in live_keys}
        matched_pairs: dict[tuple, float] = {}
        for a, b, rho in matches:
            pair = tuple(sorted((a, b)))
            vote = min(1.0, max(0.25, (rho - self.config.reid.tau) / 0.25))
            if self.reid_mode == "distance-only":
                vote = 1.0  # rho is a distance there, not a similarity
            matched_pairs[pair] = max(matched_pairs.get(pair, 0.0), vote)
        for pair, vote in matched_pairs.items():
            self._evidence[pair] = min(EVIDENCE_CAP, self._evidence.get(pair, 0.0) + vote)
        for pair in list(self._evidence):
            if pair in matched_pairs:
                continue
            if pair[0] in live_set and pair[1] in live_set:
                self._evidence[pair] -= EVIDENCE_DECAY
                if self._evidence[pair] <= 0.0:
                    del self._evidence[pair]
        confirmed = sorted(
            pair
            for pair, ev in self._evidence.items()
            if ev >= EVIDENCE_CONFIRM
        )
        if confirmed:
            self.graph.add_matches(confirmed, t)
            self._evidence_edges.update(confirmed)
        stale = sorted(
            pair
            for pair in self._evidence_edges
            if self._evidence.get(pair, 0.0) < EVIDENCE_DROP
        )
        if stale:
            self.graph.remove_matches(stale)
            self._evidence_edges.difference_update(stale)

        best_rho: dict[tuple[str, int], float] = {}
        for a, b, rho in matches:
            for key in (a, b):
                if key not in best_rho or rho > best_rho[key]:
                    best_rho[key] = rho

        records = []
        for key, _pos in sorted(live_keys, key=lambda kp: kp[0]):
            rid, lid = key
            records.append(
                AssociationRecord(
                    timestamp_s=t,
                    radar_id=rid,
                    local_id=lid,
                    global_id=self.graph.global_id(key),
                    rho=best_rho.get(key),
                )
            )
        return records

    # -- exposure ---------------------------------------------------------------

    def finish_exposure(self, pm_readings: list[PMSensorReading]) -> list[ExposureRecord]:
        if self.config.exposure.mode == "zones" and self.config.exposure.zone_grid is None:
            from .config import ConfigError

            raise ConfigError("zone exposure mode needs a zone_grid in the config")
        start = time.perf_counter()
        self.windows = align_streams(
            self.track_positions, pm_readings, self.config.exposure.window_s
        )
        records: list[ExposureRecord] = []
        for win in self.windows:
            if not win.complete:
                for gid in sorted(win.trajectories):
                    records.append(
                        ExposureRecord(
                            global_id=gid,
                            t0=win.t0,
                            duration_s=win.duration_s,
                            values=np.full(3, math.nan),
                            samples_used=0,
                            complete=False,
                        )
                    )
                continue
            if self.config.exposure.mode == "zones":
                field = zone_field(win.pm_readings, self.config.exposure.zone_grid)
            else:
                field = IdwField(win.pm_readings, self.config.exposure.idw_exponent)
            for gid in sorted(win.trajectories):
                rec = exposure_over(
                    win.trajectories[gid],
                    field,
                    win.duration_s,
                    global_id=gid,
                )
                rec.t0 = win.t0
                records.append(rec)
        self._tick("exposure", start)
        self.exposure_records = records
        return records

    # -- reporting ----------------------------------------------------------------

    def _tick(self, stage: str, start: float) -> None:
        self._stage_time[stage] += time.perf_counter() - start
        self._stage_count[stage] += 1

    def report(self) -> RunReport:
        rep = RunReport(frames=self.frames_processed)
        n = max(self.frames_processed, 1)
        rep.stage_latency_ms = {
            stage: 1000.0 * self._stage_time[stage] / n for stage in STAGES
        }
        if self._fidelity:
            rep.fidelity = {
                "l1_mean": float(np.mean([f.l1_mean for f in self._fidelity])),
                "ssim_mean": float(np.mean([f.ssim for f in self._fidelity])),
                "psnr_mean_db": float(np.mean([f.psnr_db for f in self._fidelity])),
                "samples": len(self._fidelity),
            }
        complete = [r for r in self.exposure_records if r.complete]
        if complete:
            by_gid: dict[str, list[np.ndarray]] = {}
            for r in complete:
                by_gid.setdefault(r.global_id, []).append(r.values)
            rep.exposure_mean = {
                gid: [float(v) for v in np.mean(np.stack(vals), axis=0)]
                for gid, vals in sorted(by_gid.items())
            }
        per_frame_ms = sum(rep.stage_latency_ms.values())
        rep.exposure_lag_s = self.config.exposure.window_s + per_frame_ms / 1000.0
        return rep


def run_simulated(
    config: PipelineConfig,
    duration_s: float,
    adapter: ViewAdapter | None = None,
) -> tuple[Pipeline, RunReport]:
    """Simulate the configured scene and push it through the pipeline frame
    by frame; PM samples are generated at 1 Hz alongside."""
    scene = config.scene
    rate = scene.chirp.frame_rate_hz
    n_frames = int(round(duration_s * rate))
    pipeline = Pipeline(config, adapter=adapter)
    pm: list[PMSensorReading] = []
    needs_heatmaps = config.reid.mode != "distance-only"
    pm_every = max(1, int(round(rate)))  # 1 Hz sensor cadence on the frame grid
    for k in range(n_frames):
        t = k / rate
        frames = {}
        heatmaps = {}
        for ridx, pose in enumerate(scene.radars):
            frame, hm = simulate_frame(scene, ridx, t)
            frames[pose.radar_id] = frame
            if needs_heatmaps:
                heatmaps[pose.radar_id] = hm
        if k % pm_every == 0:
            for sid, pos, ts, pm1, pm25, pm10 in synth_pm_samples(scene, t):
                pm.append(PMSensorReading(sid, pos, ts, pm1, pm25, pm10))
        pipeline.process_frame(frames, heatmaps if needs_heatmaps else None, t)
    pipeline.finish_exposure(pm)
    return pipeline, pipeline.report()
