"""Per-radar user localization: Doppler band filtering, temporal point
accumulation, density clustering and centroid track association.

Static clutter sits near zero Doppler and fast transients above the human
band, so a two-sided magnitude gate isolates worker returns before points
from a short window of frames are pooled and clustered by spatial density.
Cluster centroids are matched to existing tracks with a distance-gated
minimum-cost assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .assignment import solve_assignment
from .sim import PointCloudFrame


@dataclass(frozen=True)
class DopplerBand:
    """Two-sided gate on |doppler|: keep tau_min < |v| < tau_max (strict)."""

    tau_min: float = 0.05
    tau_max: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.tau_min < self.tau_max):
            raise ValueError("require 0 <= tau_min < tau_max")


@dataclass(frozen=True)
class ClusterParams:
    epsilon_m: float = 0.75
    min_pts: int = 100
    window_frames: int = 10
    max_assoc_dist_m: float = 1.0
    min_track_frames: int = 3
    max_missed: int = 10

    def __post_init__(self) -> None:
        if self.epsilon_m <= 0:
            raise ValueError("epsilon_m must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")
        if self.window_frames < 1:
            raise ValueError("window_frames must be >= 1")


@dataclass
class UserCluster:
    members: np.ndarray  # indices into the clustered point set
    centroid: np.ndarray  # (2,) mean of member x, y

    @property
    def point_count(self) -> int:
        return len(self.members)


@dataclass
class Track:
    local_id: int
    radar_id: str
    history: list[tuple[float, np.ndarray]] = field(default_factory=list)
    age_frames: int = 0
    missed_frames: int = 0
    last_cluster_index: int | None = None  # window cluster backing the last match

    @property
    def position(self) -> np.ndarray:
        return self.history[-1][1]

    @property
    def last_time(self) -> float:
        return self.history[-1][0]

    @property
    def matched(self) -> bool:
        return self.missed_frames == 0

    def extend(self, t: float, centroid: np.ndarray) -> None:
        if self.history and t <= self.history[-1][0]:
            raise ValueError("track history timestamps must be strictly increasing")
        self.history.append((t, np.asarray(centroid, dtype=float)))


def doppler_filter(frame: PointCloudFrame, band: DopplerBand) -> PointCloudFrame:
    """Keep points with tau_min < |doppler| < tau_max; order preserved."""
    mag = np.abs(frame.doppler)
    mask = (mag > band.tau_min) & (mag < band.tau_max)
    return PointCloudFrame(frame.radar_id, frame.timestamp_s, frame.points[mask])


def accumulate_window(frames: list[PointCloudFrame], w: int) -> np.ndarray:
    """Pool the points of the last ``w`` frames of one radar into an (N, 5) array."""
    if w < 1:
        raise ValueError("window length must be >= 1")
    if not frames:
        return np.zeros((0, 5))
    radar_ids = {f.radar_id for f in frames}
    if len(radar_ids) != 1:
        raise ValueError(f"frames from multiple radars in one window: {sorted(radar_ids)}")
    tail = frames[-w:]
    return np.vstack([f.points for f in tail])


def cluster(points: np.ndarray, params: ClusterParams) -> list[UserCluster]:
    """Density clustering of (x, y) with the core-point rule: a point is core
    when at least ``min_pts`` points (itself included) lie within ``epsilon_m``.

    Clusters are the connected components of core points under the epsilon
    relation; each non-core point within epsilon of some core joins the
    cluster of its nearest core (ties to the lower cluster index). Remaining
    points are noise. Output is ordered by smallest member index.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        return []
    xy = np.ascontiguousarray(pts[:, :2])
    n = xy.shape[0]
    eps2 = params.epsilon_m * params.epsilon_m

    if n <= _DENSE_LIMIT:
        # blocked pairwise distances keep the temporaries cache-resident
        x, y = np.ascontiguousarray(xy[:, 0]), np.ascontiguousarray(xy[:, 1])
        d2 = np.empty((n, n))
        adj = np.empty((n, n), dtype=bool)
        counts = np.empty(n, dtype=np.int64)
        bs = 128
        for i in range(0, n, bs):
            dx = x[i : i + bs, None] - x[None, :]
            dx *= dx
            dy = y[i : i + bs, None] - y[None, :]
            dy *= dy
            dx += dy
            d2[i : i + bs] = dx
            np.less_equal(dx, eps2, out=adj[i : i + bs])
            counts[i : i + bs] = adj[i : i + bs].sum(axis=1)  # diagonal = self
        core = counts >= params.min_pts
        if not core.any():
            return []
        labels = _core_components(adj, core)
        noncore_idx = np.nonzero(~core)[0]
        noncore_d2 = d2[noncore_idx][:, core]
    else:
        tree = cKDTree(xy)
        counts = tree.query_ball_point(xy, params.epsilon_m, return_length=True)
        core = counts >= params.min_pts
        if not core.any():
            return []
        cx = xy[core]
        cdx = np.subtract.outer(cx[:, 0], cx[:, 0])
        cdx *= cdx
        cdy = np.subtract.outer(cx[:, 1], cx[:, 1])
        cdy *= cdy
        cdx += cdy
        all_core = np.ones(len(cx), dtype=bool)
        labels = np.full(n, -1, dtype=int)
        labels[core] = _core_components(cdx <= eps2, all_core)
        noncore_idx = np.nonzero(~core)[0]
        ndx = xy[noncore_idx, 0][:, None] - cx[:, 0][None, :]
        ndy = xy[noncore_idx, 1][:, None] - cx[:, 1][None, :]
        noncore_d2 = ndx * ndx + ndy * ndy

    if noncore_idx.size:
        core_labels = labels[core]
        reach = noncore_d2 <= eps2
        masked = np.where(reach, noncore_d2, np.inf)
        best_d2 = masked.min(axis=1)
        has_core = np.isfinite(best_d2)
        # nearest core wins; exact distance ties go to the lower cluster label
        tie = reach & (noncore_d2 == best_d2[:, None])
        cand_labels = np.where(tie, core_labels[None, :], np.iinfo(np.int64).max)
        best_label = cand_labels.min(axis=1)
        labels[noncore_idx[has_core]] = best_label[has_core]

    out = []
    for k in range(int(labels.max()) + 1):
        members = np.nonzero(labels == k)[0]
        centroid = xy[members].mean(axis=0)
        out.append(UserCluster(members=members, centroid=centroid))
    return out


_DENSE_LIMIT = 2000


def _core_components(adj: np.ndarray, core: np.ndarray) -> np.ndarray:
    """Label connected components of the core subgraph without materializing
    the core submatrix. ``adj`` covers all points; only core rows/columns
    participate. Labels are dense, ordered by smallest core member index;
    non-core entries stay -1. The diagonal is assumed True."""
    n = adj.shape[0]
    labels = np.full(n, -1, dtype=int)
    next_label = 0
    for seed in np.nonzero(core)[0]:
        if labels[seed] >= 0:
            continue
        member = adj[seed] & core
        member[seed] = True
        while True:
            grown = adj[member].any(axis=0)
            grown &= core
            if not np.any(grown & ~member):
                break
            member |= grown
        labels[member] = next_label
        next_label += 1
    return labels


def associate_tracks(
    tracks: list[Track],
    clusters: list[UserCluster],
    t: float,
    params: ClusterParams,
    next_local_id: int = 0,
    radar_id: str = "",
) -> list[Track]:
    """One-to-one centroid assignment between live tracks and new clusters.

    Pairs farther apart than ``max_assoc_dist_m`` are rejected; matched tracks
    extend their history, unmatched clusters spawn tracks with fresh ids from
    ``next_local_id`` upward, unmatched tracks accrue a miss. Returns the
    updated track list (matched and new tracks carry ``missed_frames == 0``).
    """
    if tracks and not radar_id:
        radar_id = tracks[0].radar_id
    n_t, n_c = len(tracks), len(clusters)
    matched_t: set[int] = set()
    matched_c: set[int] = set()
    if n_t and n_c:
        cost = np.zeros((n_t, n_c))
        for i, tr in enumerate(tracks):
            for j, cl in enumerate(clusters):
                cost[i, j] = float(np.hypot(*(tr.position - cl.centroid)))
        gate = cost > params.max_assoc_dist_m
        penalty = float(cost.sum()) + params.max_assoc_dist_m * (n_t + n_c) + 1.0
        gated = np.where(gate, penalty, cost)
        for i, j in solve_assignment(gated):
            if gate[i, j]:
                continue
            tracks[i].extend(t, clusters[j].centroid)
            tracks[i].age_frames += 1
            tracks[i].missed_frames = 0
            tracks[i].last_cluster_index = j
            matched_t.add(i)
            matched_c.add(j)
    for i, tr in enumerate(tracks):
        if i not in matched_t:
            tr.age_frames += 1
            tr.missed_frames += 1
            tr.last_cluster_index = None
    out = list(tracks)
    for j, cl in enumerate(clusters):
        if j in matched_c:
            continue
        tr = Track(local_id=next_local_id, radar_id=radar_id)
        next_local_id += 1
        tr.extend(t, cl.centroid)
        tr.age_frames = 1
        tr.last_cluster_index = j
        out.append(tr)
    return out


def prune_tracks(tracks: list[Track], min_track_frames: int, max_missed: int) -> list[Track]:
    """Drop short-lived unmatched tracks and tracks missing for too long."""
    out = []
    for tr in tracks:
        if tr.age_frames < min_track_frames and not tr.matched:
            continue
        if tr.missed_frames > max_missed:
            continue
        out.append(tr)
    return out


def cluster_count_accuracy(detected: int, actual: int) -> float:
    """1 - |detected - actual| / actual, clamped to zero from below."""
    if actual < 1:
        raise ValueError("actual cluster count must be >= 1")
    return max(0.0, 1.0 - abs(detected - actual) / actual)


@dataclass
class TdscanSnapshot:
    """Output of one tracker update: live tracks plus the window's points."""

    timestamp_s: float
    tracks: list[Track]
    clusters: list[UserCluster]
    window_points: np.ndarray


class TdscanTracker:
    """Stateful per-radar pipeline stage: feed frames, get tracked users.

    Windows slide by one frame so track updates keep the radar frame cadence.
    Local ids increase monotonically and are never reused within a run.
    """

    def __init__(
        self,
        radar_id: str,
        band: DopplerBand | None = None,
        params: ClusterParams | None = None,
    ) -> None:
        self.radar_id = radar_id
        self.band = band or DopplerBand()
        self.params = params or ClusterParams()
        self.tracks: list[Track] = []
        self._frames: list[PointCloudFrame] = []
        self._next_id = 1

    def update(self, frame: PointCloudFrame) -> TdscanSnapshot:
        if frame.radar_id != self.radar_id:
            raise ValueError(
                f"frame from radar {frame.radar_id!r} fed to tracker {self.radar_id!r}"
            )
        self._frames.append(doppler_filter(frame, self.band))
        if len(self._frames) > self.params.window_frames:
            self._frames = self._frames[-self.params.window_frames :]
        window = accumulate_window(self._frames, self.params.window_frames)
        clusters = cluster(window, self.params)
        before = len(self.tracks)
        self.tracks = associate_tracks(
            self.tracks,
            clusters,
            frame.timestamp_s,
            self.params,
            next_local_id=self._next_id,
            radar_id=self.radar_id,
        )
        self._next_id += len(self.tracks) - before
        self.tracks = prune_tracks(
            self.tracks, self.params.min_track_frames, self.params.max_missed
        )
        live = [tr for tr in self.tracks if tr.matched]
        return TdscanSnapshot(frame.timestamp_s, live, clusters, window)
