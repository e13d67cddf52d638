"""Cross-radar identity association.

Signatures adapted into a common view are compared with a normalized
correlation; per radar pair a one-to-one assignment picks the best matches,
optionally tightened to mutual-best pairs. Accepted matches accumulate in an
undirected graph whose connected components are the global identities, with
a short temporal window for reactivating identities that briefly vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assignment import solve_assignment
from .signatures import RDSignature
from .viewadapt import AdaptedSignature

DEFAULT_TAU = 0.6

NodeKey = tuple[str, int]  # (radar_id, local_id)


def hungarian(cost) -> list[tuple[int, int]]:
    """Minimum-cost one-to-one assignment with a lexicographic tie-break."""
    return solve_assignment(cost)


def correlation(a, b) -> float:
    """Normalized Frobenius inner product of two equal-shape patches."""
    pa = a.patch if hasattr(a, "patch") else np.asarray(a, dtype=float)
    pb = b.patch if hasattr(b, "patch") else np.asarray(b, dtype=float)
    if pa.shape != pb.shape:
        raise ValueError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    na = float(np.linalg.norm(pa))
    nb = float(np.linalg.norm(pb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("correlation undefined for a zero-norm signature")
    return float(np.tensordot(pa, pb) / (na * nb))


@dataclass
class SimilarityMatrix:
    """Correlations between radar m's adapted users (rows) and radar n's
    observed users (columns); entries below tau are kept but suppressed."""

    radar_pair: tuple[str, str]
    rows: list[int]
    cols: list[int]
    values: np.ndarray
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float).reshape(
            len(self.rows), len(self.cols)
        )

    @property
    def suppressed(self) -> np.ndarray:
        return self.values < self.tau

    @property
    def empty(self) -> bool:
        return self.values.size == 0


def build_similarity(
    adapted_m: list[AdaptedSignature],
    observed_n: list[RDSignature],
    tau: float = DEFAULT_TAU,
    radar_pair: tuple[str, str] = ("m", "n"),
    row_ids: list[int] | None = None,
    col_ids: list[int] | None = None,
) -> SimilarityMatrix:
    rows = row_ids if row_ids is not None else [a.signature.local_id for a in adapted_m]
    cols = col_ids if col_ids is not None else [s.local_id for s in observed_n]
    values = np.zeros((len(adapted_m), len(observed_n)))
    for i, a in enumerate(adapted_m):
        for j, s in enumerate(observed_n):
            values[i, j] = correlation(a, s)
    return SimilarityMatrix(radar_pair, rows, cols, values, tau=tau)


def to_cost(sim: SimilarityMatrix) -> np.ndarray:
    """Cost = max(R) - R, with suppressed entries pushed to a penalty large
    enough that the solver never prefers them over any admissible pair."""
    if sim.empty:
        raise ValueError("cannot build a cost matrix from an empty similarity matrix")
    r = sim.values
    top = float(r.max())
    cost = top - r
    penalty = top * r.shape[0] * r.shape[1] + 1.0
    return np.where(sim.suppressed, penalty, cost)


def mutual_best_filter(
    sim: SimilarityMatrix, pairs: list[tuple[int, int]]
) -> list[tuple[int, int]]:
    """Keep (i, j) only when R[i, j] is both the maximum of row i and the
    maximum of column j (non-strict, so exact ties survive). Suppressed
    entries do not compete."""
    r = np.where(sim.suppressed, -1.0, sim.values)
    out = []
    for i, j in pairs:
        if r[i, j] >= r[i].max() and r[i, j] >= r[:, j].max():
            out.append((i, j))
    return out


def match_pair(
    sim: SimilarityMatrix, mutual_best: bool = True
) -> list[tuple[int, int, float]]:
    """Full pairwise matching for one radar pair: assignment on the cost
    matrix, penalty pairs dropped, optional mutual-best constraint.
    Returns (row_index, col_index, rho) triples."""
    if sim.empty:
        return []
    pairs = [(i, j) for i, j in solve_assignment(to_cost(sim)) if not sim.suppressed[i, j]]
    if mutual_best:
        pairs = mutual_best_filter(sim, pairs)
    return [(i, j, float(sim.values[i, j])) for i, j in pairs]


@dataclass(frozen=True)
class PersistenceParams:
    temporal_window_s: float = 3.0
    proximity_m: float = 1.0

    def __post_init__(self) -> None:
        if self.temporal_window_s <= 0 or self.proximity_m <= 0:
            raise ValueError("persistence gates must be positive")


@dataclass
class _Node:
    key: NodeKey
    first_seen: float
    last_seen: float
    origin_id: int
    position: np.ndarray | None = None


class IdentityGraph:
    """Undirected match graph; connected components are global identities.

    Every node is allotted an origin number in observation order (time, then
    node key within a batch) and a component's global id is P<smallest origin
    number among its members>. That rule makes id assignment a deterministic
    function of the graph: merges adopt the older component's id and retire
    the newer one, edge additions that do not merge change nothing, and if a
    spurious merge is later undone by edge removal, the split-off component
    falls back to its own original id rather than a recycled one.
    """

    def __init__(self) -> None:
        self.nodes: dict[NodeKey, _Node] = {}
        self.edges: dict[tuple[NodeKey, NodeKey], float] = {}
        self._next_origin = 1
        self._labels: dict[NodeKey, str] | None = None

    # -- components ------------------------------------------------------------
    def _recompute(self) -> dict[NodeKey, str]:
        parent: dict[NodeKey, NodeKey] = {k: k for k in self.nodes}

        def find(k: NodeKey) -> NodeKey:
            while parent[k] != k:
                parent[k] = parent[parent[k]]
                k = parent[k]
            return k

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        best: dict[NodeKey, int] = {}
        for key, node in self.nodes.items():
            root = find(key)
            cur = best.get(root)
            if cur is None or node.origin_id < cur:
                best[root] = node.origin_id
        labels = {key: f"P{best[find(key)]}" for key in self.nodes}
        self._labels = labels
        return labels

    def _label_map(self) -> dict[NodeKey, str]:
        if self._labels is None:
            return self._recompute()
        return self._labels

    # -- public API ------------------------------------------------------------
    def observe(self, key: NodeKey, t: float, position=None) -> None:
        """Record that a local track exists at time t (creates a singleton
        component for unseen keys)."""
        node = self.nodes.get(key)
        if node is None:
            node = _Node(key=key, first_seen=t, last_seen=t, origin_id=self._next_origin)
            self._next_origin += 1
            self.nodes[key] = node
            self._labels = None
        elif t < node.last_seen:
            raise ValueError(f"node {key} observed at {t} before its last_seen {node.last_seen}")
        node.last_seen = t
        if position is not None:
            node.position = np.asarray(position, dtype=float)

    def add_matches(self, matches: list[tuple[NodeKey, NodeKey]], t: float) -> None:
        """Insert confirmed matches as edges at time t; both endpoints are
        observed first. The batch is canonicalized by sorting."""
        for a, b in sorted(matches):
            if a == b:
                raise ValueError(f"self-match on node {a}")
            self.observe(a, t)
            self.observe(b, t)
            self.edges[(min(a, b), max(a, b))] = t
            self._labels = None

    def remove_matches(self, pairs: list[tuple[NodeKey, NodeKey]]) -> None:
        """Drop edges whose supporting evidence has decayed; components and
        ids are recomputed, undoing any merge those edges caused."""
        for a, b in pairs:
            self.edges.pop((min(a, b), max(a, b)), None)
        self._labels = None

    def global_id(self, key: NodeKey) -> str:
        return self._label_map()[key]

    def components(self) -> dict[str, list[NodeKey]]:
        out: dict[str, list[NodeKey]] = {}
        for key, gid in self._label_map().items():
            out.setdefault(gid, []).append(key)
        for members in out.values():
            members.sort()
        return out

    def dormant_candidates(
        self, t: float, position, params: PersistenceParams
    ) -> list[tuple[float, int, NodeKey]]:
        """Nodes last seen within the temporal window and proximity gate,
        ranked by (distance, component age, key)."""
        pos = np.asarray(position, dtype=float)
        labels = self._label_map()
        origin_of = {gid: int(gid[1:]) for gid in labels.values()}
        ranked = []
        for key, node in self.nodes.items():
            if node.position is None:
                continue
            # nodes observed at t itself are active, not dormant
            if not (0.0 < t - node.last_seen <= params.temporal_window_s):
                continue
            d = float(np.hypot(*(node.position - pos)))
            if d > params.proximity_m:
                continue
            ranked.append((d, origin_of[labels[key]], key))
        ranked.sort()
        return ranked


def update_graph(
    g: IdentityGraph, matches: list[tuple[NodeKey, NodeKey]], t: float
) -> IdentityGraph:
    """Add a batch of accepted matches at time t and return the graph."""
    g.add_matches(matches, t)
    return g


def reactivate(
    g: IdentityGraph,
    key: NodeKey,
    t: float,
    position,
    params: PersistenceParams | None = None,
) -> str | None:
    """Attach a fresh detection to a recently dormant identity.

    If some node was last seen within the temporal window and within the
    proximity gate of the detection, the detection's node joins that
    component (nearest candidate wins; ties go to the older component) and
    the reactivated global id is returned. Otherwise returns None.
    """
    params = params or PersistenceParams()
    candidates = g.dormant_candidates(t, position, params)
    candidates = [c for c in candidates if c[2] != key]
    if not candidates:
        return None
    target = candidates[0][2]
    g.observe(key, t, position)
    g.add_matches([(min(key, target), max(key, target))], t)
    return g.global_id(key)


def reid_f1(
    frames: list[list[tuple[str, str, str]]],
) -> float:
    """Pairwise-match F1 over frames of (radar_id, predicted_gid, true_id).

    Within each frame, every cross-radar detection pair sharing a predicted
    global id is a predicted match; it is a true positive exactly when both
    detections belong to the same ground-truth worker. Unpredicted same-truth
    cross-radar pairs count as false negatives.
    """
    tp = fp = fn = 0
    for dets in frames:
        n = len(dets)
        for i in range(n):
            for j in range(i + 1, n):
                ri, pi, gi = dets[i]
                rj, pj, gj = dets[j]
                if ri == rj:
                    continue
                pred = pi == pj
                true = gi == gj
                if pred and true:
                    tp += 1
                elif pred and not true:
                    fp += 1
                elif true and not pred:
                    fn += 1
    if tp == 0 and (fp > 0 or fn > 0):
        return 0.0
    if 2 * tp + fp + fn == 0:
        return 1.0
    return 2.0 * tp / (2.0 * tp + fp + fn)
