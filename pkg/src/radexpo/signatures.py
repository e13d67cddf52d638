"""Per-user range-Doppler activity signatures.

A signature is the 21-range-bin patch of a heatmap centered on the range bin
where the user was localized: wide enough to capture the body and tool
returns, narrow enough to exclude reflections from the rest of the site,
which is what makes the feature environment-agnostic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .sim import ChirpConfig, RadarPose, RDHeatmap

PATCH_HALF_SPAN = 10
PATCH_ROWS = 2 * PATCH_HALF_SPAN + 1


class Normalization(str, Enum):
    RAW = "raw"
    UNIT_ENERGY = "unit-energy"


@dataclass
class RDSignature:
    """Range-Doppler patch for one user: ``patch`` is (21, D) float64 with
    range along rows and Doppler along columns."""

    local_id: int
    radar_id: str
    timestamp_s: float
    patch: np.ndarray
    center_range_bin: int
    normalization: Normalization = Normalization.RAW

    def __post_init__(self) -> None:
        self.patch = np.asarray(self.patch, dtype=float)
        if self.patch.ndim != 2 or self.patch.shape[0] != PATCH_ROWS:
            raise ValueError(f"signature patch must have {PATCH_ROWS} range rows")
        if np.any(self.patch < 0):
            raise ValueError("signature patch entries must be non-negative")


def extract_signature(
    hm: RDHeatmap, r0: int, local_id: int = -1
) -> RDSignature:
    """Cut the 21 range rows centered on bin ``r0`` out of a heatmap.

    Rows that would fall outside the range axis are zero-filled so the patch
    shape is fixed. The in-range part is an exact copy of the heatmap region.
    """
    d_bins, r_bins = hm.data.shape
    if not (0 <= r0 < r_bins):
        raise ValueError(f"center range bin {r0} outside [0, {r_bins})")
    patch = np.zeros((PATCH_ROWS, d_bins))
    lo = r0 - PATCH_HALF_SPAN
    hi = r0 + PATCH_HALF_SPAN + 1
    src_lo = max(lo, 0)
    src_hi = min(hi, r_bins)
    patch[src_lo - lo : src_hi - lo, :] = hm.data[:, src_lo:src_hi].T
    return RDSignature(
        local_id=local_id,
        radar_id=hm.radar_id,
        timestamp_s=hm.timestamp_s,
        patch=patch,
        center_range_bin=r0,
    )


def range_bin_of(centroid_local_xy, pose: RadarPose, cfg: ChirpConfig) -> int:
    """Range bin of a radar-local track centroid.

    The boresight is local +y, so a negative y centroid is behind the array
    and has no meaningful range bin. Centroids beyond the configured maximum
    range are clamped to the last bin with a warning.
    """
    x, y = float(centroid_local_xy[0]), float(centroid_local_xy[1])
    if y < 0:
        raise ValueError("centroid lies behind the radar (local y < 0)")
    dist = math.hypot(x, y)
    if dist > pose.max_range_m:
        warnings.warn(
            f"centroid at {dist:.2f} m beyond max range {pose.max_range_m:.2f} m; "
            "clamping to the last range bin",
            stacklevel=2,
        )
    bin_idx = int(math.floor(dist / cfg.range_resolution_m))
    return min(max(bin_idx, 0), cfg.range_bins - 1)


def normalize_signature(sig: RDSignature) -> RDSignature:
    """Scale a patch to unit Frobenius norm. Idempotent; raises on an
    all-zero patch since there is no user energy to normalize."""
    if sig.normalization is Normalization.UNIT_ENERGY:
        return sig
    norm = float(np.linalg.norm(sig.patch))
    if norm == 0.0:
        raise ValueError("cannot normalize an all-zero signature patch")
    return replace(
        sig, patch=sig.patch / norm, normalization=Normalization.UNIT_ENERGY
    )


def median_signature(sigs: list[RDSignature]) -> RDSignature:
    """Elementwise median over a window of signatures of one track; suppresses
    transient frames before cross-radar correlation."""
    if not sigs:
        raise ValueError("median over an empty signature window")
    stack = np.stack([s.patch for s in sigs])
    med = np.median(stack, axis=0)
    return replace(sigs[-1], patch=med, normalization=Normalization.RAW)
