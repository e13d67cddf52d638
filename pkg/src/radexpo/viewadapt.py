"""Cross-view signature adaptation and image-fidelity metrics.

The Doppler a radar observes is the worker's tool motion projected on its
line of sight, so two viewpoints see the same activity with differently
scaled Doppler axes. The analytic adapter undoes that scaling; a learned
adapter can be plugged in over the bridge protocol instead. SSIM / PSNR /
L1 quantify how close an adapted signature is to the target view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Protocol

import numpy as np
from scipy.ndimage import convolve

from .signatures import RDSignature

COS_FLOOR = 0.05  # below this the view is nearly orthogonal to the motion
PSNR_CAP_DB = 99.0


@dataclass
class AdaptedSignature:
    signature: RDSignature
    source_azimuth: float
    target_azimuth: float
    adapter_id: str
    scale_ratio: float = 1.0
    low_confidence: bool = False

    def __post_init__(self) -> None:
        two_pi = 2.0 * math.pi
        self.source_azimuth = self.source_azimuth % two_pi
        self.target_azimuth = self.target_azimuth % two_pi

    @property
    def patch(self) -> np.ndarray:
        return self.signature.patch


@dataclass
class FidelityReport:
    l1_mean: float
    ssim: float
    psnr_db: float


class ViewAdapter(Protocol):
    """Adapter contract: transform a signature between radar viewpoints."""

    adapter_id: str

    def angle_grid(self) -> tuple[float, ...] | None:
        """Supported azimuth grid in radians, or None for continuous."""
        ...

    def adapt(
        self,
        sig: RDSignature,
        az_src: float,
        az_tgt: float,
        motion_axis: float | None = None,
    ) -> AdaptedSignature:
        ...


def doppler_scale_ratio(
    motion_axis: float, az_src: float, az_tgt: float
) -> tuple[float, bool]:
    """Ratio of the Doppler projections seen by target vs source view and a
    low-confidence flag when both projections are nearly zero."""
    c_src = abs(math.cos(motion_axis - az_src))
    c_tgt = abs(math.cos(motion_axis - az_tgt))
    low = c_src < COS_FLOOR and c_tgt < COS_FLOOR
    rho = c_tgt / max(c_src, COS_FLOOR)
    return rho, low


def adapt_analytic(
    sig: RDSignature, az_src: float, az_tgt: float, motion_axis: float
) -> AdaptedSignature:
    """Rescale the Doppler axis by the projection ratio between the views.

    Columns are resampled around the zero-velocity center with linear
    interpolation and the result is renormalized to the input's energy.
    A same-view request is the exact identity.
    """
    if not (math.isfinite(az_src) and math.isfinite(az_tgt)):
        raise ValueError("azimuths must be finite")
    if az_src == az_tgt:
        return AdaptedSignature(sig, az_src, az_tgt, "analytic", scale_ratio=1.0)
    rho, low = doppler_scale_ratio(motion_axis, az_src, az_tgt)
    patch = sig.patch
    if rho == 1.0:
        return AdaptedSignature(
            sig, az_src, az_tgt, "analytic", scale_ratio=1.0, low_confidence=low
        )
    d = patch.shape[1]
    center = (d - 1) / 2.0
    cols = np.arange(d, dtype=float)
    src_pos = center + (cols - center) / rho
    out = np.empty_like(patch)
    for r in range(patch.shape[0]):
        out[r] = np.interp(src_pos, cols, patch[r], left=0.0, right=0.0)
    in_norm = float(np.linalg.norm(patch))
    out_norm = float(np.linalg.norm(out))
    if out_norm > 0.0 and in_norm > 0.0:
        out *= in_norm / out_norm
    adapted = replace(sig, patch=out)
    return AdaptedSignature(
        adapted, az_src, az_tgt, "analytic", scale_ratio=rho, low_confidence=low
    )


_DEFAULT_GRID_STEP_DEG = 15.0


class AnalyticAdapter:
    """Reference adapter built on the azimuthal projection model."""

    adapter_id = "analytic"

    def __init__(self, grid_step_deg: float = _DEFAULT_GRID_STEP_DEG) -> None:
        self._grid = tuple(
            math.radians(a)
            for a in np.arange(0.0, 360.0, grid_step_deg)
        )

    def angle_grid(self) -> tuple[float, ...]:
        return self._grid

    def adapt(
        self,
        sig: RDSignature,
        az_src: float,
        az_tgt: float,
        motion_axis: float | None = None,
    ) -> AdaptedSignature:
        if motion_axis is None:
            raise ValueError("analytic adaptation needs a motion axis estimate")
        return adapt_analytic(sig, az_src, az_tgt, motion_axis)


class IdentityAdapter:
    """No-op adapter used for the adaptation-off ablation."""

    adapter_id = "off"

    def angle_grid(self) -> None:
        return None

    def adapt(
        self,
        sig: RDSignature,
        az_src: float,
        az_tgt: float,
        motion_axis: float | None = None,
    ) -> AdaptedSignature:
        return AdaptedSignature(sig, az_src, az_tgt, self.adapter_id)


def estimate_motion_axis(points_xy: np.ndarray, dopplers: np.ndarray) -> float:
    """Doppler-energy principal axis of a user's point cluster, in [0, pi).

    Heuristic: points on the moving arm/tool carry the most Doppler energy
    and spread along the motion axis, so the |doppler|-weighted principal
    component of the point scatter approximates that axis.
    """
    pts = np.asarray(points_xy, dtype=float)
    w = np.abs(np.asarray(dopplers, dtype=float))
    if pts.shape[0] < 2 or float(w.sum()) <= 0.0:
        return 0.0
    mu = (w[:, None] * pts).sum(axis=0) / w.sum()
    centered = pts - mu
    cov = (w[:, None] * centered).T @ centered / w.sum()
    evals, evecs = np.linalg.eigh(cov)
    axis = evecs[:, int(np.argmax(evals))]
    return math.atan2(axis[1], axis[0]) % math.pi


# --- image fidelity metrics -------------------------------------------------

_SSIM_C1 = (0.01 * 255.0) ** 2
_SSIM_C2 = (0.03 * 255.0) ** 2
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5


def scale_to_255(x: np.ndarray, log_scale: bool = False) -> np.ndarray:
    """Min-max scale a matrix to [0, 255] (optionally after log1p); constant
    inputs map to zeros."""
    x = np.asarray(x, dtype=float)
    if log_scale:
        x = np.log1p(np.maximum(x, 0.0))
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) * (255.0 / (hi - lo))


def _check_shapes(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def l1_mean(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute elementwise difference (inputs on the 0..255 scale)."""
    a, b = _check_shapes(a, b)
    return float(np.mean(np.abs(a - b)))


def _gaussian_kernel() -> np.ndarray:
    half = _SSIM_WINDOW // 2
    ax = np.arange(-half, half + 1, dtype=float)
    g = np.exp(-0.5 * np.square(ax / _SSIM_SIGMA))
    k = np.outer(g, g)
    return k / k.sum()


_KERNEL = _gaussian_kernel()


def _windowed_mean(x: np.ndarray) -> np.ndarray:
    pad = _SSIM_WINDOW // 2
    full = convolve(x, _KERNEL, mode="nearest")
    return full[pad:-pad, pad:-pad]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5) and the
    standard constants for a 255 dynamic range; mean over the interior."""
    a, b = _check_shapes(a, b)
    if min(a.shape) < _SSIM_WINDOW:
        raise ValueError(f"inputs must be at least {_SSIM_WINDOW} pixels per side")
    mu_a = _windowed_mean(a)
    mu_b = _windowed_mean(b)
    mu_aa = _windowed_mean(a * a)
    mu_bb = _windowed_mean(b * b)
    mu_ab = _windowed_mean(a * b)
    var_a = mu_aa - mu_a * mu_a
    var_b = mu_bb - mu_b * mu_b
    cov = mu_ab - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + _SSIM_C1) * (2.0 * cov + _SSIM_C2)
    den = (mu_a * mu_a + mu_b * mu_b + _SSIM_C1) * (var_a + var_b + _SSIM_C2)
    return float(np.mean(num / den))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio against a 255 peak, capped at 99 dB."""
    a, b = _check_shapes(a, b)
    mse = float(np.mean(np.square(a - b)))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(255.0**2 / mse))


def fidelity_report(a: np.ndarray, b: np.ndarray, log_scale: bool = False) -> FidelityReport:
    """L1 / SSIM / PSNR between two signatures rendered on the 0..255 scale."""
    sa = scale_to_255(a, log_scale=log_scale)
    sb = scale_to_255(b, log_scale=log_scale)
    return FidelityReport(l1_mean=l1_mean(sa, sb), ssim=ssim(sa, sb), psnr_db=psnr(sa, sb))
