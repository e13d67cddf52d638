"""Image fidelity metrics (L1 / SSIM / PSNR) on 0..255-scaled patches.

Independent implementation kept deliberately separate from the radar
pipeline's metrics module; a conformance test cross-checks the two.
"""

from __future__ import annotations

import math

import numpy as np

_C1 = (0.01 * 255.0) ** 2
_C2 = (0.03 * 255.0) ** 2
_WIN = 11
_SIGMA = 1.5
PSNR_CAP = 99.0


def to_255(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return np.zeros_like(x)
    return (x - lo) * (255.0 / (hi - lo))


def l1_mean(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean(np.abs(np.asarray(a, float) - np.asarray(b, float))))


def _kernel() -> np.ndarray:
    half = _WIN // 2
    ax = np.arange(-half, half + 1, dtype=float)
    g = np.exp(-0.5 * (ax / _SIGMA) ** 2)
    k = np.outer(g, g)
    return k / k.sum()


_K = _kernel()


def _valid_filter(x: np.ndarray) -> np.ndarray:
    # direct valid-mode 2-D correlation via stride tricks
    h, w = x.shape
    kh, kw = _K.shape
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw))
    return np.einsum("ijkl,kl->ij", windows, _K)


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    mu_a = _valid_filter(a)
    mu_b = _valid_filter(b)
    var_a = _valid_filter(a * a) - mu_a * mu_a
    var_b = _valid_filter(b * b) - mu_b * mu_b
    cov = _valid_filter(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + _C1) * (2 * cov + _C2)
    den = (mu_a**2 + mu_b**2 + _C1) * (var_a + var_b + _C2)
    return float(np.mean(num / den))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    mse = float(np.mean((np.asarray(a, float) - np.asarray(b, float)) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * math.log10(255.0**2 / mse))
