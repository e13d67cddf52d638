"""Held-out evaluation: reconstruction fidelity per activity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import PairedViewDataset
from .metrics import l1_mean, psnr, ssim, to_255
from .train import Generator, adapt_patch


@dataclass
class FidelityRow:
    activity: str
    count: int
    l1_mean: float
    ssim_mean: float
    psnr_mean: float
    ssim_unadapted: float


def evaluate(gen: Generator, dataset: PairedViewDataset, split: str = "test") -> list[FidelityRow]:
    by_activity: dict[str, list[tuple[float, float, float, float]]] = {}
    for s in dataset.split(split):
        out = adapt_patch(gen, s.source, s.az_src, s.az_tgt)
        a = to_255(out)
        b = to_255(s.target)
        raw = to_255(s.source)
        by_activity.setdefault(s.activity, []).append(
            (l1_mean(a, b), ssim(a, b), psnr(a, b), ssim(raw, b))
        )
    rows = []
    for act in sorted(by_activity):
        vals = np.array(by_activity[act])
        rows.append(
            FidelityRow(
                activity=act,
                count=len(vals),
                l1_mean=float(vals[:, 0].mean()),
                ssim_mean=float(vals[:, 1].mean()),
                psnr_mean=float(vals[:, 2].mean()),
                ssim_unadapted=float(vals[:, 3].mean()),
            )
        )
    return rows


def overall(rows: list[FidelityRow]) -> FidelityRow:
    total = sum(r.count for r in rows)
    return FidelityRow(
        activity="all",
        count=total,
        l1_mean=sum(r.l1_mean * r.count for r in rows) / total,
        ssim_mean=sum(r.ssim_mean * r.count for r in rows) / total,
        psnr_mean=sum(r.psnr_mean * r.count for r in rows) / total,
        ssim_unadapted=sum(r.ssim_unadapted * r.count for r in rows) / total,
    )
