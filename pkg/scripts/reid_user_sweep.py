#!/usr/bin/env python3
"""Re-ID F1 versus worker count for the full pipeline and both baselines;
writes a CSV suitable for plotting the density-degradation comparison."""

import csv
from pathlib import Path

from radexpo.evaluate import evaluate_run
from radexpo.pipeline import run_simulated
from radexpo.scenes import lab_config

OUT = Path(__file__).resolve().parent.parent / "out_reid_sweep.csv"
DURATION_S = 15.0


def f1_for(n_workers: int, mode: str, adapter: str) -> float:
    config = lab_config(n_workers=n_workers, reid_mode=mode, adapter_mode=adapter)
    pipe, _ = run_simulated(config, DURATION_S)
    truth = [
        {
            "t": k / 10.0,
            "workers": [
                {"id": w.worker_id, "x": w.position[0], "y": w.position[1],
                 "activity": w.activity.value}
                for w in config.scene.workers
            ],
        }
        for k in range(int(DURATION_S * 10))
    ]
    result = evaluate_run(
        pipe.assoc_records, pipe.track_snapshots, truth,
        {p.radar_id: p for p in config.scene.radars},
    )
    return result.reid_f1


def main() -> None:
    variants = [
        ("full", "full", "analytic"),
        ("distance-only", "distance-only", "analytic"),
        ("correlation-only", "correlation-only", "off"),
    ]
    with open(OUT, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["workers", "method", "reid_f1"])
        for n in (2, 3, 4):
            for name, mode, adapter in variants:
                f1 = f1_for(n, mode, adapter)
                writer.writerow([n, name, f"{f1:.4f}"])
                print(f"{n} workers  {name:>16}: F1 = {f1:.3f}")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
