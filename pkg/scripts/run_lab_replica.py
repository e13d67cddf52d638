#!/usr/bin/env python3
"""Simulate the three-radar lab-replica scene, run the pipeline on it and
print the evaluation metrics. Everything stays under ./out_lab_replica."""

import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
CONFIG = REPO / "configs" / "lab_replica.json"
OUT = REPO / "out_lab_replica"


def cli(*args: str) -> None:
    cmd = [sys.executable, "-m", "radexpo.cli", *args]
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True, cwd=REPO)


def main() -> None:
    dataset = OUT / "dataset"
    results = OUT / "results"
    cli("simulate", "--config", str(CONFIG), "--duration", "20", "--out", str(dataset))
    cli("run", "--config", str(CONFIG), "--dataset", str(dataset), "--out", str(results))
    cli(
        "eval",
        "--config", str(CONFIG),
        "--dataset", str(dataset),
        "--predictions", str(results),
        "--out", str(OUT / "metrics.csv"),
    )


if __name__ == "__main__":
    main()
