#!/usr/bin/env python3
"""Regenerate the benchmark configs shipped in configs/ from the scene
builders, so the JSON files cannot drift from the code."""

import json
from pathlib import Path

from radexpo.config import config_to_dict
from radexpo.scenes import lab_config

OUT = Path(__file__).resolve().parent.parent / "configs"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    targets = {
        "lab_replica.json": lab_config(n_workers=3),
        "lab_replica_2users.json": lab_config(n_workers=2),
        "lab_replica_4users.json": lab_config(n_workers=4),
        "bench_4users.json": lab_config(n_workers=4, seed=77),
    }
    for name, config in targets.items():
        path = OUT / name
        path.write_text(json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
