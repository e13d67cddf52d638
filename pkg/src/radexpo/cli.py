"""Command line interface: simulate, run, eval and bench subcommands.

Exit codes are a stable contract: 0 success, 1 usage error, 2 data error,
3 bridge error. Option precedence is flag > environment > config file >
built-in default; recognized variables are RADEXPO_SEED, RADEXPO_ADAPTER
and RADEXPO_REID.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bridge import BridgeError
from .config import ConfigError, PipelineConfig, config_from_dict
from .evaluate import evaluate_run
from .formats import (
    DataFormatError,
    assoc_to_line,
    exposure_to_line,
    frame_to_line,
    read_frames,
    read_pm,
    read_rdhm,
    read_truth,
    truth_to_line,
    write_pm,
    write_rdhm,
    write_zone_csv,
)
from .exposure import PMSensorReading, zone_field
from .pipeline import AssociationRecord, Pipeline, run_simulated
from .sim import RDHeatmap, ground_truth, simulate_frame, synth_pm_samples

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BRIDGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env(name: str) -> str | None:
    value = os.environ.get(name)
    return value if value else None


def _apply_overrides(raw: dict, args: argparse.Namespace) -> dict:
    seed = args.seed if args.seed is not None else _env("RADEXPO_SEED")
    if seed is not None:
        raw.setdefault("scene", {})["rng_seed"] = int(seed)
    adapter = args.adapter or _env("RADEXPO_ADAPTER")
    if adapter:
        section = raw.setdefault("adapter", {})
        if adapter.startswith("bridge:"):
            section["mode"] = "bridge"
            section["endpoint"] = adapter.split(":", 1)[1]
        elif adapter in ("analytic", "off"):
            section["mode"] = adapter
        else:
            raise ConfigError(
                f"--adapter must be analytic, off or bridge:<addr>, got {adapter!r}"
            )
    reid = getattr(args, "reid", None) or _env("RADEXPO_REID")
    if reid:
        raw.setdefault("reid", {})["mode"] = reid
    return raw


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    raw = json.loads(Path(args.config).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"{args.config}: config root must be an object")
    return config_from_dict(_apply_overrides(raw, args))


# --- simulate -------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    scene = config.scene
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rate = scene.chirp.frame_rate_hz
    n_frames = int(round(args.duration * rate))

    manifest = {
        "radar_ids": [p.radar_id for p in scene.radars],
        "radars": [
            {
                "radar_id": p.radar_id,
                "position": list(p.position),
                "yaw_rad": p.yaw_rad,
                "fov_azimuth_rad": p.fov_azimuth_rad,
                "max_range_m": p.max_range_m,
                "mount_height_m": p.mount_height_m,
            }
            for p in scene.radars
        ],
        "frame_count": n_frames,
        "frame_rate_hz": rate,
        "duration_s": args.duration,
        "rng_seed": scene.rng_seed,
        "chirp": {
            "bandwidth_hz": scene.chirp.bandwidth_hz,
            "chirp_duration_s": scene.chirp.chirp_duration_s,
            "carrier_hz": scene.chirp.carrier_hz,
            "chirps_per_frame": scene.chirp.chirps_per_frame,
            "frame_rate_hz": scene.chirp.frame_rate_hz,
            "range_bins": scene.chirp.range_bins,
            "doppler_bins": scene.chirp.doppler_bins,
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    point_files = {}
    for pose in scene.radars:
        rdir = out / pose.radar_id
        (rdir / "heatmaps").mkdir(parents=True, exist_ok=True)
        point_files[pose.radar_id] = open(rdir / "points.jsonl", "w")

    pm: list[PMSensorReading] = []
    pm_every = max(1, int(round(rate)))
    with open(out / "truth.jsonl", "w") as truth_fh:
        for k in range(n_frames):
            t = k / rate
            truth_fh.write(truth_to_line(t, ground_truth(scene, t)) + "\n")
            for ridx, pose in enumerate(scene.radars):
                frame, hm = simulate_frame(scene, ridx, t)
                point_files[pose.radar_id].write(frame_to_line(frame) + "\n")
                write_rdhm(out / pose.radar_id / "heatmaps" / f"frame_{k:06d}.rdhm", hm.data)
            if k % pm_every == 0:
                for sid, pos, ts, pm1, pm25, pm10 in synth_pm_samples(scene, t):
                    pm.append(PMSensorReading(sid, pos, ts, pm1, pm25, pm10))
    for fh in point_files.values():
        fh.close()
    write_pm(out / "pm.csv", pm)
    print(f"wrote {n_frames} frames x {len(scene.radars)} radars to {out}")
    return EXIT_OK


# --- run ------------------------------------------------------------------------


def _run_dataset(config: PipelineConfig, dataset: Path) -> Pipeline:
    manifest = json.loads((dataset / "manifest.json").read_text())
    radar_ids = manifest["radar_ids"]
    config_ids = [p.radar_id for p in config.scene.radars]
    if sorted(radar_ids) != sorted(config_ids):
        raise DataFormatError(
            f"dataset radars {radar_ids} do not match config radars {config_ids}"
        )
    frames_by_radar = {rid: read_frames(dataset / rid / "points.jsonl") for rid in radar_ids}
    counts = {rid: len(frames) for rid, frames in frames_by_radar.items()}
    n_frames = manifest["frame_count"]
    if any(c != n_frames for c in counts.values()):
        raise DataFormatError(f"frame counts {counts} do not match manifest {n_frames}")

    pipeline = Pipeline(config)
    needs_hm = config.reid.mode != "distance-only"
    cfg = config.scene.chirp
    for k in range(n_frames):
        frames = {rid: frames_by_radar[rid][k] for rid in radar_ids}
        t = frames[radar_ids[0]].timestamp_s
        heatmaps = None
        if needs_hm:
            heatmaps = {}
            for rid in radar_ids:
                data = read_rdhm(dataset / rid / "heatmaps" / f"frame_{k:06d}.rdhm")
                heatmaps[rid] = RDHeatmap(
                    rid, t, data, cfg.range_resolution_m, cfg.doppler_resolution_mps
                )
        pipeline.process_frame(frames, heatmaps, t)
    pipeline.finish_exposure(read_pm(dataset / "pm.csv"))
    return pipeline


def _write_run_outputs(pipeline: Pipeline, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "associations.csv", "w") as fh:
        for r in pipeline.assoc_records:
            fh.write(assoc_to_line(r.timestamp_s, r.radar_id, r.local_id, r.global_id, r.rho) + "\n")
    with open(out / "tracks.csv", "w") as fh:
        for t, rid, lid, x, y in pipeline.track_snapshots:
            fh.write(f"{t!r},{rid},{lid},{x!r},{y!r}\n")
    with open(out / "exposure.csv", "w") as fh:
        for rec in pipeline.exposure_records:
            fh.write(exposure_to_line(rec) + "\n")
    report = pipeline.report()
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    grid = pipeline.config.exposure.zone_grid
    if grid is not None:
        complete = [w for w in pipeline.windows if w.complete]
        if complete:
            field = zone_field(complete[-1].pm_readings, grid)
            write_zone_csv(out / "zones.csv", field.zone_values)


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    pipeline = _run_dataset(config, Path(args.dataset))
    _write_run_outputs(pipeline, Path(args.out))
    report = pipeline.report()
    for stage, ms in report.stage_latency_ms.items():
        print(f"{stage:>12}: {ms:8.3f} ms/frame")
    print(f"frames processed: {report.frames}")
    return EXIT_OK


# --- eval -----------------------------------------------------------------------


def _read_assoc(path: Path) -> list[AssociationRecord]:
    from .formats import assoc_from_line

    records = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                t, rid, lid, gid, rho = assoc_from_line(line)
                records.append(AssociationRecord(t, rid, lid, gid, rho))
    return records


def _read_tracks(path: Path) -> list[tuple[float, str, int, float, float]]:
    rows = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            t, rid, lid, x, y = line.rstrip("\n").split(",")
            rows.append((float(t), rid, int(lid), float(x), float(y)))
    return rows


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args)
    dataset = Path(args.dataset)
    truth = read_truth(dataset / "truth.jsonl")
    true_poses = {p.radar_id: p for p in config.scene.radars}

    if getattr(args, "reid", None) and args.reid != "full":
        # baseline comparison: rerun association on the dataset in that mode
        pipeline = _run_dataset(config, dataset)
        assoc = pipeline.assoc_records
        snapshots = pipeline.track_snapshots
    else:
        pred = Path(args.predictions)
        assoc = _read_assoc(pred / "associations.csv")
        snapshots = _read_tracks(pred / "tracks.csv")

    result = evaluate_run(assoc, snapshots, truth, true_poses)
    rows = result.rows()
    for metric, scope, value in rows:
        print(f"{metric:>26} {scope:>12} {value:10.4f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("metric,scope,value\n")
            for metric, scope, value in rows:
                fh.write(f"{metric},{scope},{value!r}\n")
    return EXIT_OK


# --- bench ----------------------------------------------------------------------


def cmd_bench(args: argparse.Namespace) -> int:
    config = _load_config(args)
    rate = config.scene.chirp.frame_rate_hz
    duration = args.frames / rate
    pipeline, report = run_simulated(config, duration)
    print(f"benchmark over {report.frames} frames, {len(config.scene.workers)} workers:")
    for stage, ms in report.stage_latency_ms.items():
        print(f"{stage:>12}: {ms:8.3f} ms/frame")
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --- entry ----------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="radexpo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline config JSON")
    common.add_argument("--seed", type=int, default=None, help="override scene rng seed")
    common.add_argument(
        "--adapter", default=None, help="analytic, off, or bridge:<host:port>"
    )

    p_sim = sub.add_parser("simulate", parents=[common], help="generate a dataset")
    p_sim.add_argument("--duration", type=float, required=True, help="seconds")
    p_sim.add_argument("--out", required=True, help="dataset output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_run = sub.add_parser("run", parents=[common], help="run the pipeline on a dataset")
    p_run.add_argument("--dataset", required=True)
    p_run.add_argument("--out", required=True, help="results output directory")
    p_run.add_argument(
        "--reid", default=None, choices=["full", "distance-only", "correlation-only"]
    )
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", parents=[common], help="score predictions against truth")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--predictions", default=None, help="directory written by run")
    p_eval.add_argument(
        "--reid", default=None, choices=["full", "distance-only", "correlation-only"],
        help="rerun association in a baseline mode instead of reading predictions",
    )
    p_eval.add_argument("--out", default=None, help="CSV export path")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", parents=[common], help="per-stage latency benchmark")
    p_bench.add_argument("--frames", type=int, default=1000)
    p_bench.add_argument(
        "--reid", default=None, choices=["full", "distance-only", "correlation-only"]
    )
    p_bench.add_argument("--out", default=None, help="JSON report path")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and not args.predictions and (args.reid in (None, "full")):
        parser.error("eval needs --predictions unless a baseline --reid mode is given")
    try:
        return args.func(args)
    except BridgeError as exc:
        print(f"bridge error: {exc}", file=sys.stderr)
        return EXIT_BRIDGE
    except (ConfigError, DataFormatError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
