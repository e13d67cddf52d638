"""Command line: build paired data, train, evaluate and serve the adapter."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dataset import build_dataset
from .evaluate import evaluate, overall
from .train import TrainConfig, save_checkpoint, train


def cmd_train(args) -> int:
    dataset = build_dataset(
        [Path(p) for p in args.scenes],
        src_id=args.source_radar,
        tgt_id=args.target_radar,
        seed=args.seed,
    )
    print(
        f"dataset: {len(dataset.samples)} pairs "
        f"({len(dataset.train_idx)} train / {len(dataset.test_idx)} test), "
        f"D={dataset.doppler_bins}"
    )
    cfg = TrainConfig(
        lambda_l1=args.lambda_l1,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    result = train(dataset, cfg)
    save_checkpoint(args.out, result, cfg)
    print(f"saved checkpoint to {args.out} after {result.wall_s:.0f}s")

    rows = evaluate(result.generator, dataset)
    for row in rows + [overall(rows)]:
        print(
            f"{row.activity:>10}: n={row.count:4d}  L1 {row.l1_mean:7.3f}  "
            f"SSIM {row.ssim_mean:.4f} (unadapted {row.ssim_unadapted:.4f})  "
            f"PSNR {row.psnr_mean:6.2f} dB"
        )
    return 0


def cmd_serve(args) -> int:
    from .serve import AdapterServer

    server = AdapterServer(
        (args.host, args.port),
        checkpoint=None if args.identity else args.checkpoint,
        identity=args.identity,
    )
    print(f"adapter bridge listening on {server.endpoint}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="adapter-gan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train on simulator paired-view scenes")
    p_train.add_argument("scenes", nargs="+", help="simulator dataset directories")
    p_train.add_argument("--out", required=True, help="checkpoint path")
    p_train.add_argument("--source-radar", default="r0")
    p_train.add_argument("--target-radar", default="r1")
    p_train.add_argument("--epochs", type=int, default=12)
    p_train.add_argument("--batch-size", type=int, default=16)
    p_train.add_argument("--lambda-l1", type=float, default=100.0)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=cmd_train)

    p_serve = sub.add_parser("serve", help="serve a checkpoint over the bridge protocol")
    p_serve.add_argument("--checkpoint", default=None)
    p_serve.add_argument("--identity", action="store_true", help="echo requests (testing)")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=7601)
    p_serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
