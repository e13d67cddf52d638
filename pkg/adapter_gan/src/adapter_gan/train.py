"""Training loop: least-squares adversarial objective plus a weighted L1
reconstruction term (the reconstruction weight defaults to 100)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from .dataset import PairedViewDataset, PairSample
from .model import Generator, PatchDiscriminator, denormalize_patch, normalize_patch


@dataclass
class TrainConfig:
    lambda_l1: float = 100.0
    epochs: int = 12
    batch_size: int = 16
    lr: float = 2e-4
    seed: int = 0
    base_channels: int = 32
    log_every: int = 50


@dataclass
class TrainResult:
    generator: Generator
    angle_grid: tuple[float, ...]
    epoch_l1: list[float] = field(default_factory=list)  # held-out L1 per epoch
    wall_s: float = 0.0


class DivergenceError(RuntimeError):
    pass


def _batches(samples: list[PairSample], batch_size: int, rng: np.random.Generator):
    order = rng.permutation(len(samples))
    for i in range(0, len(order), batch_size):
        chunk = [samples[j] for j in order[i : i + batch_size]]
        src = torch.stack([normalize_patch(s.source)[0] for s in chunk])[:, None]
        tgt = torch.stack([normalize_patch(s.target)[0] for s in chunk])[:, None]
        az_s = torch.tensor([s.az_src for s in chunk], dtype=torch.float32)
        az_t = torch.tensor([s.az_tgt for s in chunk], dtype=torch.float32)
        yield src, tgt, az_s, az_t


@torch.no_grad()
def heldout_l1(gen: Generator, samples: list[PairSample]) -> float:
    gen.eval()
    losses = []
    rng = np.random.default_rng(0)
    for src, tgt, az_s, az_t in _batches(samples, 32, rng):
        fake = gen(src, az_s, az_t)
        losses.append(float(F.l1_loss(fake, tgt)))
    gen.train()
    return float(np.mean(losses))


def train(dataset: PairedViewDataset, cfg: TrainConfig | None = None) -> TrainResult:
    cfg = cfg or TrainConfig()
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    start = time.perf_counter()

    train_samples = dataset.split("train")
    test_samples = dataset.split("test")
    if not train_samples:
        raise ValueError("empty training split")

    gen = Generator(cfg.base_channels)
    disc = PatchDiscriminator()
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.lr, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.lr, betas=(0.5, 0.999))

    result = TrainResult(generator=gen, angle_grid=dataset.angle_grid)
    step = 0
    for epoch in range(cfg.epochs):
        for src, tgt, az_s, az_t in _batches(train_samples, cfg.batch_size, rng):
            fake = gen(src, az_s, az_t)

            # discriminator: real pairs toward 1, generated pairs toward 0
            opt_d.zero_grad()
            d_real = disc(src, tgt, az_s, az_t)
            d_fake = disc(src, fake.detach(), az_s, az_t)
            loss_d = 0.5 * (((d_real - 1.0) ** 2).mean() + (d_fake**2).mean())
            loss_d.backward()
            opt_d.step()

            # generator: fool the critic and reconstruct the target
            opt_g.zero_grad()
            d_fake = disc(src, fake, az_s, az_t)
            loss_adv = ((d_fake - 1.0) ** 2).mean()
            loss_l1 = F.l1_loss(fake, tgt)
            loss_g = loss_adv + cfg.lambda_l1 * loss_l1
            loss_g.backward()
            opt_g.step()

            lg, ld = float(loss_g.detach()), float(loss_d.detach())
            if not (math.isfinite(lg) and math.isfinite(ld)):
                raise DivergenceError(
                    f"training diverged at epoch {epoch} step {step}: "
                    f"loss_g={lg}, loss_d={ld}"
                )
            step += 1
            if step % cfg.log_every == 0:
                print(
                    f"epoch {epoch} step {step}: adv {float(loss_adv.detach()):.4f} "
                    f"l1 {float(loss_l1.detach()):.4f} d {ld:.4f}"
                )
        probe = test_samples if test_samples else train_samples
        result.epoch_l1.append(heldout_l1(gen, probe))
        print(f"epoch {epoch}: held-out L1 {result.epoch_l1[-1]:.4f}")

    result.wall_s = time.perf_counter() - start
    return result


def save_checkpoint(path, result: TrainResult, cfg: TrainConfig) -> None:
    torch.save(
        {
            "state_dict": result.generator.state_dict(),
            "base_channels": cfg.base_channels,
            "angle_grid": list(result.angle_grid),
            "epoch_l1": result.epoch_l1,
        },
        path,
    )


def load_checkpoint(path) -> tuple[Generator, tuple[float, ...]]:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    gen = Generator(blob["base_channels"])
    gen.load_state_dict(blob["state_dict"])
    gen.eval()
    return gen, tuple(blob["angle_grid"])


@torch.no_grad()
def adapt_patch(gen: Generator, patch: np.ndarray, az_src: float, az_tgt: float) -> np.ndarray:
    """Run one (21, D) patch through the generator, returning linear power."""
    t, scale = normalize_patch(patch)
    out = gen(
        t[None, None],
        torch.tensor([az_src], dtype=torch.float32),
        torch.tensor([az_tgt], dtype=torch.float32),
    )[0, 0]
    return denormalize_patch(out, scale).numpy()
