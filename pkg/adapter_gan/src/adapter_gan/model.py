"""Conditional image-translation networks for range-Doppler patches.

The generator is a compact U-Net (three down/up levels with skip
connections, shallow because the patches are 21 x D rather than full
images); the discriminator is a patch classifier judging local windows of
the (source, candidate) pair. Both receive the source and target view
azimuths as constant conditioning channels, so one model covers the whole
angle grid.
"""

from __future__ import annotations

import math

import torch
import torch.nn as nn

PATCH_ROWS = 21


def pad_to_multiple(x: torch.Tensor, multiple: int = 8) -> tuple[torch.Tensor, tuple[int, int]]:
    h, w = x.shape[-2:]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph or pw:
        x = nn.functional.pad(x, (0, pw, 0, ph), mode="replicate")
    return x, (h, w)


def crop_to(x: torch.Tensor, size: tuple[int, int]) -> torch.Tensor:
    return x[..., : size[0], : size[1]]


def angle_channels(az_src: torch.Tensor, az_tgt: torch.Tensor, shape) -> torch.Tensor:
    """Constant conditioning planes: (cos, sin) of both view azimuths."""
    chans = torch.stack(
        [torch.cos(az_src), torch.sin(az_src), torch.cos(az_tgt), torch.sin(az_tgt)],
        dim=1,
    )
    return chans[:, :, None, None].expand(-1, -1, shape[0], shape[1])


def _down(cin, cout, norm=True):
    layers = [nn.Conv2d(cin, cout, 4, stride=2, padding=1)]
    if norm:
        layers.append(nn.InstanceNorm2d(cout))
    layers.append(nn.LeakyReLU(0.2, inplace=True))
    return nn.Sequential(*layers)


def _up(cin, cout):
    return nn.Sequential(
        nn.ConvTranspose2d(cin, cout, 4, stride=2, padding=1),
        nn.InstanceNorm2d(cout),
        nn.ReLU(inplace=True),
    )


class Generator(nn.Module):
    """U-Net encoder-decoder with skips; input is the source patch plus four
    angle-conditioning channels, output a patch in [-1, 1]."""

    def __init__(self, base: int = 32):
        super().__init__()
        self.d1 = _down(5, base, norm=False)
        self.d2 = _down(base, base * 2)
        self.d3 = _down(base * 2, base * 4)
        self.mid = nn.Sequential(
            nn.Conv2d(base * 4, base * 4, 3, padding=1),
            nn.InstanceNorm2d(base * 4),
            nn.ReLU(inplace=True),
        )
        self.u3 = _up(base * 4, base * 2)
        self.u2 = _up(base * 4, base)
        self.u1 = nn.Sequential(
            nn.ConvTranspose2d(base * 2, base, 4, stride=2, padding=1),
            nn.ReLU(inplace=True),
        )
        self.out = nn.Sequential(nn.Conv2d(base + 5, 16, 3, padding=1), nn.ReLU(inplace=True), nn.Conv2d(16, 1, 3, padding=1), nn.Tanh())

    def forward(self, patch: torch.Tensor, az_src: torch.Tensor, az_tgt: torch.Tensor) -> torch.Tensor:
        x = patch
        cond = angle_channels(az_src, az_tgt, x.shape[-2:])
        x = torch.cat([x, cond], dim=1)
        x, size = pad_to_multiple(x)
        e1 = self.d1(x)
        e2 = self.d2(e1)
        e3 = self.d3(e2)
        m = self.mid(e3)
        y = self.u3(m)
        y = self.u2(torch.cat([y, e2], dim=1))
        y = self.u1(torch.cat([y, e1], dim=1))
        y = self.out(torch.cat([y, x], dim=1))
        return crop_to(y, size)


class PatchDiscriminator(nn.Module):
    """Least-squares patch critic over (source, candidate target) pairs; the
    stacked strided convolutions give each output cell a ~70x70 receptive
    field on the input plane."""

    def __init__(self, base: int = 48):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(6, base, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(base, base * 2, 4, stride=2, padding=1),
            nn.InstanceNorm2d(base * 2),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(base * 2, base * 4, 4, stride=1, padding=1),
            nn.InstanceNorm2d(base * 4),
            nn.LeakyReLU(0.2, inplace=True),
            nn.Conv2d(base * 4, 1, 4, stride=1, padding=1),
        )

    def forward(self, source: torch.Tensor, candidate: torch.Tensor, az_src, az_tgt) -> torch.Tensor:
        cond = angle_channels(az_src, az_tgt, source.shape[-2:])
        x = torch.cat([source, candidate, cond], dim=1)
        x, _ = pad_to_multiple(x, 4)
        return self.net(x)


_LOG_GAIN = 1.0e3  # patches span several decades; train in the log domain


def normalize_patch(patch) -> tuple[torch.Tensor, float]:
    """Map a non-negative linear-power patch to the model's [-1, 1] range via
    log compression; returns the scale needed to invert the mapping."""
    t = torch.as_tensor(patch, dtype=torch.float32)
    logp = torch.log1p(t.clamp_min(0.0) * _LOG_GAIN)
    scale = float(logp.max())
    if scale <= 0:
        return torch.full_like(t, -1.0), 1.0
    return logp / scale * 2.0 - 1.0, scale


def denormalize_patch(t: torch.Tensor, scale: float) -> torch.Tensor:
    logp = (t.clamp(-1.0, 1.0) + 1.0) * 0.5 * scale
    return torch.expm1(logp) / _LOG_GAIN
