"""Orthonormal single-level Haar wavelet transform and its exact inverse.

Images move between the spatial domain (B, C, H, W) and the frequency
domain (B, 4C, H/2, W/2) around the invertible blocks. Sub-band channel
blocks are ordered LL, LH, HL, HH; this ordering is part of the
checkpoint contract and must not change.
"""

import torch


def dwt(x: torch.Tensor) -> torch.Tensor:
    """Single-level orthonormal Haar decomposition.

    Each 2x2 block [[a, b], [c, d]] maps to
    LL=(a+b+c+d)/2, LH=(a-b+c-d)/2, HL=(a+b-c-d)/2, HH=(a-b-c+d)/2,
    so the transform preserves energy and iwt is its transpose.
    """
    if x.dim() != 4:
        raise ValueError(f"expected a 4-axis tensor (B, C, H, W), got shape {tuple(x.shape)}")
    _, _, h, w = x.shape
    if h % 2 != 0 or w % 2 != 0:
        raise ValueError(f"spatial dims must be even for 2x2 Haar blocks, got {h}x{w}")

    a = x[:, :, 0::2, 0::2]
    b = x[:, :, 0::2, 1::2]
    c = x[:, :, 1::2, 0::2]
    d = x[:, :, 1::2, 1::2]

    ll = (a + b + c + d) / 2
    lh = (a - b + c - d) / 2
    hl = (a + b - c - d) / 2
    hh = (a - b - c + d) / 2
    return torch.cat([ll, lh, hl, hh], dim=1)


def iwt(f: torch.Tensor) -> torch.Tensor:
    """Exact inverse of :func:`dwt` (up to float roundoff)."""
    if f.dim() != 4:
        raise ValueError(f"expected a 4-axis tensor (B, 4C, H/2, W/2), got shape {tuple(f.shape)}")
    if f.shape[1] % 4 != 0:
        raise ValueError(f"channel count must be divisible by 4, got {f.shape[1]}")

    ll, lh, hl, hh = torch.chunk(f, 4, dim=1)

    a = (ll + lh + hl + hh) / 2
    b = (ll - lh + hl - hh) / 2
    c = (ll + lh - hl - hh) / 2
    d = (ll - lh - hl + hh) / 2

    n, ch, hh_, ww_ = a.shape
    out = a.new_empty((n, ch, hh_ * 2, ww_ * 2))
    out[:, :, 0::2, 0::2] = a
    out[:, :, 0::2, 1::2] = b
    out[:, :, 1::2, 0::2] = c
    out[:, :, 1::2, 1::2] = d
    return out
