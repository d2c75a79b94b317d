"""Invertible coupling blocks: the embedding forward pass and its exact inverse.

The network operates in the Haar frequency domain on two branches of equal
shape, the host branch and the secret branch. Forward per block:

    xh' = xh + f(xs)
    xs' = xs * exp(sigmoid(g(xh'))) + h(xh')

and the inverse is obtained by solving the two lines in reverse order. The
multiplicative factor exp(sigmoid(.)) lies in (1, e) by construction.
"""

import torch
import torch.nn as nn

from .subnets import DenseBlock
from .wavelet import dwt, iwt


def _check_same_shape(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise ValueError(f"branch shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")


class CouplingBlock(nn.Module):
    """One invertible block with three dense subnets f, g, h."""

    def __init__(self, channels: int, growth: int = 32, n_layers: int = 5):
        super().__init__()
        self.f = DenseBlock(channels, channels, growth, n_layers)
        self.g = DenseBlock(channels, channels, growth, n_layers)
        self.h = DenseBlock(channels, channels, growth, n_layers)

    def forward(self, xh: torch.Tensor, xs: torch.Tensor):
        _check_same_shape(xh, xs)
        xh_next = xh + self.f(xs)
        xs_next = xs * torch.exp(torch.sigmoid(self.g(xh_next))) + self.h(xh_next)
        return xh_next, xs_next

    def inverse(self, xh_next: torch.Tensor, xs_next: torch.Tensor):
        _check_same_shape(xh_next, xs_next)
        xs = (xs_next - self.h(xh_next)) * torch.exp(-torch.sigmoid(self.g(xh_next)))
        xh = xh_next - self.f(xs)
        return xh, xs


class InvertibleNet(nn.Module):
    """Stack of N coupling blocks plus the DWT/IWT domain moves.

    ``embed`` maps (host, secret) spatial images to (container, z_hat);
    ``extract`` maps (distorted container, latent z) back to
    (revealed host, extracted secret). Both accept/return spatial images;
    the *_freq variants stay in the frequency domain so enhancers that run
    in frequency mode can be spliced in by the caller.
    """

    def __init__(self, n_blocks: int = 8, channels: int = 3, growth: int = 32, n_layers: int = 5):
        super().__init__()
        if n_blocks < 1:
            raise ValueError(f"need at least one block, got {n_blocks}")
        self.n_blocks = n_blocks
        self.channels = channels
        self.growth = growth
        self.n_layers = n_layers
        freq_ch = 4 * channels
        self.blocks = nn.ModuleList(CouplingBlock(freq_ch, growth, n_layers) for _ in range(n_blocks))

    def forward_freq(self, hf: torch.Tensor, sf: torch.Tensor):
        for block in self.blocks:
            hf, sf = block(hf, sf)
        return hf, sf

    def inverse_freq(self, hf: torch.Tensor, sf: torch.Tensor):
        for block in reversed(self.blocks):
            hf, sf = block.inverse(hf, sf)
        return hf, sf

    def embed(self, xh: torch.Tensor, xs: torch.Tensor):
        _check_same_shape(xh, xs)
        hf, zf = self.forward_freq(dwt(xh), dwt(xs))
        return iwt(hf), zf

    def extract(self, xd: torch.Tensor, z: torch.Tensor):
        hf, sf = self.inverse_freq(dwt(xd), z)
        return iwt(hf), iwt(sf)

    def sample_latent(self, like: torch.Tensor, generator: torch.Generator | None = None) -> torch.Tensor:
        """Standard-normal latent matching the secret-branch frequency shape."""
        b, c, h, w = like.shape
        shape = (b, 4 * c, h // 2, w // 2)
        return torch.randn(shape, generator=generator, dtype=like.dtype, device=like.device)
