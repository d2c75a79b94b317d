"""Pre/post enhance modules: residual dense-block correctors.

The pre-enhancer cleans the distorted container before the inverse pass,
the post-enhancer refines the extracted secret after it. Both are
residual (output = input + correction) so a zero-initialized enhancer is
exactly the identity and cannot hurt a working invertible network.
The ``domain`` flag decides whether the enhancer runs on the spatial
image or on its Haar frequency representation.
"""

import torch
import torch.nn as nn

from .subnets import DenseBlock

DOMAINS = ("spatial", "frequency")


class EnhanceNet(nn.Module):
    def __init__(self, channels: int = 3, domain: str = "spatial", growth: int = 32, n_layers: int = 5):
        super().__init__()
        if domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")
        self.domain = domain
        # frequency mode sees the 4x channel Haar stack
        ch = channels if domain == "spatial" else 4 * channels
        self.body = DenseBlock(ch, ch, growth, n_layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)
