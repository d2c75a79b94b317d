"""Dense convolutional block shared by the coupling subnets and the enhancers."""

import torch
import torch.nn as nn


class DenseBlock(nn.Module):
    """5-layer dense conv block.

    Every 3x3 conv sees the concatenation of the input and all previous
    features (growth channels each). The final conv is zero-initialized so
    the block outputs exactly zero at init, which keeps a fresh coupling
    block (and a fresh residual enhancer) at its simplest behaviour.
    """

    def __init__(self, in_channels: int, out_channels: int, growth: int = 32, n_layers: int = 5):
        super().__init__()
        self.convs = nn.ModuleList()
        ch = in_channels
        for _ in range(n_layers - 1):
            self.convs.append(nn.Conv2d(ch, growth, 3, padding=1))
            ch += growth
        self.final = nn.Conv2d(ch, out_channels, 3, padding=1)
        nn.init.zeros_(self.final.weight)
        nn.init.zeros_(self.final.bias)
        self.act = nn.LeakyReLU(0.2, inplace=True)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = [x]
        for conv in self.convs:
            feats.append(self.act(conv(torch.cat(feats, dim=1))))
        return self.final(torch.cat(feats, dim=1))
