"""Full model: invertible blocks plus optional pre/post enhancers.

Enhancers are kept in ModuleDicts keyed by attack label so a single
backbone can carry one (pre, post) pair per attack for level-3 use.
The key "default" holds the pair used when no attack label is given
(levels 1/2/4 and training).
"""

import torch
import torch.nn as nn

from .enhance import DOMAINS, EnhanceNet
from .inn import InvertibleNet
from .wavelet import dwt, iwt

DEFAULT_ENHANCER_KEY = "default"


class PrisModel(nn.Module):
    def __init__(
        self,
        n_blocks: int = 8,
        channels: int = 3,
        growth: int = 32,
        n_layers: int = 5,
        use_pre: bool = True,
        use_post: bool = True,
        enhance_domain: str = "spatial",
        enhance_growth: int | None = None,
        enhance_layers: int | None = None,
    ):
        super().__init__()
        if enhance_domain not in DOMAINS:
            raise ValueError(f"enhance_domain must be one of {DOMAINS}, got {enhance_domain!r}")
        self.inn = InvertibleNet(n_blocks, channels, growth, n_layers)
        self.use_pre = use_pre
        self.use_post = use_post
        self.enhance_domain = enhance_domain
        self.enhance_growth = growth if enhance_growth is None else enhance_growth
        self.enhance_layers = n_layers if enhance_layers is None else enhance_layers
        self.pre_enhancers = nn.ModuleDict()
        self.post_enhancers = nn.ModuleDict()
        if use_pre:
            self.pre_enhancers[DEFAULT_ENHANCER_KEY] = self._new_enhancer()
        if use_post:
            self.post_enhancers[DEFAULT_ENHANCER_KEY] = self._new_enhancer()

    def _new_enhancer(self) -> EnhanceNet:
        return EnhanceNet(
            self.inn.channels, self.enhance_domain, self.enhance_growth, self.enhance_layers
        )

    def hyperparams(self) -> dict:
        return {
            "n_blocks": self.inn.n_blocks,
            "channels": self.inn.channels,
            "growth": self.inn.growth,
            "n_layers": self.inn.n_layers,
            "use_pre": self.use_pre,
            "use_post": self.use_post,
            "enhance_domain": self.enhance_domain,
            "enhance_growth": self.enhance_growth,
            "enhance_layers": self.enhance_layers,
            "pre_labels": sorted(self.pre_enhancers.keys()),
            "post_labels": sorted(self.post_enhancers.keys()),
        }

    def add_enhancer_set(self, label: str) -> None:
        """Create a fresh (pre, post) enhancer pair for an attack label."""
        if self.use_pre and label not in self.pre_enhancers:
            self.pre_enhancers[label] = self._new_enhancer()
        if self.use_post and label not in self.post_enhancers:
            self.post_enhancers[label] = self._new_enhancer()

    def _enhancer(self, bank: nn.ModuleDict, label: str | None):
        key = DEFAULT_ENHANCER_KEY if label is None else label
        if key not in bank:
            available = ", ".join(sorted(bank.keys())) or "(none)"
            raise KeyError(f"no enhancer stored for attack label {key!r}; available: {available}")
        return bank[key]

    def embed(self, xh: torch.Tensor, xs: torch.Tensor):
        """Host + secret -> (container, z_hat). Enhancers play no role here."""
        return self.inn.embed(xh, xs)

    def extract(
        self,
        xd: torch.Tensor,
        z: torch.Tensor,
        attack_label: str | None = None,
        use_enhance: bool = True,
    ):
        """Distorted container + latent -> (revealed host, extracted secret)."""
        spatial = self.enhance_domain == "spatial"
        if self.use_pre and use_enhance:
            pre = self._enhancer(self.pre_enhancers, attack_label)
            if spatial:
                hf = dwt(pre(xd))
            else:
                hf = pre(dwt(xd))
        else:
            hf = dwt(xd)
        hf, sf = self.inn.inverse_freq(hf, z)
        revealed = iwt(hf)
        if self.use_post and use_enhance:
            post = self._enhancer(self.post_enhancers, attack_label)
            if spatial:
                extracted = post(iwt(sf))
            else:
                extracted = iwt(post(sf))
        else:
            extracted = iwt(sf)
        return revealed, extracted

    def sample_latent(self, like: torch.Tensor, generator: torch.Generator | None = None):
        return self.inn.sample_latent(like, generator)

    # parameter groups for the 3-step schedule
    def group_parameters(self, group: str):
        if group == "inn":
            return list(self.inn.parameters())
        if group == "pre_enhance":
            return list(self.pre_enhancers.parameters())
        if group == "post_enhance":
            return list(self.post_enhancers.parameters())
        raise ValueError(f"unknown parameter group {group!r}")
