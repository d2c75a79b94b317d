"""PSNR and the four-level evaluation protocols.

Containers are always quantized to 8 bits before the attack: rounding is
the first distortion any saved container suffers, so evaluation never
sees a float container. PSNR-C compares host vs 8-bit container, PSNR-S
secret vs 8-bit extracted secret, both with MAX=255.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import torch

from . import distortion
from .data import ImageFolderDataset, to_tensor, to_uint8
from .errors import ConfigurationError
from .model import PrisModel

LEVELS = (1, 2, 3, 4)


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """PSNR in dB between two 8-bit arrays; +inf when identical."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shapes differ: {a.shape} vs {b.shape}")
    mse = np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2)
    if mse == 0:
        return float("inf")
    return 10.0 * np.log10(255.0**2 / mse)


@dataclass
class EvalReport:
    level: int
    model_id: str
    rows: list = field(default_factory=list)

    def add(self, attack: str, psnr_c: float, psnr_s: float, n_images: int) -> None:
        self.rows.append(
            {"attack": attack, "psnr_c": psnr_c, "psnr_s": psnr_s, "n_images": n_images}
        )

    def to_table(self) -> str:
        lines = [
            f"level {self.level}  model {self.model_id}",
            f"{'attack':<12} {'PSNR-C':>8} {'PSNR-S':>8} {'images':>7}",
        ]
        for r in self.rows:
            lines.append(
                f"{r['attack']:<12} {r['psnr_c']:>8.2f} {r['psnr_s']:>8.2f} {r['n_images']:>7d}"
            )
        return "\n".join(lines)

    def to_json(self) -> str:
        def clean(v):
            return "inf" if v == float("inf") else v

        payload = {
            "level": self.level,
            "model_id": self.model_id,
            "rows": [
                {**r, "psnr_c": clean(r["psnr_c"]), "psnr_s": clean(r["psnr_s"])}
                for r in self.rows
            ],
        }
        return json.dumps(payload, indent=2)


def _mean(values):
    finite = [v for v in values if v != float("inf")]
    if not finite:
        return float("inf")
    return float(np.mean(finite))


def quantize(x: torch.Tensor) -> torch.Tensor:
    """Round a [0,1] image tensor to the 8-bit grid (hard, no gradient)."""
    with torch.no_grad():
        return distortion.hard_round(torch.clamp(x, 0.0, 1.0) * 255.0) / 255.0


@torch.no_grad()
def evaluate(
    model,
    level: int,
    attacks: list[str],
    data: ImageFolderDataset,
    seed: int = 0,
    model_id: str = "",
) -> EvalReport:
    """Run the level protocol over the test set.

    ``model`` is a single PrisModel for levels 3 and 4, or a mapping
    {attack label: PrisModel} for levels 1 and 2 (one checkpoint per
    attack). Level 3 uses per-attack enhancer sets on one backbone;
    level 4 uses the default enhancers with no attack information.
    """
    if level not in LEVELS:
        raise ConfigurationError(f"level must be one of {LEVELS}, got {level}")
    per_attack_models = level in (1, 2)
    if per_attack_models and not isinstance(model, dict):
        raise ConfigurationError(f"level {level} needs one model per attack label")
    if not per_attack_models and not isinstance(model, PrisModel):
        raise ConfigurationError(f"level {level} expects a single model")

    specs = {label: distortion.spec_from_label(label) for label in attacks}
    if per_attack_models:
        missing = [a for a in attacks if a not in model]
        if missing:
            raise ConfigurationError(f"no checkpoint supplied for attacks: {missing}")
    elif level == 3:
        for label in attacks:
            if (model.use_pre and label not in model.pre_enhancers) or (
                model.use_post and label not in model.post_enhancers
            ):
                stored = sorted(set(model.pre_enhancers) | set(model.post_enhancers))
                raise ConfigurationError(
                    f"level 3 requires an enhancer set for {label!r}; stored: {stored}"
                )

    report = EvalReport(level=level, model_id=model_id)
    per_attack_c: dict[str, list[float]] = {a: [] for a in attacks}
    per_attack_s: dict[str, list[float]] = {a: [] for a in attacks}

    n = len(data)
    for idx in range(n):
        # hosts and secrets pair disjoint test images
        xh = data.get(idx).unsqueeze(0)
        xs = data.get((idx + 1) % n).unsqueeze(0)
        host_u8 = to_uint8(xh[0])
        secret_u8 = to_uint8(xs[0])
        image_seed = seed * 1_000_003 + idx

        shared_container = None
        if not per_attack_models:
            container, _ = model.embed(xh, xs)
            shared_container = quantize(container)

        for label in attacks:
            if per_attack_models:
                m = model[label]
                container, _ = m.embed(xh, xs)
                container_q = quantize(container)
            else:
                m = model
                container_q = shared_container
            xd = distortion.apply(specs[label], container_q, rng_seed=image_seed, train=False)
            # z fixed per (image, seed) so reports are reproducible
            z = m.sample_latent(xh, generator=torch.Generator().manual_seed(image_seed))
            attack_label = label if level == 3 else None
            _, extracted = m.extract(xd, z, attack_label=attack_label)
            per_attack_c[label].append(psnr(host_u8, to_uint8(container_q[0])))
            per_attack_s[label].append(psnr(secret_u8, to_uint8(extracted[0])))

    for label in attacks:
        report.add(label, _mean(per_attack_c[label]), _mean(per_attack_s[label]), n)
    return report
