"""Losses, the 3-step training strategy, and the optimizer schedule.

Step 1 pre-trains the invertible blocks with the enhancers disabled,
step 2 trains the enhancers with the blocks frozen, step 3 finetunes
everything jointly. The squared-error losses sum over pixels and divide
by batch size only, so the loss weights transfer across crop sizes.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import distortion
from .data import ImageFolderDataset
from .distortion import DistortionSpec
from .errors import TrainingAborted
from .model import PrisModel

PARAM_GROUPS = ("inn", "pre_enhance", "post_enhance")
ADAM_BETAS = (0.9, 0.99)


@dataclass
class LossWeights:
    lambda_c: float = 1.0
    lambda_s: float = 1.0
    lambda_z: float = 0.0

    def __post_init__(self):
        if self.lambda_c < 0 or self.lambda_s < 0 or self.lambda_z < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.lambda_c + self.lambda_s <= 0:
            raise ValueError("lambda_c + lambda_s must be positive")


def loss_c(xc: torch.Tensor, xh: torch.Tensor) -> torch.Tensor:
    """Container fidelity: sum of squared pixel differences / batch size."""
    if xc.shape != xh.shape:
        raise ValueError(f"shapes differ: {tuple(xc.shape)} vs {tuple(xh.shape)}")
    return ((xc - xh) ** 2).sum() / xc.shape[0]


def loss_s(xs: torch.Tensor, xe: torch.Tensor) -> torch.Tensor:
    """Secret recovery: sum of squared pixel differences / batch size."""
    return loss_c(xs, xe)


def total_loss(w: LossWeights, lc, ls, lz=0.0):
    return w.lambda_c * lc + w.lambda_s * ls + w.lambda_z * lz


def lr_at(initial_lr: float, epoch: int, half_period: int) -> float:
    """Halve the learning rate every half_period epochs."""
    return initial_lr * 0.5 ** (epoch // half_period)


@dataclass
class StepPlan:
    step: int
    epochs: int
    initial_lr: float
    lr_half_period: int = 200
    trainable_groups: tuple = ("inn",)
    use_enhance: bool = True
    distortions: list = field(default_factory=lambda: [DistortionSpec("identity")])

    def __post_init__(self):
        for g in self.trainable_groups:
            if g not in PARAM_GROUPS:
                raise ValueError(f"unknown parameter group {g!r}")
        if self.epochs < 0 or self.initial_lr <= 0 or self.lr_half_period < 1:
            raise ValueError("invalid step plan")


def three_step_plan(
    attacks: list[DistortionSpec],
    epochs: tuple[int, int, int] = (50, 50, 50),
    lr12: float = 10**-4.5,
    lr3: float = 10**-5.5,
    lr_half_period: int = 200,
) -> list[StepPlan]:
    """The default schedule: blocks, then enhancers, then joint finetune."""
    return [
        StepPlan(1, epochs[0], lr12, lr_half_period, ("inn",), use_enhance=False, distortions=list(attacks)),
        StepPlan(2, epochs[1], lr12, lr_half_period, ("pre_enhance", "post_enhance"), distortions=list(attacks)),
        StepPlan(3, epochs[2], lr3, lr_half_period, ("inn", "pre_enhance", "post_enhance"), distortions=list(attacks)),
    ]


def joint_plan(
    attacks: list[DistortionSpec],
    epochs: int = 150,
    lr: float = 10**-4.5,
    lr_half_period: int = 200,
) -> list[StepPlan]:
    """Single joint run for the no-3-step ablation."""
    return [
        StepPlan(1, epochs, lr, lr_half_period, ("inn", "pre_enhance", "post_enhance"), distortions=list(attacks))
    ]


@dataclass
class TrainPlan:
    steps: list
    weights: LossWeights = field(default_factory=LossWeights)
    batch_size: int = 4
    crop_size: int = 64
    seed: int = 0


def _batch_psnr(a: torch.Tensor, b: torch.Tensor) -> float:
    mse = float(((torch.clamp(a, 0, 1) - torch.clamp(b, 0, 1)) ** 2).mean())
    if mse == 0:
        return float("inf")
    return 10.0 * math.log10(1.0 / mse)


class Trainer:
    """Single-writer training loop over a PrisModel."""

    def __init__(self, model: PrisModel, plan: TrainPlan, data: ImageFolderDataset, log_path=None):
        self.model = model
        self.plan = plan
        self.data = data
        self.log_path = Path(log_path) if log_path else None
        self.history: list[dict] = []

    def _log(self, record: dict) -> None:
        self.history.append(record)
        if self.log_path:
            with open(self.log_path, "a") as fh:
                fh.write(json.dumps(record) + "\n")

    def _set_trainable(self, groups) -> list[torch.nn.Parameter]:
        params = []
        for g in PARAM_GROUPS:
            active = g in groups
            for p in self.model.group_parameters(g):
                p.requires_grad_(active)
                if active:
                    params.append(p)
        return params

    def _pairing(self, rng: np.random.Generator):
        n = len(self.data)
        if n == 0:
            raise ValueError("dataset is empty")
        hosts = rng.permutation(n)
        secrets = np.roll(hosts, 1)  # disjoint pairing for n > 1
        return hosts, secrets

    def run_step(self, sp: StepPlan, enhancer_label: str | None = None) -> None:
        """Run one plan step. ``enhancer_label`` routes training through a
        per-attack enhancer set (level-3 finetuning)."""
        params = self._set_trainable(sp.trainable_groups)
        if not params:
            raise ValueError(f"step {sp.step} has no trainable parameters")
        opt = torch.optim.Adam(params, lr=sp.initial_lr, betas=ADAM_BETAS)
        w = self.plan.weights
        bs = min(self.plan.batch_size, len(self.data))
        n_batches = max(1, len(self.data) // bs)

        for epoch in range(sp.epochs):
            lr = lr_at(sp.initial_lr, epoch, sp.lr_half_period)
            for group in opt.param_groups:
                group["lr"] = lr
            epoch_seed = (self.plan.seed * 1_000_003 + sp.step * 10_007 + epoch) % (2**31)
            rng = np.random.default_rng(epoch_seed)
            zgen = torch.Generator().manual_seed(epoch_seed)
            hosts, secrets = self._pairing(rng)

            sums = {"L": 0.0, "L_c": 0.0, "L_s": 0.0, "psnr_c": 0.0, "psnr_s": 0.0}
            for b in range(n_batches):
                sl = slice(b * bs, b * bs + bs)
                xh = self.data.batch(hosts[sl], rng)
                xs = self.data.batch(secrets[sl], rng)
                spec = sp.distortions[int(rng.integers(len(sp.distortions)))]

                container, z_hat = self.model.embed(xh, xs)
                noise_seed = int(rng.integers(2**31))
                xd = distortion.apply(spec, container, rng_seed=noise_seed, train=True)
                z = self.model.sample_latent(xh, generator=zgen)
                _, extracted = self.model.extract(
                    xd, z, attack_label=enhancer_label, use_enhance=sp.use_enhance
                )

                lc = loss_c(container, xh)
                ls = loss_s(xs, extracted)
                lz = (z_hat**2).sum() / z_hat.shape[0]
                loss = total_loss(w, lc, ls, lz)
                if not torch.isfinite(loss):
                    raise TrainingAborted(
                        f"non-finite loss at step {sp.step} epoch {epoch} batch {b}: "
                        f"L_c={float(lc.detach())} L_s={float(ls.detach())}"
                    )
                opt.zero_grad()
                loss.backward()
                opt.step()

                sums["L"] += float(loss.detach())
                sums["L_c"] += float(lc.detach())
                sums["L_s"] += float(ls.detach())
                with torch.no_grad():
                    sums["psnr_c"] += _batch_psnr(container, xh)
                    sums["psnr_s"] += _batch_psnr(extracted, xs)

            self._log(
                {
                    "step": sp.step,
                    "epoch": epoch,
                    "lr": lr,
                    "L": sums["L"] / n_batches,
                    "L_c": sums["L_c"] / n_batches,
                    "L_s": sums["L_s"] / n_batches,
                    "psnr_c": sums["psnr_c"] / n_batches,
                    "psnr_s": sums["psnr_s"] / n_batches,
                }
            )

    def train_full(self, checkpoint_dir=None, checkpoint_stem: str = "model") -> None:
        """Run all plan steps in order, checkpointing after each."""
        from .checkpoint import save_model

        for sp in self.plan.steps:
            self.run_step(sp)
            if checkpoint_dir is not None:
                path = Path(checkpoint_dir) / f"{checkpoint_stem}.step{sp.step}.ckpt"
                save_model(path, self.model, step_reached=sp.step)

    def finetune_enhancers(self, label: str, spec: DistortionSpec, epochs: int,
                           initial_lr: float = 10**-4.5, lr_half_period: int = 200) -> None:
        """Level-3 specialization: train a per-attack enhancer pair with the
        invertible blocks frozen, on that attack only."""
        self.model.add_enhancer_set(label)
        sp = StepPlan(
            2, epochs, initial_lr, lr_half_period,
            ("pre_enhance", "post_enhance"), distortions=[spec],
        )
        self.run_step(sp, enhancer_label=label)
