"""Config schema and validation for the CLI.

YAML configs are validated strictly (unknown keys rejected) before any
run starts. The schema mirrors the model / train / data split; attack
entries are either a known label string ("gauss10") or an explicit
{kind, sigma, qf} object.
"""

from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .distortion import GRAD_MODES, DistortionSpec, spec_from_label
from .errors import ConfigurationError
from .model import PrisModel
from .training import LossWeights, TrainPlan, joint_plan, three_step_plan


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_blocks: int = Field(8, ge=1)
    channels: int = Field(3, ge=1)
    growth: int = Field(32, ge=1)
    n_layers: int = Field(5, ge=2)
    use_pre: bool = True
    use_post: bool = True
    enhance_domain: str = "spatial"
    enhance_growth: int | None = None
    enhance_layers: int | None = None


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    three_step: bool = True
    epochs: list[int] = [50, 50, 50]
    lr12: float = Field(10**-4.5, gt=0)
    lr3: float = Field(10**-5.5, gt=0)
    lr_half_period: int = Field(200, ge=1)
    lambda_c: float = Field(1.0, ge=0)
    lambda_s: float = Field(1.0, ge=0)
    lambda_z: float = Field(0.0, ge=0)
    grad_mode: str = "gaf"
    batch_size: int = Field(4, ge=1)
    crop_size: int = Field(64, ge=16)
    attacks: list[str | dict] = ["identity"]


class DataConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train_dir: str
    test_dir: str | None = None


class Config(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelConfig = ModelConfig()
    train: TrainConfig = TrainConfig()
    data: DataConfig
    seed: int = 0


def load_config(path) -> Config:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}") from exc
    return validate_config(raw)


def validate_config(raw: dict) -> Config:
    try:
        cfg = Config.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(str(exc)) from exc
    if cfg.train.grad_mode not in GRAD_MODES:
        raise ConfigurationError(f"train.grad_mode must be one of {GRAD_MODES}")
    if cfg.model.enhance_domain not in ("spatial", "frequency"):
        raise ConfigurationError("model.enhance_domain must be 'spatial' or 'frequency'")
    if cfg.train.three_step and len(cfg.train.epochs) != 3:
        raise ConfigurationError("train.epochs needs three entries for a 3-step run")
    if not cfg.train.three_step and len(cfg.train.epochs) not in (1, 3):
        raise ConfigurationError("train.epochs needs one entry (or three, summed) for a joint run")
    attack_specs(cfg)  # fail fast on bad attack entries
    return cfg


def dump_config(cfg: Config) -> str:
    return yaml.safe_dump(cfg.model_dump(), sort_keys=False)


def attack_specs(cfg: Config) -> list[DistortionSpec]:
    """Resolve the train attack list to DistortionSpecs with the configured
    gradient mode."""
    specs = []
    for entry in cfg.train.attacks:
        try:
            if isinstance(entry, str):
                base = spec_from_label(entry)
                spec = DistortionSpec(base.kind, base.sigma, base.qf, cfg.train.grad_mode)
            else:
                spec = DistortionSpec(**{**entry, "grad_mode": cfg.train.grad_mode})
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"bad attack entry {entry!r}: {exc}") from exc
        specs.append(spec)
    return specs


def build_model(cfg: Config) -> PrisModel:
    m = cfg.model
    return PrisModel(
        n_blocks=m.n_blocks,
        channels=m.channels,
        growth=m.growth,
        n_layers=m.n_layers,
        use_pre=m.use_pre,
        use_post=m.use_post,
        enhance_domain=m.enhance_domain,
        enhance_growth=m.enhance_growth,
        enhance_layers=m.enhance_layers,
    )


def build_plan(cfg: Config) -> TrainPlan:
    t = cfg.train
    specs = attack_specs(cfg)
    has_enhance = cfg.model.use_pre or cfg.model.use_post
    if t.three_step and has_enhance:
        steps = three_step_plan(specs, tuple(t.epochs), t.lr12, t.lr3, t.lr_half_period)
    else:
        epochs = t.epochs[0] if len(t.epochs) == 1 else sum(t.epochs)
        steps = joint_plan(specs, epochs, t.lr12, t.lr_half_period)
        if not has_enhance:
            for sp in steps:
                sp.trainable_groups = ("inn",)
                sp.use_enhance = False
    weights = LossWeights(t.lambda_c, t.lambda_s, t.lambda_z)
    return TrainPlan(
        steps=steps,
        weights=weights,
        batch_size=t.batch_size,
        crop_size=t.crop_size,
        seed=cfg.seed,
    )
