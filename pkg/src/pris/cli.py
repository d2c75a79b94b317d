"""Command-line front end: train, embed, extract, eval, bitpack-demo.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric abort.
PRIS_SEED overrides config seeds when set.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np
import torch

from . import bitpack, checkpoint, config as config_mod, metrics
from .data import ImageFolderDataset, load_image, save_image, to_tensor, to_uint8
from .distortion import ATTACK_LABELS
from .errors import ConfigurationError, DataError, TrainingAborted
from .training import Trainer

SIZE_MULTIPLE = 16  # 2x2 Haar blocks on top of 8x8 JPEG blocks


def _env_seed(default: int) -> int:
    val = os.environ.get("PRIS_SEED")
    if val is None:
        return default
    try:
        return int(val)
    except ValueError:
        raise ConfigurationError(f"PRIS_SEED must be an integer, got {val!r}") from None


def _crop_to_multiple(arr: np.ndarray, name: str) -> np.ndarray:
    h, w = arr.shape[:2]
    h2 = (h // SIZE_MULTIPLE) * SIZE_MULTIPLE
    w2 = (w // SIZE_MULTIPLE) * SIZE_MULTIPLE
    if h2 == 0 or w2 == 0:
        raise DataError(f"{name} is {w}x{h}, smaller than {SIZE_MULTIPLE}x{SIZE_MULTIPLE}")
    if (h2, w2) != (h, w):
        print(
            f"warning: center-cropping {name} from {w}x{h} to {w2}x{h2} "
            f"(dims must be multiples of {SIZE_MULTIPLE})",
            file=sys.stderr,
        )
        top = (h - h2) // 2
        left = (w - w2) // 2
        arr = arr[top : top + h2, left : left + w2]
    return arr


def _load_image_checked(path, name: str) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{name} image not found: {path}")
    return _crop_to_multiple(load_image(path), name)


def _attack_checkpoint(model_path: str, attack: str) -> Path:
    """Per-attack checkpoint convention for levels 1/2: {base}.{attack}.ckpt."""
    base = Path(model_path)
    stem = base.stem if base.suffix == ".ckpt" else base.name
    return base.parent / f"{stem}.{attack}.ckpt"


def _resolve_checkpoint(model_path: str, attack: str | None) -> Path:
    if attack is None:
        return Path(model_path)
    candidate = _attack_checkpoint(model_path, attack)
    return candidate if candidate.is_file() else Path(model_path)


def _load_model(path) -> "checkpoint.PrisModel":
    path = Path(path)
    if not path.is_file():
        raise DataError(f"model checkpoint not found: {path}")
    model, _ = checkpoint.load_model(path)
    model.eval()
    return model


def _check_attack_labels(labels) -> None:
    unknown = [a for a in labels if a not in ATTACK_LABELS]
    if unknown:
        raise ConfigurationError(
            f"unknown attack labels {unknown}; available: {', '.join(ATTACK_LABELS)}"
        )


def cmd_train(args) -> int:
    cfg = config_mod.load_config(args.config)
    if args.dump_config:
        print(config_mod.dump_config(cfg), end="")
        return 0
    cfg.seed = _env_seed(cfg.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        data = ImageFolderDataset(cfg.data.train_dir, cfg.train.crop_size, "train")
    except (FileNotFoundError, ValueError) as exc:
        raise DataError(str(exc)) from exc

    torch.manual_seed(cfg.seed)
    model = config_mod.build_model(cfg)
    plan = config_mod.build_plan(cfg)
    log_path = out_dir / "metrics.jsonl"
    if log_path.exists():
        log_path.unlink()
    trainer = Trainer(model, plan, data, log_path=log_path)
    trainer.train_full(checkpoint_dir=out_dir)
    checkpoint.save_model(out_dir / "model.ckpt", model, step_reached=plan.steps[-1].step)
    print(f"wrote {out_dir / 'model.ckpt'} and {log_path}")
    return 0


def cmd_embed(args) -> int:
    model = _load_model(_resolve_checkpoint(args.model, args.attack))
    host = _load_image_checked(args.host, "host")
    secret = _load_image_checked(args.secret, "secret")
    if host.shape != secret.shape:
        raise DataError(f"host {host.shape} and secret {secret.shape} differ after cropping")
    with torch.no_grad():
        container, _ = model.embed(to_tensor(host).unsqueeze(0), to_tensor(secret).unsqueeze(0))
    save_image(args.out, to_uint8(container[0]))
    print(f"wrote {args.out}")
    return 0


def cmd_extract(args) -> int:
    model = _load_model(_resolve_checkpoint(args.model, args.attack))
    container = _load_image_checked(args.container, "container")
    xd = to_tensor(container).unsqueeze(0)
    label = args.attack
    if label is not None and label not in model.pre_enhancers and label not in model.post_enhancers:
        stored = sorted(set(model.pre_enhancers) | set(model.post_enhancers))
        if stored and stored != ["default"]:
            raise ConfigurationError(
                f"no enhancer set stored for attack label {label!r}; available: {stored}"
            )
        label = None  # per-attack checkpoint already selected, or plain level-4 model
    z_seed = _env_seed(args.z_seed)
    gen = torch.Generator().manual_seed(z_seed)
    with torch.no_grad():
        z = model.sample_latent(xd, generator=gen)
        _, extracted = model.extract(xd, z, attack_label=label)
    save_image(args.out, to_uint8(extracted[0]))
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    labels = [a.strip() for a in args.attacks.split(",") if a.strip()]
    if not labels:
        raise ConfigurationError("no attack labels given")
    _check_attack_labels(labels)
    seed = _env_seed(args.seed)

    if args.level in (1, 2):
        model = {}
        for label in labels:
            path = _attack_checkpoint(args.model, label)
            if not path.is_file():
                raise ConfigurationError(
                    f"level {args.level} needs a per-attack checkpoint for {label!r} "
                    f"(looked for {path})"
                )
            model[label] = _load_model(path)
    else:
        model = _load_model(args.model)

    try:
        data = ImageFolderDataset(args.data, args.crop, "test")
    except (FileNotFoundError, ValueError) as exc:
        raise DataError(str(exc)) from exc

    report = metrics.evaluate(model, args.level, labels, data, seed=seed, model_id=str(args.model))
    out = Path(args.out)
    out.with_suffix(".txt").write_text(report.to_table() + "\n")
    out.with_suffix(".json").write_text(report.to_json() + "\n")
    print(report.to_table())
    print(f"wrote {out.with_suffix('.txt')} and {out.with_suffix('.json')}")
    return 0


def cmd_bitpack_demo(args) -> int:
    host = _load_image_checked(args.host, "host")
    secret = _load_image_checked(args.secret, "secret")
    if host.shape != secret.shape:
        raise DataError(f"host {host.shape} and secret {secret.shape} differ after cropping")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    container = bitpack.pack(host, secret)
    bitpack.write_container(out_dir / "container.wc", container)
    recovered = bitpack.unpack(bitpack.read_container(out_dir / "container.wc"))
    save_image(out_dir / "recovered.png", recovered)
    lossless = bool(np.array_equal(recovered, secret))
    bound = bitpack.bound_check(host, secret)
    print(f"container: {out_dir / 'container.wc'}")
    print(f"recovered secret: {out_dir / 'recovered.png'} (lossless: {lossless})")
    print(f"PSNR bound vs scaled host: {bound:.2f} dB (guaranteed > 144.52 dB)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pris", description="Robust invertible image steganography")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run the configured training plan")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--dump-config", action="store_true", help="echo the validated config and exit")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="hide a secret image inside a host image")
    p.add_argument("--model", required=True)
    p.add_argument("--host", required=True)
    p.add_argument("--secret", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--attack", default=None, help="attack label for per-attack checkpoints (levels 1/2)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover the secret from a container image")
    p.add_argument("--model", required=True)
    p.add_argument("--container", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--attack", default=None, help="attack label selecting a level-3 enhancer set")
    p.add_argument("--z-seed", type=int, default=0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="evaluate a model over a test set and attack list")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--level", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--attacks", required=True, help="comma-separated attack labels")
    p.add_argument("--out", required=True, help="report stem; writes <out>.txt and <out>.json")
    p.add_argument("--crop", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bitpack-demo", help="lossless 32-bit packing demonstration")
    p.add_argument("--host", required=True)
    p.add_argument("--secret", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bitpack_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except TrainingAborted as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
