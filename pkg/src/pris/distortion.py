"""Attack suite applied to the container between embedding and extraction.

Covers Gaussian noise, a simulated JPEG codec, hard 8-bit rounding, and
the round-first composites rgaussian / rjpeg. Rounding uses an exact
round-half-away-from-zero forward pass with a selectable surrogate
gradient in the backward pass: zero, one (straight-through), or the
smooth staircase GAF whose derivative is sign(x) * (-0.5*pi*sin(pi*x)).
"""

import math
from dataclasses import dataclass, field

import torch

GRAD_MODES = ("zero", "one", "gaf")
KINDS = ("identity", "gaussian", "jpeg", "round", "rgaussian", "rjpeg")


# ---------------------------------------------------------------------------
# rounding and its surrogate gradients

def gaf(x: torch.Tensor) -> torch.Tensor:
    """Smooth staircase approximation of rounding.

    gaf(x) = sign(x) * 0.5 * cos(pi*x) + 0.5 + floor(x), where sign(x) is
    +1 when floor(x) is odd and -1 otherwise. Identity at integers,
    continuous across integer boundaries, monotone on each unit interval.
    """
    fl = torch.floor(x)
    sign = torch.where(fl.long() % 2 != 0, 1.0, -1.0).to(x.dtype)
    return sign * 0.5 * torch.cos(math.pi * x) + 0.5 + fl


def gaf_grad(x: torch.Tensor) -> torch.Tensor:
    """Analytic derivative of :func:`gaf`."""
    fl = torch.floor(x)
    sign = torch.where(fl.long() % 2 != 0, 1.0, -1.0).to(x.dtype)
    return sign * (-0.5 * math.pi) * torch.sin(math.pi * x)


def hard_round(x: torch.Tensor) -> torch.Tensor:
    """Round half away from zero (torch.round would round half to even)."""
    return torch.sign(x) * torch.floor(torch.abs(x) + 0.5)


class _RoundSurrogate(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x, grad_mode):
        ctx.grad_mode = grad_mode
        if grad_mode == "gaf":
            ctx.save_for_backward(x)
        return hard_round(x)

    @staticmethod
    def backward(ctx, grad_out):
        if ctx.grad_mode == "zero":
            return torch.zeros_like(grad_out), None
        if ctx.grad_mode == "one":
            return grad_out, None
        (x,) = ctx.saved_tensors
        return grad_out * gaf_grad(x), None


def surrogate_round(x: torch.Tensor, grad_mode: str = "gaf") -> torch.Tensor:
    """Exact rounding forward, surrogate gradient backward (any scale)."""
    if grad_mode not in GRAD_MODES:
        raise ValueError(f"grad_mode must be one of {GRAD_MODES}, got {grad_mode!r}")
    return _RoundSurrogate.apply(x, grad_mode)


def round_st(x: torch.Tensor, grad_mode: str = "gaf") -> torch.Tensor:
    """8-bit quantization of a [0,1] image with a surrogate gradient."""
    return surrogate_round(x * 255.0, grad_mode) / 255.0


# ---------------------------------------------------------------------------
# Gaussian noise

def gaussian_noise(x: torch.Tensor, sigma: float, rng_seed: int) -> torch.Tensor:
    """Add i.i.d. N(0, (sigma/255)^2) noise and clamp to [0,1].

    sigma is expressed on the 8-bit scale, matching attack labels like
    gauss10. Deterministic given the seed.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return x
    gen = torch.Generator(device="cpu").manual_seed(rng_seed)
    noise = torch.randn(x.shape, generator=gen, dtype=x.dtype) * (sigma / 255.0)
    return torch.clamp(x + noise.to(x.device), 0.0, 1.0)


# ---------------------------------------------------------------------------
# simulated JPEG

# ITU-T T.81 Annex K base quantization tables
_BASE_TABLE_Y = torch.tensor([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=torch.float32)

_BASE_TABLE_C = torch.tensor([
    [17, 18, 24, 47, 99, 99, 99, 99],
    [18, 21, 26, 66, 99, 99, 99, 99],
    [24, 26, 56, 99, 99, 99, 99, 99],
    [47, 66, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
    [99, 99, 99, 99, 99, 99, 99, 99],
], dtype=torch.float32)


def quality_tables(qf: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Luma/chroma quantization tables for a quality factor, libjpeg scaling."""
    if not 1 <= qf <= 100:
        raise ValueError(f"quality factor must be in [1, 100], got {qf}")
    scale = 5000.0 / qf if qf < 50 else 200.0 - 2.0 * qf

    def scale_table(t):
        return torch.clamp(torch.floor((t * scale + 50.0) / 100.0), 1.0, 255.0)

    return scale_table(_BASE_TABLE_Y), scale_table(_BASE_TABLE_C)


def _dct_matrix(dtype, device) -> torch.Tensor:
    """Orthonormal 8-point DCT-II matrix."""
    k = torch.arange(8, dtype=torch.float64)
    n = torch.arange(8, dtype=torch.float64)
    m = torch.cos((2 * n[None, :] + 1) * k[:, None] * math.pi / 16.0)
    m *= math.sqrt(2.0 / 8.0)
    m[0] /= math.sqrt(2.0)
    return m.to(dtype=dtype, device=device)


# full-range BT.601
_RGB_TO_YCBCR = torch.tensor([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
], dtype=torch.float32)


def _blockify(x: torch.Tensor) -> torch.Tensor:
    b, h, w = x.shape
    return x.view(b, h // 8, 8, w // 8, 8).permute(0, 1, 3, 2, 4).reshape(b, -1, 8, 8)


def _unblockify(x: torch.Tensor, h: int, w: int) -> torch.Tensor:
    b = x.shape[0]
    return x.view(b, h // 8, w // 8, 8, 8).permute(0, 1, 3, 2, 4).reshape(b, h, w)


def jpeg_sim(x: torch.Tensor, qf: int, grad_mode: str = "gaf", hard: bool = False) -> torch.Tensor:
    """Differentiable JPEG round trip (no chroma subsampling, no entropy coding).

    RGB -> YCbCr, per-channel 8x8 orthonormal DCT, division by the
    QF-scaled Annex K tables, rounding (hard in eval, surrogate in train),
    then the inverse path. Spatial dims must be multiples of 8; other
    sizes are symmetrically handled by the caller via pad-and-crop.
    """
    qy, qc = quality_tables(qf)
    b, c, h, w = x.shape
    if c != 3:
        raise ValueError(f"jpeg simulation expects 3-channel RGB, got {c} channels")
    pad_h = (-h) % 8
    pad_w = (-w) % 8
    if pad_h or pad_w:
        x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h), mode="replicate")
        _, _, hp, wp = x.shape
    else:
        hp, wp = h, w

    m = _RGB_TO_YCBCR.to(x.dtype).to(x.device)
    # center luma; chroma is already zero-centered in full-range BT.601
    offset = torch.tensor([-128.0, 0.0, 0.0], dtype=x.dtype, device=x.device).view(1, 3, 1, 1)
    ycc = torch.einsum("ij,bjhw->bihw", m, x * 255.0) + offset

    dct = _dct_matrix(x.dtype, x.device)
    out_channels = []
    for ch in range(3):
        q = qy if ch == 0 else qc
        blocks = _blockify(ycc[:, ch])
        coeffs = dct @ blocks @ dct.T
        quant = coeffs / q
        quant = hard_round(quant) if hard else surrogate_round(quant, grad_mode)
        coeffs = quant * q
        rec = dct.T @ coeffs @ dct
        out_channels.append(_unblockify(rec, hp, wp))
    ycc = torch.stack(out_channels, dim=1) - offset
    rgb = torch.einsum("ij,bjhw->bihw", torch.linalg.inv(m.double()).to(x.dtype), ycc) / 255.0
    rgb = rgb[:, :, :h, :w]
    return torch.clamp(rgb, 0.0, 1.0)


# ---------------------------------------------------------------------------
# declarative attack specs

@dataclass
class DistortionSpec:
    """Declarative attack description: kind + parameters + gradient mode."""

    kind: str = "identity"
    sigma: float = 0.0
    qf: int = 95
    grad_mode: str = "gaf"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distortion kind {self.kind!r}; valid: {KINDS}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not 1 <= self.qf <= 100:
            raise ValueError(f"qf must be in [1, 100], got {self.qf}")
        if self.grad_mode not in GRAD_MODES:
            raise ValueError(f"grad_mode must be one of {GRAD_MODES}, got {self.grad_mode!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma, "qf": self.qf, "grad_mode": self.grad_mode}


# CLI attack labels
ATTACK_LABELS = {
    "identity": DistortionSpec("identity"),
    "gauss1": DistortionSpec("gaussian", sigma=1),
    "gauss10": DistortionSpec("gaussian", sigma=10),
    "jpeg90": DistortionSpec("jpeg", qf=90),
    "jpeg80": DistortionSpec("jpeg", qf=80),
    "round": DistortionSpec("round"),
    "rgauss1": DistortionSpec("rgaussian", sigma=1),
    "rgauss10": DistortionSpec("rgaussian", sigma=10),
    "rjpeg90": DistortionSpec("rjpeg", qf=90),
    "rjpeg80": DistortionSpec("rjpeg", qf=80),
}


def spec_from_label(label: str) -> DistortionSpec:
    try:
        return ATTACK_LABELS[label]
    except KeyError:
        raise ValueError(f"unknown attack label {label!r}; available: {', '.join(ATTACK_LABELS)}") from None


def apply(spec: DistortionSpec, x: torch.Tensor, rng_seed: int = 0, train: bool = False) -> torch.Tensor:
    """Dispatch an attack. In train mode rounding uses the spec's surrogate
    gradient; in eval mode rounding is hard."""

    def rnd(t):
        return round_st(t, spec.grad_mode) if train else hard_round(t * 255.0) / 255.0

    if spec.kind == "identity":
        return x
    if spec.kind == "gaussian":
        return gaussian_noise(x, spec.sigma, rng_seed)
    if spec.kind == "jpeg":
        return jpeg_sim(x, spec.qf, spec.grad_mode, hard=not train)
    if spec.kind == "round":
        return rnd(x)
    if spec.kind == "rgaussian":
        return gaussian_noise(rnd(x), spec.sigma, rng_seed)
    if spec.kind == "rjpeg":
        return jpeg_sim(rnd(x), spec.qf, spec.grad_mode, hard=not train)
    raise ValueError(f"unknown distortion kind {spec.kind!r}")
