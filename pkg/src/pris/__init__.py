"""PRIS: practical robust invertible-network image steganography."""

from .distortion import ATTACK_LABELS, DistortionSpec, gaf, round_st
from .enhance import EnhanceNet
from .inn import CouplingBlock, InvertibleNet
from .metrics import EvalReport, evaluate, psnr
from .model import PrisModel
from .training import LossWeights, StepPlan, TrainPlan, Trainer
from .wavelet import dwt, iwt

__version__ = "0.1.0"

__all__ = [
    "ATTACK_LABELS",
    "CouplingBlock",
    "DistortionSpec",
    "EnhanceNet",
    "EvalReport",
    "InvertibleNet",
    "LossWeights",
    "PrisModel",
    "StepPlan",
    "TrainPlan",
    "Trainer",
    "dwt",
    "evaluate",
    "gaf",
    "iwt",
    "psnr",
    "round_st",
    "__version__",
]
