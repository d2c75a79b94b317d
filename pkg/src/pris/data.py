"""Dataset ingestion: a directory of images with train/test cropping rules."""

from pathlib import Path

import numpy as np
import torch
from PIL import Image

IMAGE_EXTENSIONS = (".png", ".bmp", ".tif", ".tiff", ".ppm", ".jpg", ".jpeg")


def to_tensor(arr: np.ndarray) -> torch.Tensor:
    """HWC uint8 -> CHW float32 in [0,1]."""
    return torch.from_numpy(arr.astype(np.float32) / 255.0).permute(2, 0, 1)


def to_uint8(x: torch.Tensor) -> np.ndarray:
    """CHW float tensor in [0,1] -> HWC uint8 (round half away from zero)."""
    arr = x.detach().cpu().numpy()
    arr = np.clip(arr, 0.0, 1.0) * 255.0
    arr = np.floor(arr + 0.5)  # values are nonnegative after the clip
    return arr.astype(np.uint8).transpose(1, 2, 0)


def load_image(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"))


def save_image(path, arr: np.ndarray) -> None:
    Image.fromarray(arr).save(path)


class ImageFolderDataset:
    """Images from a directory, cropped per split.

    Train split uses random crops (reseeded per epoch by the caller),
    test split uses deterministic center crops.
    """

    def __init__(self, root, crop_size: int = 64, split: str = "train"):
        if split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {split!r}")
        self.root = Path(root)
        self.crop_size = crop_size
        self.split = split
        if not self.root.is_dir():
            raise FileNotFoundError(f"dataset directory not found: {self.root}")
        self.paths = sorted(
            p for p in self.root.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS
        )
        if not self.paths:
            raise ValueError(f"no images found in {self.root}")
        self._cache: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.paths)

    def _full(self, idx: int) -> np.ndarray:
        if idx not in self._cache:
            arr = load_image(self.paths[idx])
            h, w = arr.shape[:2]
            if h < self.crop_size or w < self.crop_size:
                raise ValueError(
                    f"{self.paths[idx]} is {w}x{h}, smaller than crop size {self.crop_size}"
                )
            self._cache[idx] = arr
        return self._cache[idx]

    def get(self, idx: int, rng: np.random.Generator | None = None) -> torch.Tensor:
        arr = self._full(idx)
        h, w = arr.shape[:2]
        cs = self.crop_size
        if self.split == "train":
            if rng is None:
                rng = np.random.default_rng()
            top = int(rng.integers(0, h - cs + 1))
            left = int(rng.integers(0, w - cs + 1))
        else:
            top = (h - cs) // 2
            left = (w - cs) // 2
        return to_tensor(arr[top : top + cs, left : left + cs])

    def batch(self, indices, rng: np.random.Generator | None = None) -> torch.Tensor:
        return torch.stack([self.get(i, rng) for i in indices])
