import numpy as np
import pytest
import torch
from PIL import Image

from pris.model import PrisModel

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def make_image_dir(path, n=8, size=96, seed=0):
    """Smooth synthetic RGB images: low-res noise upsampled plus a gradient."""
    rng = np.random.default_rng(seed)
    path.mkdir(parents=True, exist_ok=True)
    for i in range(n):
        coarse = rng.uniform(0, 255, size=(6, 6, 3))
        img = np.array(Image.fromarray(coarse.astype(np.uint8)).resize((size, size), Image.BILINEAR))
        ramp = np.linspace(0, 60, size)[None, :, None]
        img = np.clip(img.astype(np.float64) * 0.75 + ramp, 0, 255).astype(np.uint8)
        Image.fromarray(img).save(path / f"img_{i:02d}.png")
    return path


@pytest.fixture(scope="session")
def image_dir(tmp_path_factory):
    return make_image_dir(tmp_path_factory.mktemp("images"))


@pytest.fixture
def tiny_model():
    torch.manual_seed(0)
    return PrisModel(n_blocks=2, growth=4, n_layers=3)


def randomize_(model, scale=0.05, seed=0):
    """Give every parameter (including zero-initialized final convs) a small
    random value so invertibility tests exercise a generic network."""
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for p in model.parameters():
            p.add_(torch.randn(p.shape, generator=gen) * scale)
    return model
