import pytest
import torch

from pris.wavelet import dwt, iwt


def test_constant_image_goes_to_ll_only():
    c = 0.3
    x = torch.full((1, 3, 8, 8), c)
    f = dwt(x)
    ll, rest = f[:, :3], f[:, 3:]
    assert torch.allclose(ll, torch.full_like(ll, 2 * c), atol=1e-6)
    assert rest.abs().max() < 1e-6


def test_2x2_block_closed_form():
    a, b, c, d = 1.0, 2.0, 3.0, 5.0
    x = torch.tensor([[a, b], [c, d]]).view(1, 1, 2, 2)
    f = dwt(x).view(4)
    expected = torch.tensor(
        [(a + b + c + d) / 2, (a - b + c - d) / 2, (a + b - c - d) / 2, (a - b - c + d) / 2]
    )
    assert torch.allclose(f, expected, atol=1e-6)


def test_zero_image():
    assert dwt(torch.zeros(2, 3, 4, 4)).abs().max() == 0
    assert iwt(torch.zeros(2, 12, 2, 2)).abs().max() == 0


def test_perfect_reconstruction():
    torch.manual_seed(0)
    x = torch.rand(3, 3, 32, 32)
    assert (iwt(dwt(x)) - x).abs().max() <= 1e-6


def test_ll_only_inverts_to_constant():
    f = torch.zeros(1, 4, 4, 4)
    f[:, 0] = 0.8
    x = iwt(f)
    assert torch.allclose(x, torch.full_like(x, 0.4), atol=1e-6)


def test_orthonormality():
    torch.manual_seed(1)
    x = torch.rand(2, 3, 16, 16)
    assert abs(dwt(x).norm().item() - x.norm().item()) <= 1e-5 * x.norm().item()


def test_linearity():
    torch.manual_seed(2)
    x, y = torch.rand(1, 3, 8, 8), torch.rand(1, 3, 8, 8)
    lhs = dwt(1.7 * x - 0.4 * y)
    rhs = 1.7 * dwt(x) - 0.4 * dwt(y)
    assert (lhs - rhs).abs().max() <= 1e-6


def test_odd_dims_rejected():
    with pytest.raises(ValueError):
        dwt(torch.zeros(1, 3, 7, 8))
    with pytest.raises(ValueError):
        dwt(torch.zeros(1, 3, 8, 9))


def test_bad_channel_count_rejected():
    with pytest.raises(ValueError):
        iwt(torch.zeros(1, 6, 4, 4))
