import pytest
import torch

from conftest import randomize_
from pris.enhance import EnhanceNet
from pris.model import PrisModel


def test_zero_init_is_identity():
    torch.manual_seed(0)
    net = EnhanceNet(3, "spatial", growth=4, n_layers=3)
    x = torch.rand(2, 3, 16, 16)
    assert torch.equal(net(x), x)


def test_shape_preserved_both_domains():
    torch.manual_seed(1)
    spatial = randomize_(EnhanceNet(3, "spatial", growth=4, n_layers=3))
    freq = randomize_(EnhanceNet(3, "frequency", growth=4, n_layers=3))
    x = torch.rand(1, 3, 16, 16)
    f = torch.rand(1, 12, 8, 8)
    assert spatial(x).shape == x.shape
    assert freq(f).shape == f.shape


def test_bad_domain_rejected():
    with pytest.raises(ValueError):
        EnhanceNet(3, "fourier")


def test_model_enhance_flag_combinations():
    # all four ablation configurations construct and run
    x = torch.rand(1, 3, 16, 16)
    for pre in (False, True):
        for post in (False, True):
            torch.manual_seed(0)
            m = PrisModel(n_blocks=1, growth=4, n_layers=3, use_pre=pre, use_post=post)
            c, _ = m.embed(x, x)
            z = m.sample_latent(x, generator=torch.Generator().manual_seed(0))
            _, e = m.extract(c, z)
            assert e.shape == x.shape
            assert len(m.pre_enhancers) == (1 if pre else 0)
            assert len(m.post_enhancers) == (1 if post else 0)


def test_frequency_domain_model_runs():
    torch.manual_seed(2)
    m = PrisModel(n_blocks=1, growth=4, n_layers=3, enhance_domain="frequency")
    x = torch.rand(1, 3, 16, 16)
    c, _ = m.embed(x, x)
    z = m.sample_latent(x, generator=torch.Generator().manual_seed(0))
    _, e = m.extract(c, z)
    assert e.shape == x.shape


def test_per_attack_enhancer_sets():
    torch.manual_seed(3)
    m = PrisModel(n_blocks=1, growth=4, n_layers=3)
    m.add_enhancer_set("gauss10")
    assert "gauss10" in m.pre_enhancers and "gauss10" in m.post_enhancers
    x = torch.rand(1, 3, 16, 16)
    z = m.sample_latent(x, generator=torch.Generator().manual_seed(0))
    m.extract(x, z, attack_label="gauss10")
    with pytest.raises(KeyError):
        m.extract(x, z, attack_label="jpeg90")
