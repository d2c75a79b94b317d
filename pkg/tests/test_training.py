import numpy as np
import pytest
import torch

from conftest import randomize_

from pris.data import ImageFolderDataset
from pris.distortion import DistortionSpec
from pris.errors import TrainingAborted
from pris.model import PrisModel
from pris.training import (
    LossWeights,
    StepPlan,
    TrainPlan,
    Trainer,
    joint_plan,
    loss_c,
    loss_s,
    lr_at,
    three_step_plan,
    total_loss,
)


def tiny_plan(steps, seed=0):
    return TrainPlan(steps=steps, batch_size=2, crop_size=32, seed=seed)


def make_trainer(image_dir, steps, seed=0, **model_kw):
    torch.manual_seed(seed)
    model = PrisModel(n_blocks=2, growth=4, n_layers=3, **model_kw)
    data = ImageFolderDataset(image_dir, crop_size=32, split="train")
    return Trainer(model, tiny_plan(steps, seed), data)


# ----------------------------------------------------------------------- losses

def test_loss_zero_for_identical():
    x = torch.rand(2, 3, 8, 8)
    assert loss_c(x, x).item() == 0


def test_loss_single_pixel():
    a = torch.zeros(1, 1, 2, 2)
    b = a.clone()
    b[0, 0, 0, 0] = 0.5
    assert abs(loss_c(a, b).item() - 0.25) < 1e-7


def test_loss_batch_mean_invariant_under_duplication():
    x = torch.rand(1, 3, 8, 8)
    y = torch.rand(1, 3, 8, 8)
    single = loss_c(x, y).item()
    doubled = loss_c(x.repeat(2, 1, 1, 1), y.repeat(2, 1, 1, 1)).item()
    assert abs(single - doubled) < 1e-5


def test_loss_shape_mismatch():
    with pytest.raises(ValueError):
        loss_s(torch.zeros(1, 3, 4, 4), torch.zeros(1, 3, 8, 8))


def test_total_loss_weighted_sum():
    w = LossWeights(1.0, 1.0)
    assert total_loss(w, 2.0, 3.0) == 5.0
    assert total_loss(LossWeights(0.0, 1.0), 100.0, 3.0) == 3.0


def test_loss_weights_validated():
    with pytest.raises(ValueError):
        LossWeights(0.0, 0.0)
    with pytest.raises(ValueError):
        LossWeights(-1.0, 2.0)


# --------------------------------------------------------------------- schedule

def test_lr_halves_every_period():
    assert lr_at(1e-3, 0, 200) == 1e-3
    assert lr_at(1e-3, 199, 200) == 1e-3
    assert lr_at(1e-3, 200, 200) == 5e-4
    assert lr_at(1e-3, 400, 200) == 2.5e-4


def test_three_step_plan_structure():
    steps = three_step_plan([DistortionSpec("identity")])
    assert [s.step for s in steps] == [1, 2, 3]
    assert steps[0].trainable_groups == ("inn",)
    assert steps[0].use_enhance is False
    assert steps[1].trainable_groups == ("pre_enhance", "post_enhance")
    assert set(steps[2].trainable_groups) == {"inn", "pre_enhance", "post_enhance"}
    assert steps[0].initial_lr == pytest.approx(10**-4.5)
    assert steps[2].initial_lr == pytest.approx(10**-5.5)


def test_joint_plan_single_step():
    steps = joint_plan([DistortionSpec("identity")], epochs=5)
    assert len(steps) == 1
    assert set(steps[0].trainable_groups) == {"inn", "pre_enhance", "post_enhance"}


# ----------------------------------------------------------------- training loop

def snapshot(params):
    return [p.detach().clone() for p in params]


def bitwise_equal(a, b):
    return all(torch.equal(x, y) for x, y in zip(a, b))


def test_step2_freezes_inn(image_dir):
    sp = StepPlan(2, 2, 1e-3, trainable_groups=("pre_enhance", "post_enhance"),
                  distortions=[DistortionSpec("gaussian", sigma=10)])
    tr = make_trainer(image_dir, [sp])
    # simulate a step-1-trained backbone; a zero-init INN leaves the secret
    # branch uncoupled from the host branch and the pre-enhancer gradient-free
    randomize_(tr.model.inn, scale=0.05, seed=0)
    before = snapshot(tr.model.group_parameters("inn"))
    before_enh = snapshot(tr.model.group_parameters("pre_enhance"))
    tr.run_step(sp)
    assert bitwise_equal(before, tr.model.group_parameters("inn"))
    assert not bitwise_equal(before_enh, tr.model.group_parameters("pre_enhance"))


def test_step1_freezes_enhancers(image_dir):
    sp = StepPlan(1, 2, 1e-3, trainable_groups=("inn",), use_enhance=False)
    tr = make_trainer(image_dir, [sp])
    before_pre = snapshot(tr.model.group_parameters("pre_enhance"))
    before_post = snapshot(tr.model.group_parameters("post_enhance"))
    before_inn = snapshot(tr.model.group_parameters("inn"))
    tr.run_step(sp)
    assert bitwise_equal(before_pre, tr.model.group_parameters("pre_enhance"))
    assert bitwise_equal(before_post, tr.model.group_parameters("post_enhance"))
    assert not bitwise_equal(before_inn, tr.model.group_parameters("inn"))


def test_loss_decreases_on_smoke_run(image_dir):
    sp = StepPlan(1, 8, 1e-3, trainable_groups=("inn",), use_enhance=False)
    tr = make_trainer(image_dir, [sp], seed=1)
    tr.run_step(sp)
    first = tr.history[0]["L"]
    last = tr.history[-1]["L"]
    assert last < first


def test_determinism_identical_histories(image_dir):
    sp = StepPlan(1, 2, 1e-3, trainable_groups=("inn",), use_enhance=False,
                  distortions=[DistortionSpec("gaussian", sigma=5)])
    t1 = make_trainer(image_dir, [sp], seed=3)
    t1.run_step(sp)
    t2 = make_trainer(image_dir, [sp], seed=3)
    t2.run_step(sp)
    assert t1.history == t2.history


def test_grad_mode_zero_blocks_embedding_signal(image_dir):
    """With round-gradient zero, no secret-loss signal reaches the embedding:
    parameter gradients equal those of a pipeline with the container detached."""
    tr = make_trainer(image_dir, [], seed=4, use_pre=False, use_post=False)
    model = randomize_(tr.model, scale=0.05, seed=4)  # generic coupling, not zero-init
    data = tr.data
    rng = np.random.default_rng(0)
    xh = data.batch([0, 1], rng)
    xs = data.batch([2, 3], rng)

    def ls_grads(mode, detach_container):
        model.zero_grad()
        container, _ = model.embed(xh, xs)
        if detach_container:
            container = container.detach()
        from pris.distortion import round_st

        xd = round_st(container, mode)
        z = model.sample_latent(xh, generator=torch.Generator().manual_seed(0))
        _, extracted = model.extract(xd, z, use_enhance=False)
        loss_s(xs, extracted).backward()
        return [
            torch.zeros_like(p) if p.grad is None else p.grad.detach().clone()
            for p in model.group_parameters("inn")
        ]

    zero_full = ls_grads("zero", detach_container=False)
    zero_detached = ls_grads("zero", detach_container=True)
    assert all(torch.equal(a, b) for a, b in zip(zero_full, zero_detached))

    gaf_full = ls_grads("gaf", detach_container=False)
    gaf_detached = ls_grads("gaf", detach_container=True)
    assert any(not torch.equal(a, b) for a, b in zip(gaf_full, gaf_detached))


def test_nan_loss_aborts(image_dir):
    sp = StepPlan(1, 1, 1e-3, trainable_groups=("inn",), use_enhance=False)
    tr = make_trainer(image_dir, [sp], seed=5)
    with torch.no_grad():
        tr.model.inn.blocks[0].f.final.weight.fill_(float("nan"))
    with pytest.raises(TrainingAborted):
        tr.run_step(sp)


def test_distortion_sampling_roughly_uniform():
    # level-4 batches draw specs uniformly from the active set
    specs = [DistortionSpec("identity"), DistortionSpec("round"),
             DistortionSpec("gaussian", sigma=10)]
    rng = np.random.default_rng(0)
    counts = np.zeros(len(specs))
    n = 3000
    for _ in range(n):
        counts[int(rng.integers(len(specs)))] += 1
    assert np.all(np.abs(counts / n - 1 / 3) < 0.1 / 3)


def test_finetune_enhancers_adds_label_and_freezes_inn(image_dir):
    tr = make_trainer(image_dir, [], seed=6)
    before = snapshot(tr.model.group_parameters("inn"))
    tr.finetune_enhancers("gauss10", DistortionSpec("gaussian", sigma=10), epochs=1,
                          initial_lr=1e-3)
    assert "gauss10" in tr.model.pre_enhancers
    assert "gauss10" in tr.model.post_enhancers
    assert bitwise_equal(before, tr.model.group_parameters("inn"))


def test_metrics_log_schema(image_dir, tmp_path):
    import json

    sp = StepPlan(1, 2, 1e-3, trainable_groups=("inn",), use_enhance=False)
    torch.manual_seed(0)
    model = PrisModel(n_blocks=1, growth=4, n_layers=3)
    data = ImageFolderDataset(image_dir, crop_size=32, split="train")
    log = tmp_path / "metrics.jsonl"
    tr = Trainer(model, tiny_plan([sp]), data, log_path=log)
    tr.run_step(sp)
    lines = log.read_text().strip().splitlines()
    assert len(lines) == 2
    rec = json.loads(lines[0])
    assert set(rec) == {"step", "epoch", "lr", "L", "L_c", "L_s", "psnr_c", "psnr_s"}
