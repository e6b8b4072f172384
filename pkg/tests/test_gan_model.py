import numpy as np
import pytest
import torch
from torch import nn

from iterdraw.gan.config import ABLATIONS, ModelDims
from iterdraw.gan.discriminator import Discriminator, PairEncoder, fuse_features
from iterdraw.gan.generator import CanvasEncoder
from iterdraw.gan.layers import ConditionalBatchNorm2d, SelfAttention
from iterdraw.gan.model import DrawerModel

from conftest import make_tiny_model


def rand_image(side, batch=2, seed=0):
    g = torch.Generator().manual_seed(seed)
    return torch.rand(batch, 3, side, side, generator=g) * 2 - 1


# ---- canvas encoder ---------------------------------------------------------

def test_canvas_encoder_full_scale_shape():
    torch.manual_seed(0)
    enc = CanvasEncoder(ModelDims())
    out = enc(rand_image(128, 1))
    assert out.shape == (1, 128, 16, 16)


def test_canvas_encoder_scaled_shape():
    torch.manual_seed(0)
    enc = CanvasEncoder(ModelDims.scaled(image_side=64, n_g=128))
    out = enc(rand_image(64, 1))
    assert out.shape == (1, 128, 8, 8)


def test_canvas_encoder_eval_deterministic(tiny_dims):
    torch.manual_seed(0)
    enc = CanvasEncoder(tiny_dims)
    enc.eval()
    x = rand_image(32)
    assert torch.equal(enc(x), enc(x))


def test_canvas_encoder_rejects_wrong_shape(tiny_dims):
    enc = CanvasEncoder(tiny_dims)
    with pytest.raises(ValueError):
        enc(rand_image(64))


# ---- generator --------------------------------------------------------------

def test_generate_step_shape_and_range(tiny_model, tiny_dims):
    torch.manual_seed(0)
    tiny_model.eval()
    z = torch.randn(2, tiny_dims.n_z)
    h = torch.randn(2, tiny_dims.n_c)
    c = torch.randn(2, tiny_dims.n_c)
    f = tiny_model.encode_canvas(rand_image(32))
    img = tiny_model.generate_step(z, c, h, f)
    assert img.shape == (2, 3, 32, 32)
    assert img.min() >= -1.0 and img.max() <= 1.0


def test_generate_step_eval_deterministic(tiny_model, tiny_dims):
    tiny_model.eval()
    z = torch.randn(1, tiny_dims.n_z)
    h = torch.randn(1, tiny_dims.n_c)
    c = torch.randn(1, tiny_dims.n_c)
    f = tiny_model.encode_canvas(rand_image(32, 1))
    assert torch.equal(tiny_model.generate_step(z, c, h, f),
                       tiny_model.generate_step(z, c, h, f))


def test_generator_conditioning_not_degenerate(tiny_model, tiny_dims):
    """Perturbing the context changes the image with z and f fixed."""
    tiny_model.eval()
    torch.manual_seed(1)
    z = torch.randn(1, tiny_dims.n_z)
    c = torch.randn(1, tiny_dims.n_c)
    h1 = torch.randn(1, tiny_dims.n_c)
    h2 = h1 + torch.randn(1, tiny_dims.n_c)
    f = tiny_model.encode_canvas(rand_image(32, 1))
    img1 = tiny_model.generate_step(z, c, h1, f)
    img2 = tiny_model.generate_step(z, c, h2, f)
    assert float((img1 - img2).pow(2).sum()) > 0.0


def test_generator_without_prior_has_no_canvas_encoder(tiny_dims, tiny_table):
    model = make_tiny_model(tiny_dims, tiny_table, "baseline")
    assert model.canvas_encoder is None
    assert model.encode_canvas(rand_image(32)) is None
    z = torch.randn(1, tiny_dims.n_z)
    h = torch.randn(1, tiny_dims.n_c)
    c = torch.randn(1, tiny_dims.n_c)
    img = model.generate_step(z, c, h, None)
    assert img.shape == (1, 3, 32, 32)


# ---- fusion -----------------------------------------------------------------

def test_fuse_subtract_identical_inputs_zero(tiny_model):
    tiny_model.eval()  # power iterations would perturb weights between calls
    x = rand_image(32)
    fused = tiny_model.fuse_pair(x, x)
    assert torch.allclose(fused, torch.zeros_like(fused), atol=1e-6)


def test_fuse_subtract_antisymmetry(tiny_dims, tiny_table):
    model = make_tiny_model(tiny_dims, tiny_table, "dsubtract")
    model.eval()
    a = rand_image(32, seed=1)
    b = rand_image(32, seed=2)
    assert torch.allclose(model.fuse_pair(a, b), -model.fuse_pair(b, a),
                          atol=1e-6)


def test_fuse_concat_channel_count(tiny_dims, tiny_table):
    model = make_tiny_model(tiny_dims, tiny_table, "dconcat")
    fused = model.fuse_pair(rand_image(32, seed=1), rand_image(32, seed=2))
    assert fused.shape[1] == 2 * tiny_dims.n_d


def test_fuse_none_encodes_current_only(tiny_dims, tiny_table):
    model = make_tiny_model(tiny_dims, tiny_table, "baseline")
    model.eval()
    a = rand_image(32, seed=1)
    fused1 = model.fuse_pair(a, rand_image(32, seed=2))
    fused2 = model.fuse_pair(a, rand_image(32, seed=3))
    assert torch.equal(fused1, fused2)
    assert fused1.shape[1] == tiny_dims.n_d


def test_fuse_features_validates_mode_and_shapes():
    a = torch.randn(1, 4, 2, 2)
    with pytest.raises(ValueError):
        fuse_features(a, a, "blend")
    with pytest.raises(ValueError):
        fuse_features(a, torch.randn(1, 3, 2, 2), "subtract")
    with pytest.raises(ValueError):
        fuse_features(a, None, "concat")


# ---- discriminator ----------------------------------------------------------

def test_discriminate_output_shapes(tiny_model, tiny_dims):
    fused = tiny_model.fuse_pair(rand_image(32, seed=1), rand_image(32, seed=2))
    score, aux = tiny_model.discriminate(fused, torch.randn(2, tiny_dims.n_c))
    assert score.shape == (2,)
    assert aux.shape == (2, tiny_dims.num_classes)
    assert torch.isfinite(score).all() and torch.isfinite(aux).all()


def test_projection_zero_condition_reduces_to_unconditional(tiny_model,
                                                            tiny_dims):
    tiny_model.eval()
    fused = tiny_model.fuse_pair(rand_image(32, seed=1), rand_image(32, seed=2))
    disc = tiny_model.discriminator
    phi = disc.pooled_features(fused)
    score = disc.score_from_features(phi, torch.zeros(2, tiny_dims.n_c))
    uncond = disc.score_head(phi).squeeze(1)
    assert torch.allclose(score, uncond, atol=1e-6)


def test_projection_bilinearity(tiny_model, tiny_dims):
    """score(phi, h1) - score(phi, h2) == (V(h1-h2)) . phi"""
    tiny_model.eval()
    fused = tiny_model.fuse_pair(rand_image(32, seed=3), rand_image(32, seed=4))
    disc = tiny_model.discriminator
    phi = disc.pooled_features(fused)
    h1 = torch.randn(2, tiny_dims.n_c)
    h2 = torch.randn(2, tiny_dims.n_c)
    lhs = disc.score_from_features(phi, h1) - disc.score_from_features(phi, h2)
    rhs = (disc.projection(h1 - h2) * phi).sum(dim=1)
    assert torch.allclose(lhs, rhs, atol=1e-4)


# ---- conditional batch norm ---------------------------------------------------

def test_cbn_at_identity_equals_plain_batchnorm():
    torch.manual_seed(0)
    cbn = ConditionalBatchNorm2d(8, 16)
    plain = nn.BatchNorm2d(8, affine=False)
    with torch.no_grad():  # force the conditioning maps to gain 1, bias 0
        cbn.gain.weight.zero_()
        cbn.bias.weight.zero_()
    x = torch.randn(4, 8, 5, 5)
    h = torch.randn(4, 16)
    assert torch.equal(cbn(x, h), plain(x))


def test_cbn_gains_scale_channels():
    torch.manual_seed(0)
    cbn = ConditionalBatchNorm2d(4, 8)
    cbn.eval()
    x = torch.randn(2, 4, 3, 3)
    h = torch.randn(2, 8)
    with torch.no_grad():
        cbn.gain.weight.normal_()
    out1 = cbn(x, h)
    out2 = cbn(x, 2 * h)
    assert not torch.allclose(out1, out2)


# ---- self-attention -----------------------------------------------------------

def test_self_attention_identity_at_zero_scale():
    torch.manual_seed(0)
    attn = SelfAttention(8)
    x = torch.randn(2, 8, 6, 6)
    assert torch.equal(attn(x), x)


def test_self_attention_changes_output_when_scaled():
    torch.manual_seed(0)
    attn = SelfAttention(8)
    with torch.no_grad():
        attn.gamma.fill_(0.5)
    x = torch.randn(2, 8, 6, 6)
    assert not torch.allclose(attn(x), x)


# ---- spectral normalization ----------------------------------------------------

def spectral_weights(module):
    for submodule in module.modules():
        if hasattr(submodule, "parametrizations") and \
                "weight" in getattr(submodule, "parametrizations", {}):
            yield submodule.weight


def test_spectral_norm_sigma_one_after_power_iterations(tiny_dims, tiny_table):
    model = make_tiny_model(tiny_dims, tiny_table, "dsubtract")
    model.train()
    x_t = rand_image(32, seed=5)
    x_p = rand_image(32, seed=6)
    h = torch.randn(2, tiny_dims.n_c)
    with torch.no_grad():
        for _ in range(50):  # one power iteration per forward pass
            model.discriminate(model.fuse_pair(x_t, x_p), h)
    model.eval()
    count = 0
    for module in (model.discriminator, model.pair_encoder):
        for weight in spectral_weights(module):
            sigma = np.linalg.svd(
                weight.detach().reshape(weight.shape[0], -1).numpy(),
                compute_uv=False)[0]
            assert sigma == pytest.approx(1.0, abs=1e-2)
            count += 1
    assert count >= 8  # every discriminator-side layer is normalized


def test_ablation_lattice_matches_feature_table():
    """The seven variants enable exactly the documented feature sets."""
    expected = {
        # name: (wrong, gprior, aux, fusion, iterative)
        "baseline": (False, False, False, "none", True),
        "mismatch": (True, False, False, "none", True),
        "gprior": (True, True, False, "none", True),
        "aux": (True, True, True, "none", True),
        "dconcat": (True, True, True, "concat", True),
        "dsubtract": (True, True, True, "subtract", True),
        "noniterative": (True, False, False, "none", False),
    }
    assert set(ABLATIONS) == set(expected)
    for name, (wrong, gprior, aux, fusion, iterative) in expected.items():
        cfg = ABLATIONS[name]
        assert cfg.use_wrong_loss == wrong, name
        assert cfg.use_gprior == gprior, name
        assert cfg.use_aux == aux, name
        assert cfg.fusion == fusion, name
        assert cfg.iterative == iterative, name


def test_model_rejects_mismatched_embedding_dim(tiny_dims):
    from iterdraw.text.embeddings import random_table
    bad_table = random_table(["a"], dim=7, seed=0)
    with pytest.raises(ValueError):
        DrawerModel(tiny_dims, ABLATIONS["baseline"], bad_table)
