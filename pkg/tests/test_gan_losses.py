import math

import numpy as np
import pytest
import torch

from iterdraw.gan.losses import aux_bce, d_hinge_loss, g_hinge_loss, gradient_penalty


def scalar_hinge_oracle(s_real, s_fake, s_wrong):
    """Independent scalar-loop reference for the discriminator hinge."""
    def mean(xs):
        return sum(xs) / len(xs)
    real = mean([max(0.0, 1.0 - s) for s in s_real])
    fake = mean([max(0.0, 1.0 + s) for s in s_fake])
    wrong = mean([max(0.0, 1.0 + s) for s in s_wrong])
    return real + 0.5 * (fake + wrong)


def scalar_bce_oracle(ys, ps, eps=1e-7):
    total = 0.0
    for y, p in zip(ys, ps):
        p = min(max(p, eps), 1.0 - eps)
        total += -(y * math.log(p) + (1.0 - y) * math.log(1.0 - p))
    return total


# ---- d_hinge_loss -----------------------------------------------------------

def t(*values):
    return torch.tensor(values, dtype=torch.float64)


def test_d_hinge_all_margins_satisfied():
    assert float(d_hinge_loss(t(1.5), t(-1.5), t(-1.5))) == pytest.approx(0.0)


def test_d_hinge_real_margin_violated():
    assert float(d_hinge_loss(t(0.2), t(-1.5), t(-1.5))) == pytest.approx(0.8)


def test_d_hinge_all_zero():
    assert float(d_hinge_loss(t(0.0), t(0.0), t(0.0))) == pytest.approx(2.0)


def test_d_hinge_matches_scalar_oracle_on_random_batches():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        real = rng.normal(size=n)
        fake = rng.normal(size=n)
        wrong = rng.normal(size=n)
        ours = float(d_hinge_loss(torch.tensor(real), torch.tensor(fake),
                                  torch.tensor(wrong)))
        assert ours == pytest.approx(scalar_hinge_oracle(real, fake, wrong),
                                     abs=1e-9)


# ---- g_hinge_loss -----------------------------------------------------------

def test_g_hinge_no_aux():
    assert float(g_hinge_loss(t(0.5), 0.0)) == pytest.approx(-0.5)


def test_g_hinge_with_aux():
    assert float(g_hinge_loss(t(0.5), 0.1, beta=20)) == pytest.approx(1.5)


def test_g_hinge_beta_zero_is_pure_adversarial():
    assert float(g_hinge_loss(t(0.5), 0.7, beta=0.0)) == pytest.approx(-0.5)


def test_g_hinge_batch_mean():
    assert float(g_hinge_loss(t(1.0, -3.0), 0.0)) == pytest.approx(1.0)


# ---- aux_bce ----------------------------------------------------------------

def test_aux_bce_perfect_prediction_near_zero():
    y = torch.tensor([1.0, 0.0, 1.0], dtype=torch.float64)
    assert float(aux_bce(y, y)) <= 3 * 1.01e-7


def test_aux_bce_half_probability_is_ln2():
    val = float(aux_bce(torch.tensor([1.0]), torch.tensor([0.5])))
    assert val == pytest.approx(0.6931471805599453, abs=1e-7)


def test_aux_bce_matches_loop_oracle_length_24():
    rng = np.random.default_rng(3)
    for _ in range(20):
        y = rng.integers(0, 2, size=24).astype(np.float64)
        p = rng.uniform(0.001, 0.999, size=24)
        ours = float(aux_bce(torch.tensor(y), torch.tensor(p)))
        assert ours == pytest.approx(scalar_bce_oracle(y, p), abs=1e-9)


def test_aux_bce_batched_is_mean_of_examples():
    y = torch.tensor([[1.0, 0.0], [0.0, 1.0]])
    p = torch.tensor([[0.9, 0.2], [0.3, 0.7]])
    per = [float(aux_bce(y[i], p[i])) for i in range(2)]
    assert float(aux_bce(y, p)) == pytest.approx(sum(per) / 2, abs=1e-7)


def test_aux_bce_saturated_probs_clamped_finite():
    y = torch.tensor([1.0, 0.0])
    p = torch.tensor([0.0, 1.0])
    assert math.isfinite(float(aux_bce(y, p)))


# ---- gradient_penalty -------------------------------------------------------

def test_gp_constant_function_is_zero():
    x = torch.randn(4, 3, dtype=torch.float64)
    gp = gradient_penalty(lambda v: torch.ones(v.shape[0], dtype=v.dtype), x)
    assert float(gp) == pytest.approx(0.0)


def test_gp_linear_function_analytic():
    torch.manual_seed(0)
    w = torch.randn(6, dtype=torch.float64)
    x = torch.randn(5, 6, dtype=torch.float64)
    gp = gradient_penalty(lambda v: v @ w, x, gamma=10.0)
    assert float(gp) == pytest.approx(5.0 * float(w.pow(2).sum()), rel=1e-9)


def finite_difference_gp(fn, x, gamma, eps=1e-5):
    """Central finite-difference estimate of (gamma/2) * mean ||grad||^2."""
    n, dim = x.shape
    total = 0.0
    for i in range(n):
        sq = 0.0
        for j in range(dim):
            plus = x.clone()
            minus = x.clone()
            plus[i, j] += eps
            minus[i, j] -= eps
            sq += (((fn(plus)[i] - fn(minus)[i]) / (2 * eps)) ** 2).item()
        total += sq
    return 0.5 * gamma * total / n


def test_gp_matches_finite_differences_two_layer_net():
    torch.manual_seed(1)
    net = torch.nn.Sequential(
        torch.nn.Linear(6, 16), torch.nn.Tanh(), torch.nn.Linear(16, 1),
    ).double()

    def fn(v):
        return net(v).squeeze(1)

    rng = np.random.default_rng(2)
    x = torch.tensor(rng.normal(size=(4, 6)))
    ours = float(gradient_penalty(fn, x, gamma=10.0).detach())
    ref = finite_difference_gp(fn, x, gamma=10.0)
    assert ours == pytest.approx(ref, rel=1e-3)
