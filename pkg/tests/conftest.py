import numpy as np
import pytest

from odlae.numerics import make_rng


def jitter_params(model, rng: np.random.Generator, scale: float = 0.2) -> None:
    """Nudge every parameter (biases included) so no ReLU pre-activation sits
    exactly on the kink, where central differences are meaningless."""
    for p in model.parameters().values():
        p += rng.uniform(-scale, scale, size=p.shape)


def min_abs_preactivation(model, x) -> float:
    bundle = model._forward(np.asarray(x, dtype=np.float64), np.asarray(x, dtype=np.float64))
    trace = bundle.trace
    return min(float(np.abs(u).min()) for u in list(trace.enc_pre) + list(trace.dec_pre))


def total_loss_value(model, x, y) -> float:
    l_re, l_pre = model.losses(x, y)
    return model.tradeoff.recon_weight * l_re + model.tradeoff.pred_weight * l_pre


def fd_worst_rel_error(model, x, y, eps: float = 1e-4) -> float:
    """Max relative error between analytic gradients and central differences
    of the total loss, over every entry of every parameter tensor."""
    _, grads = model.gradients(x, y)
    worst = 0.0
    for name, p in model.parameters().items():
        flat = p.reshape(-1)
        g = grads[name].reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + eps
            up = total_loss_value(model, x, y)
            flat[i] = orig - eps
            down = total_loss_value(model, x, y)
            flat[i] = orig
            numeric = (up - down) / (2.0 * eps)
            if abs(numeric) < 1e-10 and abs(g[i]) < 1e-10:
                continue
            worst = max(worst, abs(numeric - g[i]) / max(1e-8, abs(numeric), abs(g[i])))
    return worst


@pytest.fixture
def rng():
    return make_rng(20260809)
