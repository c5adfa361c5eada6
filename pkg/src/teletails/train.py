"""Minibatch Adam training loop over tape-built objectives.

Models plug in through a small protocol: `param_arrays` /
`set_param_arrays` move flat lists of arrays in and out,
`objective_graph(batch, aux)` builds the scalar loss together with its
parameter leaves, and `draw_aux(rng, batch_size)` supplies whatever
per-batch randomness the objective needs (noise draws for sample-based
losses, None for likelihoods).
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import NumericError


@dataclass(frozen=True)
class TrainConfig:
    n_epochs: int
    batch_size: int = 100
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.n_epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch size must be positive")
        if not (self.lr > 0.0 and self.eps > 0.0):
            raise ValueError("lr and eps must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")


@dataclass(frozen=True)
class AdamState:
    step: int
    m: list
    v: list


def adam_init(params):
    return AdamState(0, [np.zeros_like(p) for p in params],
                     [np.zeros_like(p) for p in params])


def adam_step(state, params, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected update; returns new params and state."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("parameter, gradient and state lists must align")
    t = state.step + 1
    new_m, new_v, out = [], [], []
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        out.append(p - lr * (m / c1) / (np.sqrt(v / c2) + eps))
        new_m.append(m)
        new_v.append(v)
    return out, AdamState(t, new_m, new_v)


def _batches(n, batch_size, order):
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train(model, data, config, callback=None, shuffle_fn=None):
    """Run the loop; returns the per-epoch mean batch loss.

    `shuffle_fn(epoch, n) -> order` overrides the built-in epoch
    shuffling when supplied; the default derives one child seed per
    epoch so runs are reproducible from `config.seed` alone.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("training data must be a non-empty matrix")
    n = data.shape[0]
    params = [np.asarray(p, dtype=float) for p in model.param_arrays()]
    state = adam_init(params)
    history = []
    for epoch in range(config.n_epochs):
        if shuffle_fn is None:
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=config.seed,
                                       spawn_key=(0, epoch)))
            order = rng.permutation(n)
        else:
            order = np.asarray(shuffle_fn(epoch, n), dtype=int)
        losses = []
        for b_idx, rows in enumerate(_batches(n, config.batch_size, order)):
            aux_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=config.seed,
                                       spawn_key=(1, epoch, b_idx)))
            aux = model.draw_aux(aux_rng, len(rows))
            model.set_param_arrays(params)
            loss, leaves = model.objective_graph(data[rows], aux)
            loss_val = float(ad.value_of(loss))
            if not np.isfinite(loss_val):
                raise NumericError(
                    f"non-finite loss at epoch {epoch}, batch {b_idx}")
            ad.backward(loss)
            grads = [leaf.grad for leaf in leaves]
            if any(not np.all(np.isfinite(g)) for g in grads):
                raise NumericError(
                    f"non-finite gradient at epoch {epoch}, batch {b_idx}")
            params, state = adam_step(state, params, grads, config.lr,
                                      config.beta1, config.beta2, config.eps)
            losses.append(loss_val)
        history.append(float(np.mean(losses)))
        if callback is not None:
            callback(epoch, history[-1])
    model.set_param_arrays(params)
    if hasattr(model, "train_seed"):
        model.train_seed = config.seed
        model.train_epochs = config.n_epochs
    return history


def gradient_check(model, batch, aux=None, step=1e-4, max_entries=None,
                   seed=0):
    """Worst relative error of tape gradients against central differences.

    Checks every entry of every parameter array unless `max_entries`
    caps the per-array count, in which case entries are subsampled at
    random. The relative error uses an absolute floor so near-zero
    derivatives do not blow the ratio up.
    """
    batch = np.asarray(batch, dtype=float)
    loss, leaves = model.objective_graph(batch, aux)
    ad.backward(loss)
    grads = [leaf.grad.copy() for leaf in leaves]
    arrays = model.param_arrays()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    worst = 0.0
    for arr, grad in zip(arrays, grads):
        flat_idx = np.arange(arr.size)
        if max_entries is not None and arr.size > max_entries:
            flat_idx = rng.choice(arr.size, size=max_entries, replace=False)
        flat = arr.reshape(-1)
        for k in flat_idx:
            orig = flat[k]
            flat[k] = orig + step
            up = float(ad.value_of(model.objective_graph(batch, aux)[0]))
            flat[k] = orig - step
            down = float(ad.value_of(model.objective_graph(batch, aux)[0]))
            flat[k] = orig
            numeric = (up - down) / (2.0 * step)
            got = grad.reshape(-1)[k]
            denom = max(abs(numeric), abs(got), 1e-3)
            worst = max(worst, abs(got - numeric) / denom)
    return worst
