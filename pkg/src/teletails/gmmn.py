"""Moment-matching generator trained on a sample-based energy objective.

The generator is a plain fully connected ReLU stack from latent noise
to the data dimension. Its loss compares a generated batch against a
data batch through the squared energy distance, estimated with complete
pairwise distance means (diagonal terms included), so the objective is
differentiable everywhere except at exactly coincident points.
"""

import numpy as np

from . import autodiff as ad
from .dataset import PanelMatrix, SCALE_NORMAL

DEFAULT_HIDDEN = (100, 200, 400, 400, 200, 100)


def energy_distance_sq(a, b):
    """Squared energy distance between two samples of row vectors."""
    d_ab = ad.pairwise_dist(a, b)
    d_aa = ad.pairwise_dist(a, a)
    d_bb = ad.pairwise_dist(b, b)
    return ad.sub(ad.mul(ad.mean_all(d_ab), 2.0),
                  ad.add(ad.mean_all(d_aa), ad.mean_all(d_bb)))


class GmmnModel:
    """Generator parameters plus the training protocol around them."""

    def __init__(self, dim, latent_dim, hidden=None, seed=0, site_ids=None):
        if dim < 1 or latent_dim < 1:
            raise ValueError("dimensions must be positive")
        self.dim = dim
        self.latent_dim = latent_dim
        self.hidden = tuple(DEFAULT_HIDDEN if hidden is None else hidden)
        self.seed = seed
        self.site_ids = None if site_ids is None else tuple(site_ids)
        self.train_seed = None
        self.train_epochs = None
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        sizes = (latent_dim,) + self.hidden + (dim,)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            a = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-a, a, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def param_arrays(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def set_param_arrays(self, arrays):
        if len(arrays) != 2 * len(self.weights):
            raise ValueError("parameter list length mismatch")
        for i in range(len(self.weights)):
            w = np.asarray(arrays[2 * i], dtype=float)
            b = np.asarray(arrays[2 * i + 1], dtype=float)
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ValueError("parameter shape mismatch")
            self.weights[i] = w
            self.biases[i] = b

    objective_kind = "energy"

    def draw_aux(self, rng, batch_size):
        return rng.standard_normal((batch_size, self.latent_dim))

    def objective_graph(self, batch, aux):
        if aux is None:
            raise ValueError("the energy objective needs latent draws")
        leaves = [ad.leaf(p) for p in self.param_arrays()]
        x = _forward(leaves, np.asarray(aux, dtype=float))
        return energy_distance_sq(x, np.asarray(batch, dtype=float)), leaves


def _forward(flat_params, z):
    h = z
    n_layers = len(flat_params) // 2
    for i in range(n_layers):
        h = ad.add(ad.matmul(h, flat_params[2 * i]), flat_params[2 * i + 1])
        if i < n_layers - 1:
            h = ad.relu(h)
    return h


def generator_forward(model, z):
    """Push latent rows through the generator."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[1] != model.latent_dim:
        raise ValueError(f"expected shape (n, {model.latent_dim})")
    return ad.value_of(_forward(model.param_arrays(), z))


def sample(model, n, seed):
    """Draw n generated rows on the normal-score scale."""
    if n < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal((n, model.latent_dim))
    values = generator_forward(model, z)
    ids = model.site_ids if model.site_ids else tuple(
        f"c{i + 1}" for i in range(model.dim))
    return PanelMatrix(values, ids, SCALE_NORMAL)
