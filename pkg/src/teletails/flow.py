"""Autoregressive rational-quadratic spline flow on the unit hypercube.

The parameter direction of the flow maps data to noise: a sigmoid takes
normal-score data into the unit cube, a stack of masked spline layers
with fixed permutations reshapes it there, and a final logit returns to
unbounded noise coordinates. Density evaluation runs the whole stack in
one vectorised pass; sampling inverts it coordinate by coordinate.
"""

import math

import numpy as np

from . import autodiff as ad
from .dataset import PanelMatrix, SCALE_NORMAL
from .errors import NumericError

LOGIT_CLAMP = 1e-7
_LOG_2PI = math.log(2.0 * math.pi)


def _deriv_shift(min_deriv):
    # softplus offset chosen so zero raw parameters give unit slope
    return math.log(math.expm1(1.0 - min_deriv))


def _check_knots(widths, heights, derivs):
    widths = np.asarray(widths, dtype=float)
    heights = np.asarray(heights, dtype=float)
    derivs = np.asarray(derivs, dtype=float)
    if widths.shape != heights.shape or derivs.shape[-1] != widths.shape[-1] + 1:
        raise ValueError("need K widths, K heights and K + 1 derivatives")
    if np.any(widths <= 0.0) or np.any(heights <= 0.0) or np.any(derivs <= 0.0):
        raise ValueError("knot widths, heights and derivatives must be positive")
    if (np.any(np.abs(widths.sum(axis=-1) - 1.0) > 1e-8)
            or np.any(np.abs(heights.sum(axis=-1) - 1.0) > 1e-8)):
        raise ValueError("knot widths and heights must each sum to one")
    if np.any(derivs[..., 0] != 1.0) or np.any(derivs[..., -1] != 1.0):
        raise ValueError("boundary derivatives must equal one")
    return widths, heights, derivs


def _rq_spline(x, widths, heights, derivs, inverse=False):
    """Monotone rational-quadratic spline on [0, 1], elementwise.

    `x` has shape (...,); widths and heights (..., K) are positive and
    sum to one; derivs (..., K + 1) carries unit boundary entries. The
    result pairs the mapped values with the elementwise log derivative
    of the forward map (negated when inverting).
    """
    n_bins = ad.value_of(widths).shape[-1]
    zeros = np.zeros(ad.value_of(widths).shape[:-1] + (1,))

    cw_raw = ad.cumsum_last(widths)
    total_w = cw_raw[..., -1:]
    cum_w = ad.concat_last([zeros, ad.div(cw_raw, total_w)])
    w_n = ad.div(widths, total_w)
    ch_raw = ad.cumsum_last(heights)
    total_h = ch_raw[..., -1:]
    cum_h = ad.concat_last([zeros, ad.div(ch_raw, total_h)])
    h_n = ad.div(heights, total_h)
    delta = ad.div(h_n, w_n)

    ref = ad.value_of(cum_h if inverse else cum_w)
    xv = ad.value_of(x)
    idx = (xv[..., None] >= ref[..., :-1]).sum(axis=-1) - 1
    idx = np.clip(idx, 0, n_bins - 1)[..., None]

    wk = ad.gather_last(w_n, idx)
    hk = ad.gather_last(h_n, idx)
    cwk = ad.gather_last(cum_w, idx)
    chk = ad.gather_last(cum_h, idx)
    dk = ad.gather_last(delta, idx)
    d_lo = ad.gather_last(derivs, idx)
    d_hi = ad.gather_last(derivs, idx + 1)
    xe = x[..., None] if ad.is_tensor(x) else xv[..., None]
    d_sum = ad.sub(ad.add(d_lo, d_hi), ad.mul(dk, 2.0))

    if inverse:
        if ad.is_tensor(x) or ad.is_tensor(widths):
            raise ValueError("the inverse path is evaluation only")
        yk = xe - chk
        qa = yk * d_sum + hk * (dk - d_lo)
        qb = hk * d_lo - yk * d_sum
        qc = -dk * yk
        disc = np.maximum(qb * qb - 4.0 * qa * qc, 0.0)
        theta = (2.0 * qc) / (-qb - np.sqrt(disc))
        out = theta * wk + cwk
    else:
        theta = ad.div(ad.sub(xe, cwk), wk)
        out_num = ad.mul(hk, ad.add(ad.mul(dk, ad.mul(theta, theta)),
                                    ad.mul(d_lo, _one_minus_prod(theta))))
        den = ad.add(dk, ad.mul(d_sum, _one_minus_prod(theta)))
        out = ad.add(chk, ad.div(out_num, den))

    t1m = _one_minus_prod(theta)
    one_m = ad.sub(1.0, theta)
    deriv_num = ad.mul(ad.mul(dk, dk),
                       ad.add(ad.mul(d_hi, ad.mul(theta, theta)),
                              ad.add(ad.mul(ad.mul(dk, 2.0), t1m),
                                     ad.mul(d_lo, ad.mul(one_m, one_m)))))
    den = ad.add(dk, ad.mul(d_sum, t1m))
    logdet = ad.sub(ad.log(deriv_num), ad.mul(ad.log(den), 2.0))
    if inverse:
        logdet = ad.mul(logdet, -1.0)
    return out[..., 0], logdet[..., 0]


def _one_minus_prod(theta):
    return ad.mul(theta, ad.sub(1.0, theta))


def _broadcast_knots(x, widths, heights, derivs):
    # one knot set may serve a whole batch of points
    if widths.shape[:-1] == x.shape:
        return widths, heights, derivs
    try:
        widths = np.broadcast_to(widths, x.shape + widths.shape[-1:])
        heights = np.broadcast_to(heights, x.shape + heights.shape[-1:])
        derivs = np.broadcast_to(derivs, x.shape + derivs.shape[-1:])
    except ValueError as exc:
        raise ValueError("knot arrays do not match the point shape") from exc
    return widths, heights, derivs


def spline_apply(x, widths, heights, derivs):
    """Forward spline map with its elementwise log derivative."""
    widths, heights, derivs = _check_knots(widths, heights, derivs)
    x = np.asarray(x, dtype=float)
    if not np.all((x >= 0.0) & (x <= 1.0)):
        raise ValueError("spline input must lie in [0, 1]")
    widths, heights, derivs = _broadcast_knots(x, widths, heights, derivs)
    return _rq_spline(x, widths, heights, derivs, inverse=False)


def spline_invert(y, widths, heights, derivs):
    """Inverse spline map with the log derivative of the inverse."""
    widths, heights, derivs = _check_knots(widths, heights, derivs)
    y = np.asarray(y, dtype=float)
    if not np.all((y >= 0.0) & (y <= 1.0)):
        raise ValueError("spline input must lie in [0, 1]")
    widths, heights, derivs = _broadcast_knots(y, widths, heights, derivs)
    return _rq_spline(y, widths, heights, derivs, inverse=True)


def _conditioner_masks(dim, hidden):
    """Degree masks making network outputs autoregressive in the inputs."""
    in_deg = np.arange(1, dim + 1)
    hid_deg = (np.arange(hidden) % max(dim - 1, 1)) + 1
    m1 = (hid_deg[None, :] >= in_deg[:, None]).astype(float)
    m2 = (hid_deg[None, :] >= hid_deg[:, None]).astype(float)
    m3 = (in_deg[None, :] > hid_deg[:, None]).astype(float)
    return m1, m2, m3


class FlowModel:
    """Spline flow: geometry, permutations and parameter arrays."""

    PARAM_KEYS = ("w1", "b1", "w2", "b2", "w3", "b3")

    def __init__(self, dim, n_layers=4, n_bins=8, hidden=32, min_bin=1e-3,
                 min_deriv=1e-3, seed=0, permutations=None, site_ids=None):
        if dim < 1:
            raise ValueError("flow dimension must be at least 1")
        self.dim = dim
        self.n_layers = n_layers
        self.n_bins = n_bins
        self.hidden = hidden
        self.min_bin = min_bin
        self.min_deriv = min_deriv
        self.seed = seed
        self.site_ids = None if site_ids is None else tuple(site_ids)
        self.train_seed = None
        self.train_epochs = None
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        if permutations is None:
            self.permutations = [rng.permutation(dim) for _ in range(n_layers)]
        else:
            if len(permutations) != n_layers:
                raise ValueError("need one permutation per layer")
            self.permutations = [np.asarray(p, dtype=int) for p in permutations]
            for p in self.permutations:
                if sorted(p.tolist()) != list(range(dim)):
                    raise ValueError("invalid permutation")
        m1, m2, m3 = _conditioner_masks(dim, hidden)
        out_width = dim * (3 * n_bins - 1)
        self.masks = (m1, m2, np.repeat(m3, 3 * n_bins - 1, axis=1))
        self.params = []
        for _ in range(n_layers):
            a1 = 1.0 / math.sqrt(dim)
            a2 = 1.0 / math.sqrt(hidden)
            layer = {
                "w1": rng.uniform(-a1, a1, size=(dim, hidden)) * self.masks[0],
                "b1": np.zeros(hidden),
                "w2": rng.uniform(-a2, a2, size=(hidden, hidden)) * self.masks[1],
                "b2": np.zeros(hidden),
                "w3": np.zeros((hidden, out_width)),
                "b3": np.zeros(out_width),
            }
            self.params.append(layer)

    # -- parameter plumbing -------------------------------------------------

    def param_arrays(self):
        return [layer[key] for layer in self.params for key in self.PARAM_KEYS]

    def set_param_arrays(self, arrays):
        expected = len(self.params) * len(self.PARAM_KEYS)
        if len(arrays) != expected:
            raise ValueError(f"expected {expected} parameter arrays")
        it = iter(arrays)
        for layer in self.params:
            for key in self.PARAM_KEYS:
                arr = np.asarray(next(it), dtype=float)
                if arr.shape != layer[key].shape:
                    raise ValueError("parameter shape mismatch")
                layer[key] = arr

    # -- training protocol --------------------------------------------------

    objective_kind = "nll"

    def draw_aux(self, rng, batch_size):
        return None

    def objective_graph(self, batch, aux=None):
        leaves = [ad.leaf(a) for a in self.param_arrays()]
        layers = _relink_layers(leaves, self.params, self.PARAM_KEYS)
        z, logdet = _pull(layers, self.permutations, self.masks, self, batch)
        base = ad.sum_last(ad.add(ad.mul(ad.mul(z, z), -0.5), -0.5 * _LOG_2PI),
                           keepdims=False)
        nll = ad.mul(ad.add(base, logdet), -1.0)
        return ad.mean_all(nll), leaves


def _relink_layers(flat, layers, keys):
    it = iter(flat)
    return [{key: next(it) for key in keys} for _ in layers]


def conditioner_eval(layer_params, masks, x):
    """Raw spline parameter blocks for every coordinate at once."""
    m1, m2, m3 = masks
    h = ad.relu(ad.add(ad.matmul(x, ad.mul(layer_params["w1"], m1)),
                       layer_params["b1"]))
    h = ad.relu(ad.add(ad.matmul(h, ad.mul(layer_params["w2"], m2)),
                       layer_params["b2"]))
    return ad.add(ad.matmul(h, ad.mul(layer_params["w3"], m3)),
                  layer_params["b3"])


def _knots_from_raw(raw, n_bins, min_bin, min_deriv):
    widths_raw = raw[..., :n_bins]
    heights_raw = raw[..., n_bins:2 * n_bins]
    derivs_raw = raw[..., 2 * n_bins:]
    scale = 1.0 - n_bins * min_bin
    widths = ad.add(ad.mul(ad.softmax_last(widths_raw), scale), min_bin)
    heights = ad.add(ad.mul(ad.softmax_last(heights_raw), scale), min_bin)
    interior = ad.add(ad.softplus(ad.add(derivs_raw, _deriv_shift(min_deriv))),
                      min_deriv)
    ones = np.ones(ad.value_of(interior).shape[:-1] + (1,))
    derivs = ad.concat_last([ones, interior, ones])
    return widths, heights, derivs


def _layer_knots(layer_params, masks, model, x):
    n = ad.value_of(x).shape[0]
    raw = conditioner_eval(layer_params, masks, x)
    raw = ad.reshape(raw, (n, model.dim, 3 * model.n_bins - 1))
    return _knots_from_raw(raw, model.n_bins, model.min_bin, model.min_deriv)


def _pull(layers, permutations, masks, model, y):
    """Data to noise over the whole stack; y is a constant batch."""
    y = np.asarray(y, dtype=float)
    u = ad.sigmoid(y)
    logdet = ad.sum_last(ad.add(ad.log_sigmoid(y), ad.log_sigmoid(-y)),
                         keepdims=False)
    for layer_params, perm in zip(layers, permutations):
        widths, heights, derivs = _layer_knots(layer_params, masks, model, u)
        u, ld = _rq_spline(u, widths, heights, derivs, inverse=False)
        logdet = ad.add(logdet, ad.sum_last(ld, keepdims=False))
        u = u[:, perm]
    uv = ad.value_of(u)
    if np.any((uv < LOGIT_CLAMP) | (uv > 1.0 - LOGIT_CLAMP)):
        raise NumericError("point outside model support during density evaluation")
    z = ad.logit(u)
    logdet = ad.add(logdet,
                    ad.sum_last(ad.mul(ad.add(ad.log(u), ad.log(ad.sub(1.0, u))),
                                       -1.0), keepdims=False))
    return z, logdet


def flow_pull(model, y):
    """Map data to noise; returns noise and per-row log Jacobian."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != model.dim:
        raise ValueError(f"expected shape (n, {model.dim})")
    return _pull(model.params, model.permutations, model.masks, model, y)


def flow_push(model, z):
    """Map noise to data by inverting every stage in turn."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[1] != model.dim:
        raise ValueError(f"expected shape (n, {model.dim})")
    u = 1.0 / (1.0 + np.exp(-z))
    u = np.clip(u, LOGIT_CLAMP, 1.0 - LOGIT_CLAMP)
    for layer_params, perm in zip(reversed(model.params),
                                  reversed(model.permutations)):
        inv = np.empty_like(perm)
        inv[perm] = np.arange(model.dim)
        u = u[:, inv]
        out = np.zeros_like(u)
        for coord in range(model.dim):
            widths, heights, derivs = _layer_knots(layer_params, model.masks,
                                                   model, out)
            x_c, _ = _rq_spline(u[:, coord], widths[:, coord, :],
                                heights[:, coord, :], derivs[:, coord, :],
                                inverse=True)
            out[:, coord] = x_c
        u = out
    u = np.clip(u, LOGIT_CLAMP, 1.0 - LOGIT_CLAMP)
    return np.log(u) - np.log1p(-u)


def log_density(model, y):
    """Per-row log density of data rows under the flow."""
    z, logdet = flow_pull(model, y)
    base = -0.5 * np.sum(z * z, axis=1) - 0.5 * _LOG_2PI * model.dim
    return base + logdet


def sample(model, n, seed):
    """Draw n rows from the flow on the normal-score scale."""
    if n < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    chunk = max(1, int(2 ** 22 / max(model.dim, 1)))
    parts = []
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        z = rng.standard_normal((m, model.dim))
        parts.append(flow_push(model, z))
        remaining -= m
    values = np.concatenate(parts, axis=0)
    ids = model.site_ids if model.site_ids else tuple(
        f"c{i + 1}" for i in range(model.dim))
    return PanelMatrix(values, ids, SCALE_NORMAL)
