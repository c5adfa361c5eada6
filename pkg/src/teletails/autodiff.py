"""Reverse-mode automatic differentiation over numpy arrays.

Small tape covering exactly the operations needed by the spline flow and
the moment-matching generator: elementwise arithmetic, matrix products,
a few activations, cumulative sums, gathers along the last axis and a
pairwise distance kernel. Plain ndarrays passing through the dispatch
functions are treated as constants, so the same numeric code serves both
the fast evaluation path and the differentiable path.
"""

import numpy as np


def _unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to `shape`."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """Graph node holding a value, its parents and a vector-Jacobian rule."""

    __slots__ = ("value", "grad", "parents", "vjp")
    __array_ufunc__ = None  # force numpy to defer to our reflected operators

    def __init__(self, value, parents=(), vjp=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = None
        self.parents = parents
        self.vjp = vjp

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __getitem__(self, key):
        return take(self, key)


def leaf(value):
    """Differentiable leaf wrapping `value` without copying float arrays."""
    return Tensor(value)


def value_of(x):
    return x.value if isinstance(x, Tensor) else np.asarray(x, dtype=float)


def is_tensor(x):
    return isinstance(x, Tensor)


def _toposort(root):
    order, seen, stack = [], set(), [(root, False)]
    while stack:
        node, ready = stack.pop()
        if ready:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss):
    """Accumulate gradients of a scalar loss into every reachable node."""
    if loss.value.size != 1:
        raise ValueError("backward expects a scalar loss")
    order = _toposort(loss)
    for node in order:
        node.grad = None
    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node.vjp is None or node.grad is None:
            continue
        for parent, grad in zip(node.parents, node.vjp(node.grad)):
            if grad is None:
                continue
            parent.grad = grad if parent.grad is None else parent.grad + grad


def _binary(a, b, fwd, da, db):
    a_t, b_t = isinstance(a, Tensor), isinstance(b, Tensor)
    av = a.value if a_t else np.asarray(a, dtype=float)
    bv = b.value if b_t else np.asarray(b, dtype=float)
    out = fwd(av, bv)
    if not (a_t or b_t):
        return out
    parents = tuple(t for t, flag in ((a, a_t), (b, b_t)) if flag)

    def vjp(g):
        grads = []
        if a_t:
            grads.append(_unbroadcast(da(g, av, bv, out), av.shape))
        if b_t:
            grads.append(_unbroadcast(db(g, av, bv, out), bv.shape))
        return grads

    return Tensor(out, parents, vjp)


def _unary(x, fwd, dx):
    if not isinstance(x, Tensor):
        return fwd(np.asarray(x, dtype=float))
    xv = x.value
    out = fwd(xv)
    return Tensor(out, (x,), lambda g: (dx(g, xv, out),))


def add(a, b):
    return _binary(a, b, np.add, lambda g, av, bv, o: g, lambda g, av, bv, o: g)


def sub(a, b):
    return _binary(a, b, np.subtract,
                   lambda g, av, bv, o: g, lambda g, av, bv, o: -g)


def mul(a, b):
    return _binary(a, b, np.multiply,
                   lambda g, av, bv, o: g * bv, lambda g, av, bv, o: g * av)


def div(a, b):
    return _binary(a, b, np.divide,
                   lambda g, av, bv, o: g / bv,
                   lambda g, av, bv, o: -g * o / bv)


def power(x, exponent):
    c = float(exponent)
    return _unary(x, lambda v: v ** c, lambda g, v, o: g * c * v ** (c - 1.0))


def matmul(a, b):
    return _binary(a, b, np.matmul,
                   lambda g, av, bv, o: g @ bv.T,
                   lambda g, av, bv, o: av.T @ g)


def exp(x):
    return _unary(x, np.exp, lambda g, v, o: g * o)


def log(x):
    return _unary(x, np.log, lambda g, v, o: g / v)


def sqrt(x):
    return _unary(x, np.sqrt, lambda g, v, o: 0.5 * g / o)


def relu(x):
    return _unary(x, lambda v: np.maximum(v, 0.0),
                  lambda g, v, o: g * (v > 0.0))


def _sigmoid_value(v):
    out = np.empty_like(v)
    pos = v >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def sigmoid(x):
    return _unary(x, _sigmoid_value, lambda g, v, o: g * o * (1.0 - o))


def _softplus_value(v):
    return np.maximum(v, 0.0) + np.log1p(np.exp(-np.abs(v)))


def softplus(x):
    return _unary(x, _softplus_value, lambda g, v, o: g * _sigmoid_value(v))


def log_sigmoid(x):
    return _unary(x, lambda v: -_softplus_value(-v),
                  lambda g, v, o: g * _sigmoid_value(-v))


def logit(x):
    return _unary(x, lambda v: np.log(v) - np.log1p(-v),
                  lambda g, v, o: g / (v * (1.0 - v)))


def sum_all(x):
    return _unary(x, np.sum, lambda g, v, o: np.broadcast_to(g, v.shape))


def sum_last(x, keepdims=True):
    def fwd(v):
        return v.sum(axis=-1, keepdims=keepdims)

    def dx(g, v, o):
        if not keepdims:
            g = np.expand_dims(g, -1)
        return np.broadcast_to(g, v.shape)

    return _unary(x, fwd, dx)


def mean_all(x):
    size = value_of(x).size
    return mul(sum_all(x), 1.0 / size)


def cumsum_last(x):
    def dx(g, v, o):
        return np.flip(np.cumsum(np.flip(g, axis=-1), axis=-1), axis=-1)

    return _unary(x, lambda v: np.cumsum(v, axis=-1), dx)


def take(x, key):
    """Static basic indexing; gradients scatter back into place."""
    def dx(g, v, o):
        out = np.zeros_like(v)
        out[key] = g
        return out

    return _unary(x, lambda v: v[key], dx)


def gather_last(x, idx):
    """Pick one entry per position along the last axis."""
    idx = np.asarray(idx)

    def fwd(v):
        return np.take_along_axis(v, idx, axis=-1)

    def dx(g, v, o):
        flat_v = v.reshape(-1, v.shape[-1])
        flat_g = g.reshape(-1, g.shape[-1])
        flat_i = np.broadcast_to(idx, g.shape).reshape(-1, g.shape[-1])
        out = np.zeros_like(flat_v)
        rows = np.repeat(np.arange(flat_v.shape[0]), flat_i.shape[1])
        np.add.at(out, (rows, flat_i.ravel()), flat_g.ravel())
        return out.reshape(v.shape)

    return _unary(x, fwd, dx)


def reshape(x, shape):
    return _unary(x, lambda v: v.reshape(shape),
                  lambda g, v, o: g.reshape(v.shape))


def concat_last(parts):
    """Concatenate tensors and constant arrays along the last axis."""
    tensors = [p for p in parts if isinstance(p, Tensor)]
    vals = [value_of(p) for p in parts]
    out = np.concatenate(vals, axis=-1)
    if not tensors:
        return out
    widths = [v.shape[-1] for v in vals]
    offsets = np.cumsum([0] + widths)

    def vjp(g):
        grads = []
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if isinstance(p, Tensor):
                grads.append(g[..., lo:hi])
        return grads

    return Tensor(out, tuple(tensors), vjp)


def where(cond, a, b):
    cond = np.asarray(cond, dtype=bool)
    return _binary(a, b, lambda av, bv: np.where(cond, av, bv),
                   lambda g, av, bv, o: g * cond,
                   lambda g, av, bv, o: g * ~cond)


def softmax_last(x):
    """Softmax along the last axis; the max shift is held constant."""
    shift = value_of(x).max(axis=-1, keepdims=True)
    e = exp(sub(x, shift))
    return div(e, sum_last(e, keepdims=True))


def pairwise_dist(a, b):
    """Euclidean distances between row sets: (n, d) x (m, d) -> (n, m).

    The gradient at coincident rows (zero distance) is taken as zero.
    """
    def fwd(av, bv):
        sq = (np.sum(av * av, axis=1)[:, None]
              + np.sum(bv * bv, axis=1)[None, :]
              - 2.0 * av @ bv.T)
        return np.sqrt(np.maximum(sq, 0.0))

    def _weights(g, o):
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(o > 0.0, g / np.where(o > 0.0, o, 1.0), 0.0)
        return w

    def da(g, av, bv, o):
        w = _weights(g, o)
        return w.sum(axis=1)[:, None] * av - w @ bv

    def db(g, av, bv, o):
        w = _weights(g, o)
        return w.sum(axis=0)[:, None] * bv - w.T @ av

    return _binary(a, b, fwd, da, db)
