"""Parametric regular-vine copula: families, selection, density, sampling.

Five exchangeable bivariate families cover the edge copulas; clayton
and gumbel additionally carry quarter-turn rotations so any single
corner of the square can hold the dependence. Structure selection is
the greedy spanning-tree procedure on absolute Kendall tau, edge
families are picked by AIC, and sampling inverts the h-function
recursion along a deletion order read off the top of the vine.

Rotation conventions, written once here and used everywhere: the
rotated density evaluates the base density at 90°: (1-v, u),
180°: (1-u, 1-v), 270°: (v, 1-u). Equivalently a 90° rotated pair
(U, V) arises from a base pair (A, B) as (B, 1-A), and 270° as
(1-B, A), which fixes the h-function and inverse tables below.
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import CopulaMatrix
from .errors import DataError, DegenerateDataError, DomainError, InsufficientDataError
from .depstats import kendall_tau
from .special import norm_cdf, norm_pdf, norm_quantile

FAMILIES = ("independence", "gaussian", "clayton", "gumbel", "frank")
ROTATIONS = (0, 90, 180, 270)
_EPS = 1e-12

_GAUSS_RHO_MAX = 0.999
_CLAYTON_MAX = 28.0
_GUMBEL_MAX = 20.0
_FRANK_MAX = 35.0


@dataclass(frozen=True)
class BivCopula:
    family: str
    rotation: int = 0
    parameter: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.rotation not in ROTATIONS:
            raise ValueError(f"rotation must be one of {ROTATIONS}")
        if self.rotation != 0 and self.family not in ("clayton", "gumbel"):
            raise ValueError("rotations apply to clayton and gumbel only")
        th = self.parameter
        if self.family == "gaussian" and not -1.0 < th < 1.0:
            raise ValueError("gaussian parameter must lie in (-1, 1)")
        if self.family == "clayton" and th <= 0.0:
            raise ValueError("clayton parameter must be positive")
        if self.family == "gumbel" and th < 1.0:
            raise ValueError("gumbel parameter must be at least 1")
        if self.family == "frank" and th == 0.0:
            raise ValueError("frank parameter must be nonzero")


# -- base-family formulas (exchangeable, dependence in the lower-left
#    corner for clayton, upper-right for gumbel) ------------------------


def _base_logpdf(family, th, u, v):
    if family == "independence":
        return np.zeros(np.broadcast(u, v).shape)
    if family == "gaussian":
        x = norm_quantile(u)
        y = norm_quantile(v)
        r2 = th * th
        return (-0.5 * math.log(1.0 - r2)
                - (r2 * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * (1.0 - r2)))
    if family == "clayton":
        s = u ** (-th) + v ** (-th) - 1.0
        return (math.log1p(th) - (1.0 + th) * (np.log(u) + np.log(v))
                - (2.0 + 1.0 / th) * np.log(s))
    if family == "gumbel":
        x = -np.log(u)
        y = -np.log(v)
        s = x ** th + y ** th
        s_r = s ** (1.0 / th)
        return (-s_r + (th - 1.0) * (np.log(x) + np.log(y)) + x + y
                + (1.0 / th - 2.0) * np.log(s) + np.log(s_r + th - 1.0))
    if family == "frank":
        gd = math.expm1(-th)
        gu = np.expm1(-th * u)
        gv = np.expm1(-th * v)
        return (math.log(-th * gd) - th * (u + v)
                - 2.0 * np.log(np.abs(gd + gu * gv)))
    raise ValueError(family)


def _base_h(family, th, x, y):
    """Conditional cdf of the first argument given the second."""
    if family == "independence":
        return np.broadcast_to(np.asarray(x, dtype=float),
                               np.broadcast(x, y).shape).copy()
    if family == "gaussian":
        a = norm_quantile(x)
        b = norm_quantile(y)
        return norm_cdf((a - th * b) / math.sqrt(1.0 - th * th))
    if family == "clayton":
        s = x ** (-th) + y ** (-th) - 1.0
        return y ** (-th - 1.0) * s ** (-1.0 / th - 1.0)
    if family == "gumbel":
        lx = -np.log(x)
        ly = -np.log(y)
        s = lx ** th + ly ** th
        return np.exp(-s ** (1.0 / th)) * s ** (1.0 / th - 1.0) * ly ** (th - 1.0) / y
    if family == "frank":
        gd = math.expm1(-th)
        gx = np.expm1(-th * x)
        gy = np.expm1(-th * y)
        return np.exp(-th * y) * gx / (gd + gx * gy)
    raise ValueError(family)


def _base_hinv(family, th, p, y):
    """Inverse of `_base_h` in its first argument."""
    if family == "independence":
        return np.broadcast_to(np.asarray(p, dtype=float),
                               np.broadcast(p, y).shape).copy()
    if family == "gaussian":
        b = norm_quantile(y)
        a = norm_quantile(p) * math.sqrt(1.0 - th * th) + th * b
        return norm_cdf(a)
    if family == "clayton":
        inner = (p * y ** (th + 1.0)) ** (-th / (th + 1.0)) + 1.0 - y ** (-th)
        return inner ** (-1.0 / th)
    if family == "gumbel":
        p_arr, y_arr = np.broadcast_arrays(np.asarray(p, dtype=float),
                                           np.asarray(y, dtype=float))
        lo = np.full(p_arr.shape, _EPS)
        hi = np.full(p_arr.shape, 1.0 - _EPS)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = _base_h(family, th, mid, y_arr) < p_arr
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)
    if family == "frank":
        gd = math.expm1(-th)
        gy = np.expm1(-th * y)
        gx = p * gd / (np.exp(-th * y) - p * gy)
        return -np.log1p(gx) / th
    raise ValueError(family)


# -- rotation plumbing --------------------------------------------------


def _check_interior(*args):
    for a in args:
        if np.any((a <= 0.0) | (a >= 1.0)):
            raise DomainError("copula arguments must lie strictly inside (0, 1)")


def bicop_logpdf(cop, u, v):
    """Log density of the (possibly rotated) pair copula."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_interior(u, v)
    rot = cop.rotation
    if rot == 0:
        return _base_logpdf(cop.family, cop.parameter, u, v)
    if rot == 90:
        return _base_logpdf(cop.family, cop.parameter, 1.0 - v, u)
    if rot == 180:
        return _base_logpdf(cop.family, cop.parameter, 1.0 - u, 1.0 - v)
    return _base_logpdf(cop.family, cop.parameter, v, 1.0 - u)


def bicop_pdf(cop, u, v):
    return np.exp(bicop_logpdf(cop, u, v))


def bicop_hfunc(cop, u, v, which="1|2"):
    """Conditional cdf h of one argument given the other.

    `which="1|2"` conditions on the second argument, `"2|1"` on the
    first; both outputs are clamped a hair inside (0, 1) so chained
    evaluations stay in the open square.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_interior(u, v)
    fam, th, rot = cop.family, cop.parameter, cop.rotation
    if which == "1|2":
        if rot == 0:
            out = _base_h(fam, th, u, v)
        elif rot == 90:
            out = _base_h(fam, th, u, 1.0 - v)
        elif rot == 180:
            out = 1.0 - _base_h(fam, th, 1.0 - u, 1.0 - v)
        else:
            out = 1.0 - _base_h(fam, th, 1.0 - u, v)
    elif which == "2|1":
        if rot == 0:
            out = _base_h(fam, th, v, u)
        elif rot == 90:
            out = 1.0 - _base_h(fam, th, 1.0 - v, u)
        elif rot == 180:
            out = 1.0 - _base_h(fam, th, 1.0 - v, 1.0 - u)
        else:
            out = _base_h(fam, th, v, 1.0 - u)
    else:
        raise ValueError("which must be '1|2' or '2|1'")
    return np.clip(out, _EPS, 1.0 - _EPS)


def bicop_hinv(cop, p, cond, which="1|2"):
    """Solve h(x | cond) = p for the conditioned argument x.

    `cond` is the conditioning value: the second copula argument for
    `which="1|2"`, the first for `"2|1"`.
    """
    p = np.asarray(p, dtype=float)
    cond = np.asarray(cond, dtype=float)
    _check_interior(p, cond)
    fam, th, rot = cop.family, cop.parameter, cop.rotation
    if which == "1|2":
        if rot == 0:
            out = _base_hinv(fam, th, p, cond)
        elif rot == 90:
            out = _base_hinv(fam, th, p, 1.0 - cond)
        elif rot == 180:
            out = 1.0 - _base_hinv(fam, th, 1.0 - p, 1.0 - cond)
        else:
            out = 1.0 - _base_hinv(fam, th, 1.0 - p, cond)
    elif which == "2|1":
        if rot == 0:
            out = _base_hinv(fam, th, p, cond)
        elif rot == 90:
            out = 1.0 - _base_hinv(fam, th, 1.0 - p, cond)
        elif rot == 180:
            out = 1.0 - _base_hinv(fam, th, 1.0 - p, 1.0 - cond)
        else:
            out = _base_hinv(fam, th, p, 1.0 - cond)
    else:
        raise ValueError("which must be '1|2' or '2|1'")
    return np.clip(out, _EPS, 1.0 - _EPS)


# -- single-edge fitting ------------------------------------------------


def _loglik(cop, u, v):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return float(np.sum(bicop_logpdf(cop, u, v)))


def _golden_max(fn, lo, hi, iters=60):
    """Golden-section maximum of fn on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if not (math.isfinite(fc) and math.isfinite(fd)):
            raise FloatingPointError("non-finite objective")
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return (c, fc) if fc > fd else (d, fd)


def _tau_init(family, rotation, tau):
    """Parameter start from the tau inversion for the rotated family."""
    t = -tau if rotation in (90, 270) else tau
    if family == "gaussian":
        return min(max(math.sin(math.pi * t / 2.0), -_GAUSS_RHO_MAX),
                   _GAUSS_RHO_MAX)
    t = min(max(t, 1e-3), 0.95)
    if family == "clayton":
        return min(2.0 * t / (1.0 - t), _CLAYTON_MAX)
    if family == "gumbel":
        return min(1.0 / (1.0 - t), _GUMBEL_MAX)
    raise ValueError(family)


def _candidate_brackets(family, rotation, tau):
    if family == "gaussian":
        return [(-_GAUSS_RHO_MAX, _GAUSS_RHO_MAX)]
    if family == "frank":
        return [(1e-3, _FRANK_MAX), (-_FRANK_MAX, -1e-3)]
    init = _tau_init(family, rotation, tau)
    if family == "clayton":
        lo, hi = 1e-4, _CLAYTON_MAX
    else:
        lo, hi = 1.0 + 1e-6, _GUMBEL_MAX
    return [(max(lo, init / 5.0), min(hi, init * 5.0 + 1.0))]


def fit_bicop(u, v):
    """Pick the AIC-best family, rotation and parameter for a pair."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise DataError("paired samples must have equal length")
    if u.size < 30:
        raise InsufficientDataError("need at least 30 pairs to fit")
    _check_interior(u, v)
    tau = kendall_tau(u, v)
    if abs(tau) > 0.99:
        raise DegenerateDataError(
            "pair is numerically monotone; no copula family is identifiable")

    best = (math.inf, BivCopula("independence"))
    candidates = [("independence", 0), ("gaussian", 0), ("frank", 0)]
    candidates += [("clayton", r) for r in ROTATIONS]
    candidates += [("gumbel", r) for r in ROTATIONS]
    for family, rotation in candidates:
        if family == "independence":
            aic = 0.0
            cop = BivCopula("independence")
        else:
            cop, ll = _fit_one(family, rotation, tau, u, v)
            aic = 2.0 - 2.0 * ll
        if aic < best[0] - 1e-12:
            best = (aic, cop)
    return best[1]


def _fit_one(family, rotation, tau, u, v):
    def ll_at(th):
        return _loglik(BivCopula(family, rotation, th), u, v)

    best_th, best_ll = None, -math.inf
    for lo, hi in _candidate_brackets(family, rotation, tau):
        try:
            th, ll = _golden_max(ll_at, lo, hi)
        except FloatingPointError:
            if family == "frank":
                continue
            th = _tau_init(family, rotation, tau)
            ll = ll_at(th)
            if not math.isfinite(ll):
                continue
            warnings.warn(
                f"{family} rot {rotation}: optimizer failed, using tau start",
                RuntimeWarning)
        if ll > best_ll:
            best_th, best_ll = th, ll
    if best_th is None:
        best_th = 1e-3 if family == "frank" else _tau_init(family, rotation, tau)
        best_ll = -math.inf
    return BivCopula(family, rotation, best_th), best_ll


# -- structure ----------------------------------------------------------


@dataclass(frozen=True)
class VineEdge:
    first: int
    second: int
    conditioning: frozenset
    copula: BivCopula = None

    def __post_init__(self):
        if self.first >= self.second:
            raise ValueError("edge variables must be ordered")
        if self.first in self.conditioning or self.second in self.conditioning:
            raise ValueError("conditioned variables cannot be conditioned on")

    @property
    def full_set(self):
        return self.conditioning | {self.first, self.second}

    def label(self):
        return (self.first, self.second, tuple(sorted(self.conditioning)))


@dataclass(frozen=True)
class RVineStructure:
    dim: int
    trees: tuple  # tuple of tuples of VineEdge

    def __post_init__(self):
        if len(self.trees) != self.dim - 1:
            raise ValueError("need d - 1 trees")
        for level, tree in enumerate(self.trees):
            if len(tree) != self.dim - 1 - level:
                raise ValueError(f"tree {level + 1} has the wrong edge count")
            for e in tree:
                if len(e.conditioning) != level:
                    raise ValueError("conditioning-set size must equal level")


@dataclass(frozen=True, eq=False)
class RVineModel:
    structure: RVineStructure
    site_ids: tuple = None
    # edges in structure.trees carry fitted copulas

    @property
    def dim(self):
        return self.structure.dim


class _UnionFind:
    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _max_spanning_tree(nodes, weighted_pairs):
    """Kruskal on negated weights; ties broken by edge label."""
    uf = _UnionFind(nodes)
    chosen = []
    for _, _, a, b, payload in sorted(
            weighted_pairs, key=lambda t: (-t[0], t[1])):
        if uf.union(a, b):
            chosen.append(payload)
    return chosen


def fit_vine(data):
    """Greedy tree-by-tree selection on absolute Kendall tau, AIC edges.

    Each tree is the maximum spanning tree over the pairs the proximity
    condition allows, weighted by |tau| of the h-propagated
    pseudo-observations; ties break on the lexicographic edge label.
    Edge copulas are fitted as each tree is fixed since the next tree's
    inputs depend on them.
    """
    ids = data.site_ids if isinstance(data, CopulaMatrix) else None
    u = data.values if isinstance(data, CopulaMatrix) else np.asarray(data, dtype=float)
    if u.ndim != 2:
        raise DataError("expected a matrix of copula-scale rows")
    d = u.shape[1]
    if d < 2:
        raise DataError("need at least two variables")

    # pseudo-observation store keyed by (variable, conditioning set)
    pseudo = {(j, frozenset()): u[:, j] for j in range(d)}
    trees = []
    prev_edges = None
    for level in range(d - 1):
        pairs = []
        if level == 0:
            nodes = list(range(d))
            for i, j in itertools.combinations(range(d), 2):
                tau = kendall_tau(u[:, i], u[:, j])
                edge = VineEdge(i, j, frozenset())
                pairs.append((abs(tau), edge.label(), i, j, edge))
        else:
            nodes = list(range(len(prev_edges)))
            for (ei, e), (fi, f) in itertools.combinations(
                    enumerate(prev_edges), 2):
                sym = e.full_set ^ f.full_set
                if len(sym) != 2:
                    continue  # proximity condition
                a, b = sorted(sym)
                cond = frozenset(e.full_set & f.full_set)
                tau = kendall_tau(_cond_value(pseudo, a, cond),
                                  _cond_value(pseudo, b, cond))
                edge = VineEdge(a, b, cond)
                pairs.append((abs(tau), edge.label(), ei, fi, edge))
        chosen = _max_spanning_tree(nodes, pairs)
        chosen.sort(key=lambda e: e.label())
        fitted = []
        for edge in chosen:
            ua = _cond_value(pseudo, edge.first, edge.conditioning)
            ub = _cond_value(pseudo, edge.second, edge.conditioning)
            cop = fit_bicop(ua, ub)
            fitted.append(VineEdge(edge.first, edge.second,
                                   edge.conditioning, cop))
            pseudo[(edge.first, edge.conditioning | {edge.second})] = \
                bicop_hfunc(cop, ua, ub, "1|2")
            pseudo[(edge.second, edge.conditioning | {edge.first})] = \
                bicop_hfunc(cop, ua, ub, "2|1")
        trees.append(tuple(fitted))
        prev_edges = fitted
    return RVineModel(RVineStructure(d, tuple(trees)), ids)


def select_structure(data):
    """Tree skeleton of the fitted vine.

    Selection cannot be separated from fitting: higher trees see
    pseudo-observations propagated through the lower-tree copulas, so
    this runs the full fit and returns only the structure.
    """
    return fit_vine(data).structure


def _cond_value(pseudo, var, cond):
    key = (var, frozenset(cond))
    if key not in pseudo:
        raise KeyError(f"missing pseudo-observation for {var} | {sorted(cond)}")
    return pseudo[key]


def make_model(dim, edges, site_ids=None):
    """Assemble a model from (first, second, conditioning, copula) tuples."""
    by_level = {}
    for first, second, cond, cop in edges:
        e = VineEdge(first, second, frozenset(cond), cop)
        by_level.setdefault(len(e.conditioning), []).append(e)
    trees = []
    for level in range(dim - 1):
        tree = sorted(by_level.get(level, []), key=lambda e: e.label())
        trees.append(tuple(tree))
    return RVineModel(RVineStructure(dim, tuple(trees)), site_ids)


# -- density ------------------------------------------------------------


def rvine_logpdf(model, u):
    """Log copula density at interior points; rows of u are points."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    pts = u[None, :] if single else u
    if pts.shape[1] != model.dim:
        raise DataError(f"expected {model.dim} columns")
    _check_interior(pts)
    pseudo = {(j, frozenset()): pts[:, j] for j in range(model.dim)}
    total = np.zeros(pts.shape[0])
    for tree in model.structure.trees:
        for edge in tree:
            ua = _cond_value(pseudo, edge.first, edge.conditioning)
            ub = _cond_value(pseudo, edge.second, edge.conditioning)
            total += bicop_logpdf(edge.copula, ua, ub)
            pseudo[(edge.first, edge.conditioning | {edge.second})] = \
                bicop_hfunc(edge.copula, ua, ub, "1|2")
            pseudo[(edge.second, edge.conditioning | {edge.first})] = \
                bicop_hfunc(edge.copula, ua, ub, "2|1")
    return float(total[0]) if single else total


# -- sampling -----------------------------------------------------------


def _deletion_order(structure):
    """Variables in removal order with their per-tree edge chains.

    The conditioned pair of the single top-level edge always contains a
    variable that sits in the conditioned set of exactly one edge per
    tree; removing it leaves a vine on the remaining variables. The
    larger label is taken at each step so the order is deterministic.
    """
    trees = [list(t) for t in structure.trees]
    order = []
    chains = []
    while trees and trees[-1]:
        top = trees[-1][0]
        var = max(top.first, top.second)
        chain = []
        for tree in trees:
            conditioned = [e for e in tree if var in (e.first, e.second)]
            if len(conditioned) != 1:
                raise AssertionError(
                    "variable must be conditioned exactly once per tree")
            if any(var in e.conditioning for e in tree):
                raise AssertionError(
                    "removable variable cannot sit in a conditioning set")
            chain.append(conditioned[0])
        partners = [e.first if e.second == var else e.second for e in chain]
        for t, e in enumerate(chain):
            if e.conditioning != frozenset(partners[:t]):
                raise AssertionError("conditioning sets must nest along the chain")
        order.append(var)
        chains.append(chain)
        trees = [[e for e in tree if var not in e.full_set] for tree in trees]
        trees = [t for t in trees if t]
    # the last remaining variable closes the order
    remaining = set(range(structure.dim)) - set(order)
    if len(remaining) != 1:
        raise AssertionError("deletion must leave exactly one variable")
    order.append(remaining.pop())
    chains.append([])
    return order[::-1], chains[::-1]


def rvine_sample(model, n, seed):
    """Inverse-Rosenblatt draws from the vine; uniform marginals."""
    if n < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    w = rng.random((n, model.dim))
    order, chains = _deletion_order(model.structure)
    d = model.dim
    out = np.empty((n, d))
    chunk = max(1, int(6.4e7 / max(d * d, 1)))
    for start in range(0, n, chunk):
        rows = slice(start, min(start + chunk, n))
        wc = w[rows]
        cache = {}
        for k, var in enumerate(order):
            x = wc[:, k]
            chain = chains[k]
            for t in range(len(chain) - 1, -1, -1):
                edge = chain[t]
                partner = edge.first if edge.second == var else edge.second
                pv = _pseudo_sample(cache, out, rows, edge.conditioning, partner,
                                    model)
                which = "1|2" if edge.first == var else "2|1"
                x = bicop_hinv(edge.copula, x, pv, which)
            out[rows, var] = x
            cache[(var, frozenset())] = x
    ids = model.site_ids if model.site_ids else tuple(
        f"c{i + 1}" for i in range(d))
    return CopulaMatrix(out, ids)


def _pseudo_sample(cache, out, rows, cond, var, model):
    """h-propagated value of `var` given `cond`, built lazily."""
    key = (var, frozenset(cond))
    if key in cache:
        return cache[key]
    if not cond:
        val = out[rows, var]
        cache[key] = val
        return val
    edge = _edge_by_full_set(model, var, frozenset(cond) | {var})
    partner = edge.first if edge.second == var else edge.second
    sub = frozenset(edge.conditioning)
    uv = _pseudo_sample(cache, out, rows, sub, var, model)
    up = _pseudo_sample(cache, out, rows, sub, partner, model)
    if edge.first == var:
        val = bicop_hfunc(edge.copula, uv, up, "1|2")
    else:
        val = bicop_hfunc(edge.copula, up, uv, "2|1")
    cache[key] = val
    return val


def _edge_by_full_set(model, var, full):
    index = getattr(model, "_edge_index", None)
    if index is None:
        index = {}
        for tree in model.structure.trees:
            for e in tree:
                index[(e.first, frozenset(e.full_set))] = e
                index[(e.second, frozenset(e.full_set))] = e
        object.__setattr__(model, "_edge_index", index)
    key = (var, full)
    if key not in index:
        raise KeyError(f"no edge realizes {var} | {sorted(full - {var})}")
    return index[key]


# -- serialization ------------------------------------------------------


def vine_to_dict(model):
    edges = []
    for tree in model.structure.trees:
        for e in tree:
            edges.append({
                "first": e.first,
                "second": e.second,
                "conditioning": sorted(e.conditioning),
                "family": e.copula.family,
                "rotation": e.copula.rotation,
                "parameter": e.copula.parameter,
            })
    return {"dim": model.dim, "edges": edges}


def vine_from_dict(payload):
    edges = [(e["first"], e["second"], frozenset(e["conditioning"]),
              BivCopula(e["family"], e["rotation"], e["parameter"]))
             for e in payload["edges"]]
    return make_model(payload["dim"], edges)
