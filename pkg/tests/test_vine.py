"""Pair-copula families, tree selection, vine density, and sampling."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from teletails.dataset import CopulaMatrix
from teletails.depstats import kendall_tau, tail_dep_empirical
from teletails.errors import DataError, DegenerateDataError, DomainError
from teletails.special import norm_quantile
from teletails.synth import sample_gaussian_copula
from teletails.vine import (
    BivCopula,
    RVineStructure,
    VineEdge,
    bicop_hfunc,
    bicop_hinv,
    bicop_logpdf,
    bicop_pdf,
    fit_bicop,
    fit_vine,
    make_model,
    rvine_logpdf,
    rvine_sample,
    select_structure,
    vine_from_dict,
    vine_to_dict,
)

INDEP = BivCopula("independence")


def _unit_nodes(n=160):
    """Gauss-Legendre nodes on (0, 1) pushed through a boundary-dense map."""
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t + 1.0)
    u = np.sin(0.5 * math.pi * t) ** 2
    du = 0.25 * math.pi * np.sin(math.pi * t)
    return u, w * du


def _pair_sample(cop, n, seed):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    w = np.clip(rng.uniform(size=(n, 2)), 1e-12, 1.0 - 1e-12)
    v = w[:, 0]
    u = bicop_hinv(cop, w[:, 1], v, "1|2")
    return u, v


def _ks_uniform(x):
    x = np.sort(x)
    n = x.size
    return max(float(np.max(np.arange(1, n + 1) / n - x)),
               float(np.max(x - np.arange(n) / n)))


# -- densities --------------------------------------------------------------


def test_independence_density_is_one():
    rng = np.random.default_rng(1)
    u, v = rng.uniform(0.01, 0.99, size=(2, 50))
    assert np.array_equal(bicop_logpdf(INDEP, u, v), np.zeros(50))
    assert np.array_equal(bicop_pdf(INDEP, u, v), np.ones(50))


@pytest.mark.parametrize("cop", [
    BivCopula("gaussian", 0, 0.6),
    BivCopula("gaussian", 0, -0.85),
    BivCopula("clayton", 0, 2.0),
    BivCopula("clayton", 90, 3.0),
    BivCopula("clayton", 180, 0.7),
    BivCopula("gumbel", 0, 2.0),
    BivCopula("gumbel", 180, 1.3),
    BivCopula("gumbel", 270, 4.0),
    BivCopula("frank", 0, 5.0),
    BivCopula("frank", 0, -3.0),
])
def test_density_integrates_to_one(cop):
    u, w = _unit_nodes()
    uu, vv = np.meshgrid(u, u, indexing="ij")
    dens = bicop_pdf(cop, uu.ravel(), vv.ravel()).reshape(u.size, u.size)
    assert abs(float(w @ dens @ w) - 1.0) < 1e-4


def test_rotations_relocate_the_base_density():
    rng = np.random.default_rng(3)
    u, v = rng.uniform(0.05, 0.95, size=(2, 40))
    base = BivCopula("clayton", 0, 2.0)
    assert_allclose(bicop_pdf(BivCopula("clayton", 180, 2.0), u, v),
                    bicop_pdf(base, 1.0 - u, 1.0 - v), rtol=1e-12)
    assert_allclose(bicop_pdf(BivCopula("clayton", 90, 2.0), u, v),
                    bicop_pdf(base, 1.0 - v, u), rtol=1e-12)
    assert_allclose(bicop_pdf(BivCopula("clayton", 270, 2.0), u, v),
                    bicop_pdf(base, v, 1.0 - u), rtol=1e-12)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.4])
def test_boundary_arguments_rejected(bad):
    cop = BivCopula("gaussian", 0, 0.5)
    with pytest.raises(DomainError):
        bicop_logpdf(cop, np.array([bad]), np.array([0.5]))
    with pytest.raises(DomainError):
        bicop_hfunc(cop, np.array([0.5]), np.array([bad]))
    with pytest.raises(DomainError):
        bicop_hinv(cop, np.array([bad]), np.array([0.5]))


@pytest.mark.parametrize("family,rotation,parameter", [
    ("students", 0, 0.5),
    ("gaussian", 90, 0.5),
    ("frank", 180, 2.0),
    ("independence", 270, 0.0),
    ("gaussian", 0, 1.0),
    ("clayton", 0, 0.0),
    ("gumbel", 0, 0.9),
    ("frank", 0, 0.0),
])
def test_invalid_copulas_rejected(family, rotation, parameter):
    with pytest.raises(ValueError):
        BivCopula(family, rotation, parameter)


# -- conditional cdfs -------------------------------------------------------


def test_independence_h_returns_conditioned_argument():
    rng = np.random.default_rng(5)
    u, v = rng.uniform(0.01, 0.99, size=(2, 30))
    assert_allclose(bicop_hfunc(INDEP, u, v, "1|2"), u, atol=1e-12)
    assert_allclose(bicop_hfunc(INDEP, u, v, "2|1"), v, atol=1e-12)


def test_gaussian_rho_zero_reduces_to_independence():
    rng = np.random.default_rng(7)
    u, v = rng.uniform(0.01, 0.99, size=(2, 30))
    flat = BivCopula("gaussian", 0, 0.0)
    assert np.max(np.abs(bicop_hfunc(flat, u, v, "1|2") - u)) < 1e-12
    assert np.max(np.abs(bicop_pdf(flat, u, v) - 1.0)) < 1e-12


def _cdf(cop, u, v):
    th = cop.parameter
    if cop.family == "clayton":
        return (u ** -th + v ** -th - 1.0) ** (-1.0 / th)
    if cop.family == "gumbel":
        s = (-math.log(u)) ** th + (-math.log(v)) ** th
        return math.exp(-s ** (1.0 / th))
    if cop.family == "frank":
        return -math.log1p(math.expm1(-th * u) * math.expm1(-th * v)
                           / math.expm1(-th)) / th
    a = float(norm_quantile(np.array([u]))[0])
    b = float(norm_quantile(np.array([v]))[0])
    sd = math.sqrt(1.0 - th * th)

    def integrand(s):
        return (math.exp(-0.5 * s * s) / math.sqrt(2.0 * math.pi)
                * stats.norm.cdf((b - th * s) / sd))

    value, _ = integrate.quad(integrand, -9.0, a, epsabs=1e-13, limit=200)
    return value


@pytest.mark.parametrize("cop", [
    BivCopula("gaussian", 0, 0.6),
    BivCopula("clayton", 0, 2.0),
    BivCopula("gumbel", 0, 1.7),
    BivCopula("frank", 0, 4.0),
])
def test_h_matches_cdf_finite_difference(cop):
    rng = np.random.default_rng(11)
    step = 1e-5
    for _ in range(25):
        u, v = rng.uniform(0.05, 0.95, size=2)
        got = float(bicop_hfunc(cop, np.array([u]), np.array([v]), "1|2")[0])
        numeric = (_cdf(cop, u, v + step) - _cdf(cop, u, v - step)) / (2 * step)
        assert abs(got - numeric) < 1e-6


@pytest.mark.parametrize("cop", [
    BivCopula("gaussian", 0, -0.4),
    BivCopula("clayton", 90, 1.5),
    BivCopula("gumbel", 180, 2.2),
    BivCopula("frank", 0, -6.0),
])
def test_h_strictly_increasing_and_invertible(cop):
    grid = np.linspace(0.01, 0.99, 99)
    for v in (0.2, 0.5, 0.9):
        out = bicop_hfunc(cop, grid, np.full_like(grid, v), "1|2")
        assert np.all(np.diff(out) > 0.0)
    rng = np.random.default_rng(13)
    p, cond = rng.uniform(0.01, 0.99, size=(2, 200))
    for which in ("1|2", "2|1"):
        x = bicop_hinv(cop, p, cond, which)
        if which == "1|2":
            back = bicop_hfunc(cop, x, cond, which)
        else:
            back = bicop_hfunc(cop, cond, x, which)
        assert np.max(np.abs(back - p)) < 1e-6


# -- single-edge fitting ----------------------------------------------------


def test_fit_recovers_gumbel_parameter():
    u, v = _pair_sample(BivCopula("gumbel", 0, 2.0), 4000, seed=17)
    cop = fit_bicop(u, v)
    assert cop.family == "gumbel"
    assert cop.rotation == 0
    assert 1.85 <= cop.parameter <= 2.15


def test_fit_selects_independence_on_independent_data():
    rng = np.random.default_rng(19)
    u, v = rng.uniform(size=(2, 4000))
    assert fit_bicop(u, v).family == "independence"


def test_fit_rejects_degenerate_input():
    u = np.random.default_rng(23).uniform(size=1000)
    with pytest.raises(DegenerateDataError):
        fit_bicop(u, u)


# -- structure selection ----------------------------------------------------


def test_two_variables_force_the_single_edge():
    data = sample_gaussian_copula(200, [[1.0, 0.4], [0.4, 1.0]], seed=29)
    structure = select_structure(data)
    assert len(structure.trees) == 1
    assert structure.trees[0][0].label() == (0, 1, ())


def test_three_variable_tree_keeps_strongest_edges():
    corr = np.array([[1.0, 0.95, 0.76],
                     [0.95, 1.0, 0.80],
                     [0.76, 0.80, 1.0]])
    data = sample_gaussian_copula(2000, corr, seed=31)
    structure = select_structure(data)
    labels = {(e.first, e.second) for e in structure.trees[0]}
    assert labels == {(0, 1), (1, 2)}


def test_random_six_dimensional_structure_is_proximity_valid():
    rng = np.random.default_rng(37)
    a = rng.standard_normal((6, 6))
    cov = a @ a.T + 6.0 * np.eye(6)
    scale = np.sqrt(np.diag(cov))
    corr = cov / np.outer(scale, scale)
    data = sample_gaussian_copula(300, corr, seed=41)
    model = fit_vine(data)
    trees = model.structure.trees
    assert [len(t) for t in trees] == [5, 4, 3, 2, 1]
    for level, tree in enumerate(trees):
        for edge in tree:
            assert len(edge.conditioning) == level
            assert edge.copula is not None
        if level == 0:
            continue
        for edge in tree:
            parents = [f for f in trees[level - 1]
                       if f.full_set <= edge.full_set]
            assert len(parents) == 2
            assert (parents[0].full_set ^ parents[1].full_set
                    == {edge.first, edge.second})


# -- vine density -----------------------------------------------------------


def test_all_independence_vine_has_zero_logpdf():
    edges = [(0, 1, (), INDEP), (1, 2, (), INDEP), (0, 2, (1,), INDEP)]
    model = make_model(3, edges)
    rng = np.random.default_rng(43)
    pts = rng.uniform(0.01, 0.99, size=(40, 3))
    assert np.array_equal(rvine_logpdf(model, pts), np.zeros(40))


def test_four_dimensional_density_matches_direct_transcription():
    c12 = BivCopula("gumbel", 180, 1.8)
    c13 = BivCopula("gaussian", 0, 0.5)
    c14 = BivCopula("clayton", 90, 1.5)
    c23_1 = BivCopula("frank", 0, 3.0)
    c24_1 = BivCopula("clayton", 0, 2.0)
    c34_12 = BivCopula("gaussian", 0, -0.4)
    model = make_model(4, [
        (0, 1, (), c12), (0, 2, (), c13), (0, 3, (), c14),
        (1, 2, (0,), c23_1), (1, 3, (0,), c24_1),
        (2, 3, (0, 1), c34_12),
    ])
    rng = np.random.default_rng(47)
    pts = rng.uniform(0.02, 0.98, size=(50, 4))
    u1, u2, u3, u4 = pts.T

    # star tree rooted at the first variable, then a chain of
    # conditional pairs, written out factor by factor
    f2_1 = bicop_hfunc(c12, u1, u2, "2|1")
    f3_1 = bicop_hfunc(c13, u1, u3, "2|1")
    f4_1 = bicop_hfunc(c14, u1, u4, "2|1")
    f3_12 = bicop_hfunc(c23_1, f2_1, f3_1, "2|1")
    f4_12 = bicop_hfunc(c24_1, f2_1, f4_1, "2|1")
    expected = (bicop_logpdf(c12, u1, u2)
                + bicop_logpdf(c13, u1, u3)
                + bicop_logpdf(c14, u1, u4)
                + bicop_logpdf(c23_1, f2_1, f3_1)
                + bicop_logpdf(c24_1, f2_1, f4_1)
                + bicop_logpdf(c34_12, f3_12, f4_12))
    assert np.max(np.abs(rvine_logpdf(model, pts) - expected)) < 1e-10


def test_gaussian_vine_matches_trivariate_gaussian_copula():
    rho = 0.6
    partial = (rho - rho * rho) / (1.0 - rho * rho)
    model = make_model(3, [
        (0, 1, (), BivCopula("gaussian", 0, rho)),
        (1, 2, (), BivCopula("gaussian", 0, rho)),
        (0, 2, (1,), BivCopula("gaussian", 0, partial)),
    ])
    corr = np.full((3, 3), rho)
    np.fill_diagonal(corr, 1.0)
    inv = np.linalg.inv(corr)
    _, logdet = np.linalg.slogdet(corr)
    rng = np.random.default_rng(53)
    pts = rng.uniform(0.02, 0.98, size=(100, 3))
    z = norm_quantile(pts)
    oracle = -0.5 * logdet - 0.5 * np.einsum(
        "ni,ij,nj->n", z, inv - np.eye(3), z)
    assert np.max(np.abs(rvine_logpdf(model, pts) - oracle)) < 1e-6


def test_vine_density_integrates_to_one():
    pair = make_model(2, [(0, 1, (), BivCopula("clayton", 0, 2.0))])
    u, w = _unit_nodes()
    uu, vv = np.meshgrid(u, u, indexing="ij")
    dens = np.exp(rvine_logpdf(pair, np.column_stack([uu.ravel(), vv.ravel()])))
    assert abs(float(w @ dens.reshape(u.size, u.size) @ w) - 1.0) < 1e-3

    triple = make_model(3, [
        (0, 1, (), BivCopula("gaussian", 0, 0.5)),
        (1, 2, (), BivCopula("gumbel", 0, 1.5)),
        (0, 2, (1,), BivCopula("frank", 0, 2.0)),
    ])
    u, w = _unit_nodes(64)
    grid = np.meshgrid(u, u, u, indexing="ij")
    pts = np.column_stack([g.ravel() for g in grid])
    dens = np.exp(rvine_logpdf(triple, pts)).reshape(u.size, u.size, u.size)
    total = float(np.einsum("i,j,k,ijk->", w, w, w, dens))
    assert abs(total - 1.0) < 1e-3


def test_logpdf_rejects_bad_points():
    model = make_model(2, [(0, 1, (), INDEP)])
    with pytest.raises(DomainError):
        rvine_logpdf(model, np.array([[0.0, 0.5]]))
    with pytest.raises(DataError):
        rvine_logpdf(model, np.array([[0.5, 0.5, 0.5]]))


# -- sampling ---------------------------------------------------------------


def test_independence_vine_sampling_has_uniform_margins():
    edges = [(0, 1, (), INDEP), (1, 2, (), INDEP), (0, 2, (1,), INDEP)]
    model = make_model(3, edges, site_ids=("a", "b", "c"))
    panel = rvine_sample(model, 10000, seed=59)
    assert isinstance(panel, CopulaMatrix)
    assert panel.site_ids == ("a", "b", "c")
    for col in panel.values.T:
        assert _ks_uniform(col) < 2.0 / math.sqrt(10000)
    again = rvine_sample(model, 10000, seed=59)
    assert np.array_equal(panel.values, again.values)


def test_gaussian_edge_tail_dependence_matches_direct_sampler():
    rho = 0.8
    model = make_model(2, [(0, 1, (), BivCopula("gaussian", 0, rho))])
    vine_draws = rvine_sample(model, 1000000, seed=61).values
    direct = sample_gaussian_copula(
        1000000, [[1.0, rho], [rho, 1.0]], seed=67).values
    lam_vine = tail_dep_empirical(vine_draws, 0, 1, 0.95, "UU")
    lam_direct = tail_dep_empirical(direct, 0, 1, 0.95, "UU")
    assert abs(lam_vine - lam_direct) < 0.01


def test_gumbel_edge_tail_dependence_approaches_limit():
    model = make_model(2, [(0, 1, (), BivCopula("gumbel", 0, 2.0))])
    draws = rvine_sample(model, 1000000, seed=71).values
    lam = tail_dep_empirical(draws, 0, 1, 0.999, "UU")
    assert abs(lam - (2.0 - math.sqrt(2.0))) < 0.05


@pytest.mark.parametrize("rotation,corner", [
    (0, "UU"), (90, "UL"), (180, "LL"), (270, "LU"),
])
def test_rotation_moves_tail_mass_to_the_expected_corner(rotation, corner):
    cop = BivCopula("gumbel", rotation, 2.0)
    model = make_model(2, [(0, 1, (), cop)])
    draws = rvine_sample(model, 200000, seed=73 + rotation).values
    lams = {c: tail_dep_empirical(draws, 0, 1, 0.99, c)
            for c in ("UU", "LL", "LU", "UL")}
    assert max(lams, key=lams.get) == corner
    assert lams[corner] > 0.4
    for other, value in lams.items():
        if other != corner:
            assert value < 0.2


def test_sampling_then_fitting_recovers_first_tree():
    model = make_model(3, [
        (0, 1, (), BivCopula("gaussian", 0, 0.7)),
        (1, 2, (), BivCopula("gaussian", 0, 0.5)),
        (0, 2, (1,), BivCopula("gaussian", 0, 0.1)),
    ])
    draws = rvine_sample(model, 10000, seed=79)
    refit = fit_vine(draws)
    first = {e.label(): e.copula for e in refit.structure.trees[0]}
    assert set(first) == {(0, 1, ()), (1, 2, ())}
    for label, rho in (((0, 1, ()), 0.7), ((1, 2, ()), 0.5)):
        cop = first[label]
        assert cop.family == "gaussian"
        # three standard errors of the gaussian correlation estimate
        assert abs(cop.parameter - rho) < 3.0 * (1.0 - rho * rho) / 100.0


def test_serialization_roundtrip_preserves_the_density():
    data = sample_gaussian_copula(
        500, [[1.0, 0.6, 0.3], [0.6, 1.0, 0.5], [0.3, 0.5, 1.0]], seed=83)
    model = fit_vine(data)
    clone = vine_from_dict(vine_to_dict(model))
    assert clone.structure == model.structure
    pts = np.random.default_rng(89).uniform(0.05, 0.95, size=(20, 3))
    assert np.array_equal(rvine_logpdf(model, pts), rvine_logpdf(clone, pts))
