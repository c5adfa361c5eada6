"""Panel containers, marginal transforms, folds, and CSV round-trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from teletails.dataset import (
    CopulaMatrix,
    FoldPlan,
    PanelMatrix,
    SCALE_NORMAL,
    SCALE_RAW,
    kfold_split,
    load_csv,
    marginal_correction,
    normal_scores,
    pseudo_observations,
    save_csv,
)
from teletails.errors import DataError, DegenerateDataError, ParseError
from teletails.special import norm_cdf, norm_quantile


def _ks_uniform(u):
    u = np.sort(np.asarray(u, dtype=float))
    n = u.size
    grid = np.arange(1, n + 1) / n
    return max(np.max(grid - u), np.max(u - (grid - 1.0 / n)))


def _ks_normal(x):
    return _ks_uniform(norm_cdf(np.asarray(x, dtype=float)))


# -- containers ---------------------------------------------------------


def test_panel_matrix_basic():
    p = PanelMatrix([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], ("a", "b"))
    assert p.n_rows == 3 and p.n_sites == 2
    assert p.scale_tag == SCALE_RAW


def test_panel_matrix_rejects_bad_shapes():
    with pytest.raises(DataError):
        PanelMatrix(np.zeros(3), ("a",))
    with pytest.raises(DataError):
        PanelMatrix(np.zeros((2, 3)), ("a", "b"))
    with pytest.raises(DataError):
        PanelMatrix(np.array([[1.0, np.nan]]), ("a", "b"))
    with pytest.raises(DataError):
        PanelMatrix(np.zeros((2, 2)), ("a", "b"), "celsius")


def test_copula_matrix_requires_open_interval():
    CopulaMatrix([[0.2, 0.9]], ("a", "b"))
    with pytest.raises(DataError):
        CopulaMatrix([[0.0, 0.5]], ("a", "b"))
    with pytest.raises(DataError):
        CopulaMatrix([[0.3, 1.0]], ("a", "b"))


def test_site_ids_must_be_unique():
    with pytest.raises(DataError):
        PanelMatrix(np.zeros((2, 2)), ("a", "a"))


# -- CSV ----------------------------------------------------------------


def test_load_csv_basic(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("a,b\n1.0,2.0\n3.5,-4.0\n5.0,6.25\n")
    p = load_csv(f)
    assert p.site_ids == ("a", "b")
    assert p.values.shape == (3, 2)
    assert p.values[1, 1] == -4.0


def test_load_csv_reports_bad_row_index(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("a,b\n1.0,2.0\n3.5\n")
    with pytest.raises(ParseError, match="line 3"):
        load_csv(f)


def test_load_csv_rejects_non_numeric(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("a,b\n1.0,oops\n")
    with pytest.raises(ParseError):
        load_csv(f)


def test_csv_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(3)
    p = PanelMatrix(rng.standard_normal((17, 4)) * 1e3,
                    ("w", "x", "y", "z"))
    f = tmp_path / "p.csv"
    save_csv(p, f)
    back = load_csv(f)
    assert back.site_ids == p.site_ids
    assert np.array_equal(back.values, p.values)


# -- copula-scale transforms --------------------------------------------


def test_pseudo_observations_small_column():
    p = PanelMatrix(np.array([[3.0], [1.0], [2.0]]), ("a",))
    u = pseudo_observations(p)
    assert_allclose(u.values[:, 0], [0.75, 0.25, 0.5])


def test_pseudo_observations_monotone_invariance():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((50, 3))
    p = PanelMatrix(x, ("a", "b", "c"))
    warped = PanelMatrix(np.exp(2.0 * x) + 1.0, ("a", "b", "c"))
    assert np.array_equal(pseudo_observations(p).values,
                          pseudo_observations(warped).values)


def test_pseudo_observations_uniformity():
    rng = np.random.default_rng(5)
    p = PanelMatrix(rng.gamma(2.0, size=(99, 1)), ("a",))
    u = pseudo_observations(p)
    assert _ks_uniform(u.values[:, 0]) < 0.02


def test_pseudo_observations_ties_get_average_rank():
    p = PanelMatrix(np.array([[1.0], [1.0], [2.0]]), ("a",))
    u = pseudo_observations(p)
    assert_allclose(u.values[:, 0], [0.375, 0.375, 0.75])


def test_pseudo_observations_rejects_constant_column():
    p = PanelMatrix(np.ones((5, 1)), ("a",))
    with pytest.raises(DegenerateDataError):
        pseudo_observations(p)


def test_normal_scores_matches_quantile():
    u = CopulaMatrix([[0.1, 0.6], [0.5, 0.975]], ("a", "b"))
    s = normal_scores(u)
    assert s.scale_tag == SCALE_NORMAL
    assert_allclose(s.values, norm_quantile(u.values))


# -- fold plans ---------------------------------------------------------


def test_kfold_singletons():
    plan = kfold_split(10, 10, seed=0)
    sizes = sorted(plan.fold_rows(j).size for j in range(10))
    assert sizes == [1] * 10


def test_kfold_equal_sizes():
    plan = kfold_split(3940, 10, seed=1)
    assert all(plan.fold_rows(j).size == 394 for j in range(10))


def test_kfold_partition_and_complement():
    plan = kfold_split(101, 7, seed=2)
    all_rows = np.concatenate([plan.fold_rows(j) for j in range(7)])
    assert np.array_equal(np.sort(all_rows), np.arange(101))
    for j in range(7):
        merged = np.concatenate([plan.fold_rows(j), plan.train_rows(j)])
        assert np.array_equal(np.sort(merged), np.arange(101))


def test_kfold_deterministic():
    a = kfold_split(57, 5, seed=9)
    b = kfold_split(57, 5, seed=9)
    assert np.array_equal(a.assignments, b.assignments)


def test_kfold_rejects_single_fold():
    with pytest.raises(DataError):
        kfold_split(100, 1, seed=0)
    with pytest.raises(DataError):
        kfold_split(4, 5, seed=0)


@given(st.integers(min_value=4, max_value=120), st.integers(min_value=2, max_value=8),
       st.integers(min_value=0, max_value=1000))
@settings(max_examples=60, deadline=None)
def test_kfold_sizes_differ_by_at_most_one(n, k, seed):
    if k > n:
        return
    plan = kfold_split(n, k, seed)
    sizes = [plan.fold_rows(j).size for j in range(k)]
    assert max(sizes) - min(sizes) <= 1
    assert sum(sizes) == n


def test_fold_plan_validates_assignments():
    with pytest.raises(DataError):
        FoldPlan(4, 2, 0, np.array([0, 0, 0, 3]))
    with pytest.raises(DataError):
        FoldPlan(4, 2, 0, np.array([0, 0, 0, 0]))


# -- marginal correction ------------------------------------------------


def test_marginal_correction_fixed_point():
    n = 40
    grid = norm_quantile(np.arange(1, n + 1) / (n + 1.0))
    rng = np.random.default_rng(4)
    col = grid[rng.permutation(n)]
    p = PanelMatrix(col[:, None], ("a",), SCALE_NORMAL)
    out = marginal_correction(p)
    assert_allclose(out.values[:, 0], col, atol=1e-12)


def test_marginal_correction_preserves_spearman():
    rng = np.random.default_rng(11)
    z = rng.standard_normal((300, 2))
    z[:, 1] = 0.7 * z[:, 0] + 0.3 * z[:, 1]
    p = PanelMatrix(np.exp(z), ("a", "b"))
    out = marginal_correction(p)
    from teletails.depstats import spearman_rho
    before = spearman_rho(p.values[:, 0], p.values[:, 1])
    after = spearman_rho(out.values[:, 0], out.values[:, 1])
    assert abs(before - after) < 1e-12


def test_marginal_correction_normalizes_skewed_column():
    rng = np.random.default_rng(12)
    n = 2000
    p = PanelMatrix(rng.lognormal(size=(n, 1)), ("a",))
    out = marginal_correction(p)
    assert out.scale_tag == SCALE_NORMAL
    assert _ks_normal(out.values[:, 0]) < 2.0 / np.sqrt(n)
