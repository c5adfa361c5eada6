"""Rank correlations, empirical tail dependence and exceedance radii.

Tail corners are two-letter codes. For a pair statistic on sites (i, j),
the first letter names the tail in which site i must fall and the second
letter the tail of the conditioning site j. For the radius statistic the
first letter names the tail counted across sites and the second letter
the tail of the conditioning site.
"""

import math

import numpy as np
from scipy.stats import kendalltau, rankdata

from .errors import DegenerateDataError, InsufficientDataError

CORNERS = ("UU", "LL", "LU", "UL")


def _as_values(u):
    return u.values if hasattr(u, "values") else np.asarray(u, dtype=float)


def _check_corner(corner):
    if corner not in CORNERS:
        raise ValueError(f"corner must be one of {CORNERS}, got {corner!r}")


def _order_stat_index(q, n):
    # floor(q * n) with a guard against float droop at exact integers
    return int(math.floor(q * n + 1e-9))


def _tail_denominator(n, q):
    # n (1 - q), snapped to the integer it represents at exact levels
    den = n * (1.0 - q)
    return round(den) if abs(den - round(den)) < 1e-6 else den


def _check_q(q, n):
    if not 0.5 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0.5, 1), got {q}")
    if _order_stat_index(1.0 - q, n) < 1:
        raise InsufficientDataError(
            f"level q={q} leaves no exceedances at n={n} rows")


def exceedance_masks(values, q):
    """Boolean upper and lower exceedance indicators per column.

    Upper: strictly above the floor(q n)-th ascending order statistic.
    Lower: at or below the floor((1 - q) n)-th ascending order statistic.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    _check_q(q, n)
    k_up = _order_stat_index(q, n)
    k_lo = _order_stat_index(1.0 - q, n)
    part = np.partition(values, (k_lo - 1, k_up - 1), axis=0)
    up_thr = part[k_up - 1]
    lo_thr = part[k_lo - 1]
    return values > up_thr, values <= lo_thr


def spearman_rho(x, y):
    """Rank correlation: Pearson correlation of average ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if x.size < 3:
        raise InsufficientDataError("rank correlation needs at least 3 rows")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateDataError("constant input has no rank correlation")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    return float(np.corrcoef(rx, ry)[0, 1])


def kendall_tau(x, y):
    """Kendall rank correlation with tie correction."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if x.size < 2:
        raise InsufficientDataError("rank correlation needs at least 2 rows")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateDataError("constant input has no rank correlation")
    return float(kendalltau(x, y).statistic)


def tail_dep_empirical(u, i, j, q, corner):
    """Empirical tail dependence of sites (i, j) at level q.

    Counts rows where both margins exceed their order-statistic
    thresholds for the requested corner, scaled by n (1 - q) and capped
    at one.
    """
    values = _as_values(u)
    _check_corner(corner)
    up, low = exceedance_masks(values, q)
    first = up[:, i] if corner[0] == "U" else low[:, i]
    second = up[:, j] if corner[1] == "U" else low[:, j]
    n = values.shape[0]
    count = int(np.count_nonzero(first & second))
    return min(count / _tail_denominator(n, q), 1.0)


def tail_dep_matrix(u, q, corner):
    """All-pairs empirical tail dependence; entry (i, j) conditions on j."""
    values = _as_values(u)
    _check_corner(corner)
    up, low = exceedance_masks(values, q)
    first = (up if corner[0] == "U" else low).astype(float)
    second = (up if corner[1] == "U" else low).astype(float)
    n = values.shape[0]
    counts = first.T @ second
    return np.minimum(counts / _tail_denominator(n, q), 1.0)


def are_empirical(u, areas, j, q, corner):
    """Average radius of exceedance conditioned on site j.

    For each row where the conditioning site exceeds, the exceeding
    sites' areas are summed and converted to the radius of the disc with
    that area; the statistic is the mean radius over conditioning rows.
    """
    values = _as_values(u)
    areas = np.asarray(areas, dtype=float)
    _check_corner(corner)
    if areas.shape != (values.shape[1],):
        raise ValueError("need one area per site")
    if np.any(areas < 0.0):
        raise ValueError("areas must be nonnegative")
    up, low = exceedance_masks(values, q)
    counted = up if corner[0] == "U" else low
    cond = up[:, j] if corner[1] == "U" else low[:, j]
    if not np.any(cond):
        raise InsufficientDataError("no conditioning exceedances at this level")
    radii = np.sqrt(counted[cond] @ areas / math.pi)
    return float(radii.mean())


def are_profile(u, areas, q, corner):
    """Average radius of exceedance for every conditioning site at once."""
    values = _as_values(u)
    areas = np.asarray(areas, dtype=float)
    _check_corner(corner)
    if areas.shape != (values.shape[1],):
        raise ValueError("need one area per site")
    up, low = exceedance_masks(values, q)
    counted = up if corner[0] == "U" else low
    cond = (up if corner[1] == "U" else low).astype(float)
    radii = np.sqrt(counted @ areas / math.pi)
    counts = cond.sum(axis=0)
    if np.any(counts == 0):
        raise InsufficientDataError("no conditioning exceedances at this level")
    return (radii @ cond) / counts


def spearman_matrix(u):
    """All-pairs rank correlation matrix."""
    values = _as_values(u)
    if np.any(np.ptp(values, axis=0) == 0.0):
        raise DegenerateDataError("constant column has no rank correlation")
    ranks = np.apply_along_axis(lambda c: rankdata(c, method="average"), 0, values)
    return np.corrcoef(ranks, rowvar=False)
