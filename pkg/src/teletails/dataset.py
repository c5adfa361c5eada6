"""Panel containers and marginal transforms.

A panel holds one column per site and one row per observation. Columns
are moved between three scales: raw values, copula scale (ranks mapped
into the open unit interval) and normal scores.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import DataError, DegenerateDataError, ParseError
from .special import norm_quantile

SCALE_RAW = "raw"
SCALE_NORMAL = "normal"


@dataclass(frozen=True, eq=False)
class PanelMatrix:
    """Numeric panel: rows are observations, columns are sites."""

    values: np.ndarray
    site_ids: tuple
    scale_tag: str = SCALE_RAW

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "site_ids", tuple(str(s) for s in self.site_ids))
        if values.ndim != 2:
            raise DataError("panel values must be a 2-d array")
        n, d = values.shape
        if n < 2 or d < 1:
            raise DataError(f"panel needs at least 2 rows and 1 column, got {n}x{d}")
        if len(self.site_ids) != d:
            raise DataError("site label count does not match column count")
        if len(set(self.site_ids)) != d:
            raise DataError("site labels must be unique")
        if not np.all(np.isfinite(values)):
            raise DataError("panel values must all be finite")
        if self.scale_tag not in (SCALE_RAW, SCALE_NORMAL):
            raise DataError(f"unknown scale tag {self.scale_tag!r}")

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_sites(self):
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class CopulaMatrix:
    """Panel on the copula scale: every entry strictly inside (0, 1)."""

    values: np.ndarray
    site_ids: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "site_ids", tuple(str(s) for s in self.site_ids))
        if values.ndim != 2:
            raise DataError("copula values must be a 2-d array")
        if len(self.site_ids) != values.shape[1]:
            raise DataError("site label count does not match column count")
        if len(set(self.site_ids)) != values.shape[1]:
            raise DataError("site labels must be unique")
        if values.size and not np.all((values > 0.0) & (values < 1.0)):
            raise DataError("copula values must lie strictly inside (0, 1)")

    @property
    def n_rows(self):
        return self.values.shape[0]

    @property
    def n_sites(self):
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Assignment of rows to cross-validation folds."""

    n_rows: int
    k: int
    seed: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        assignments = np.asarray(self.assignments, dtype=int)
        object.__setattr__(self, "assignments", assignments)
        if assignments.shape != (self.n_rows,):
            raise DataError("fold assignments must cover every row exactly once")
        if not (2 <= self.k <= self.n_rows):
            raise DataError(f"fold count must satisfy 2 <= k <= n, got k={self.k}")
        counts = np.bincount(assignments, minlength=self.k)
        if assignments.min() < 0 or assignments.max() >= self.k:
            raise DataError("fold labels out of range")
        if counts.max() - counts.min() > 1:
            raise DataError("fold sizes may differ by at most one")

    def fold_rows(self, j):
        """Row indices of fold j, ascending."""
        return np.flatnonzero(self.assignments == j)

    def train_rows(self, j):
        """Row indices outside fold j, ascending."""
        return np.flatnonzero(self.assignments != j)


def load_csv(path):
    """Read a comma separated panel with a single header row of site labels.

    Every row must have the same number of fields as the header and every
    cell must parse as a finite float.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise ParseError(f"{path}: file is empty")
    header = [h.strip() for h in lines[0].split(",")]
    if any(h == "" for h in header):
        raise ParseError(f"{path}: blank site label in header")
    d = len(header)
    rows = []
    for ridx, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != d:
            raise ParseError(
                f"{path}: line {ridx} has {len(fields)} fields, expected {d}")
        row = np.empty(d)
        for cidx, cell in enumerate(fields):
            try:
                row[cidx] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: line {ridx}, column {header[cidx]!r}: "
                    f"cannot parse {cell.strip()!r}") from None
            if not np.isfinite(row[cidx]):
                raise ParseError(
                    f"{path}: line {ridx}, column {header[cidx]!r}: "
                    "non-finite value")
        rows.append(row)
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least 2 data rows, got {len(rows)}")
    return PanelMatrix(np.array(rows), tuple(header), SCALE_RAW)


def save_csv(panel, path):
    """Write a panel or copula matrix; floats use shortest exact form."""
    values = panel.values
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(panel.site_ids) + "\n")
        for row in values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _column_ranks(values):
    """Average ranks per column, ties shared."""
    return np.apply_along_axis(lambda c: rankdata(c, method="average"), 0, values)


def pseudo_observations(panel):
    """Map each column to the copula scale through ranks over (n + 1).

    Ties receive their average rank. A constant column has no usable
    ranking and is rejected.
    """
    values = panel.values
    n = values.shape[0]
    spans = values.max(axis=0) - values.min(axis=0)
    flat = np.flatnonzero(spans == 0.0)
    if flat.size:
        raise DegenerateDataError(
            f"constant column {panel.site_ids[flat[0]]!r} cannot be ranked")
    u = _column_ranks(values) / (n + 1.0)
    return CopulaMatrix(u, panel.site_ids)


def normal_scores(copula):
    """Map copula scale values through the standard normal quantile."""
    scores = norm_quantile(copula.values)
    return PanelMatrix(scores, copula.site_ids, SCALE_NORMAL)


def kfold_split(n, k, seed):
    """Randomly assign n rows to k folds whose sizes differ by at most one."""
    if not (2 <= k <= n):
        raise DataError(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignments = np.empty(n, dtype=int)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    start = 0
    for j, size in enumerate(sizes):
        assignments[perm[start:start + size]] = j
        start += size
    return FoldPlan(n, k, seed, assignments)


def marginal_correction(panel):
    """Replace each column by exact normal scores of its ranks.

    Strictly monotone per column, so rank statistics are untouched; the
    output margins sit exactly on the normal-score grid.
    """
    u = _column_ranks(panel.values) / (panel.values.shape[0] + 1.0)
    return PanelMatrix(norm_quantile(u), panel.site_ids, SCALE_NORMAL)
