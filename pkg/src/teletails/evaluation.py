"""Cross-validated dependence diagnostics and report files.

For every fold the model trains on the complement, simulates a large
sample, and both sides move to the uniform scale through the standard
normal cdf before rank statistics are taken. The report collects
held-out-minus-simulated differences, averaged over folds, for the
pairwise statistics (Spearman rho, four tail corners) and the per-site
exceedance radii, plus held-out log-likelihood where the model has a
density.
"""

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .checkpoint import atomic_write_text, dumps_payload
from .dataset import PanelMatrix
from .depstats import CORNERS, are_profile, spearman_matrix, tail_dep_matrix
from .errors import ConfigError, DataError, InsufficientDataError
from .geostats import centroid_distance
from .models import build_adapter
from .special import norm_cdf

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class MetricReport:
    site_ids: tuple
    pairs: tuple                 # ((i, j) with i < j, ...)
    rho_diff: np.ndarray         # (n_pairs,)
    lambda_diff: dict            # corner -> (n_pairs,)
    alpha_diff: dict             # corner -> (d,)
    loglik: tuple                # per-fold values, or () when undefined
    q: float
    n_gen: int
    n_folds: int
    fold_seed: int
    model_id: str

    def __post_init__(self):
        d = len(self.site_ids)
        expected = tuple(itertools.combinations(range(d), 2))
        if tuple(self.pairs) != expected:
            raise DataError("report must cover each pair exactly once")
        if self.rho_diff.shape != (len(expected),):
            raise DataError("rho difference length mismatch")
        if np.any(np.abs(self.rho_diff) > 2.0):
            raise DataError("rho differences must lie in [-2, 2]")
        for corner in CORNERS:
            lam = self.lambda_diff[corner]
            if lam.shape != (len(expected),):
                raise DataError("lambda difference length mismatch")
            if np.any(np.abs(lam) > 1.0):
                raise DataError("lambda differences must lie in [-1, 1]")
            if self.alpha_diff[corner].shape != (d,):
                raise DataError("alpha difference length mismatch")


def _pair_stats(u, q, areas):
    d = u.shape[1]
    idx = np.triu_indices(d, k=1)
    rho = spearman_matrix(u)[idx]
    lam = {c: tail_dep_matrix(u, q, c)[idx] for c in CORNERS}
    alpha = {c: are_profile(u, areas, q, c) for c in CORNERS}
    return rho, lam, alpha


def cv_run(data, model_spec, folds, q=0.95, n_gen=100000, seed=0, areas=None,
           workers=1):
    """Fold-averaged statistic differences for one model family.

    `areas` weights the exceedance radii; without grid geometry each
    site counts one unit circle so radii stay order one.
    """
    if not isinstance(data, PanelMatrix):
        raise DataError("cross-validation needs a PanelMatrix")
    if folds.n_rows != data.n_rows:
        raise DataError("fold plan does not match the data")
    d = data.n_sites
    areas = np.full(d, math.pi) if areas is None else np.asarray(areas, dtype=float)
    if areas.shape != (d,):
        raise DataError("need one area per site")
    for j in range(folds.k):
        n_fold = folds.fold_rows(j).size
        if int((1.0 - q) * n_fold) < 1:
            raise InsufficientDataError(
                f"fold {j} has {n_fold} rows, too few for q={q}")

    def one_fold(j):
        train_panel = PanelMatrix(data.values[folds.train_rows(j)],
                                  data.site_ids, data.scale_tag)
        held_panel = PanelMatrix(data.values[folds.fold_rows(j)],
                                 data.site_ids, data.scale_tag)
        fit_seed = int(np.random.SeedSequence(
            entropy=seed, spawn_key=(j, 0)).generate_state(1)[0])
        sim_seed = int(np.random.SeedSequence(
            entropy=seed, spawn_key=(j, 1)).generate_state(1)[0])
        adapter = build_adapter(model_spec).fit(train_panel, fit_seed)
        sim_panel = adapter.simulate(n_gen, sim_seed)
        u_held = norm_cdf(held_panel.values)
        u_sim = norm_cdf(sim_panel.values)
        held_stats = _pair_stats(u_held, q, areas)
        sim_stats = _pair_stats(u_sim, q, areas)
        ll = adapter.loglik(held_panel) if adapter.has_density else None
        return held_stats, sim_stats, ll

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_fold, range(folds.k)))
    else:
        results = [one_fold(j) for j in range(folds.k)]

    n_pairs = d * (d - 1) // 2
    rho_sum = np.zeros(n_pairs)
    lam_sum = {c: np.zeros(n_pairs) for c in CORNERS}
    alpha_sum = {c: np.zeros(d) for c in CORNERS}
    logliks = []
    for held_stats, sim_stats, ll in results:
        rho_sum += held_stats[0] - sim_stats[0]
        for c in CORNERS:
            lam_sum[c] += held_stats[1][c] - sim_stats[1][c]
            alpha_sum[c] += held_stats[2][c] - sim_stats[2][c]
        if ll is not None:
            logliks.append(float(ll))
    k = folds.k
    return MetricReport(
        site_ids=data.site_ids,
        pairs=tuple(itertools.combinations(range(d), 2)),
        rho_diff=rho_sum / k,
        lambda_diff={c: lam_sum[c] / k for c in CORNERS},
        alpha_diff={c: alpha_sum[c] / k for c in CORNERS},
        loglik=tuple(logliks),
        q=q, n_gen=n_gen, n_folds=k, fold_seed=folds.seed,
        model_id=model_spec.kind)


def compare_panels(held_panel, sim_panel, q=0.95, areas=None,
                   model_id="sample"):
    """Single-split statistic differences between two normal-scale panels."""
    if held_panel.site_ids != sim_panel.site_ids:
        raise DataError("panels cover different sites")
    d = held_panel.n_sites
    areas = np.full(d, math.pi) if areas is None else np.asarray(areas, dtype=float)
    if areas.shape != (d,):
        raise DataError("need one area per site")
    if int((1.0 - q) * held_panel.n_rows) < 1:
        raise InsufficientDataError(
            f"{held_panel.n_rows} rows is too few for q={q}")
    held_stats = _pair_stats(norm_cdf(held_panel.values), q, areas)
    sim_stats = _pair_stats(norm_cdf(sim_panel.values), q, areas)
    return MetricReport(
        site_ids=held_panel.site_ids,
        pairs=tuple(itertools.combinations(range(d), 2)),
        rho_diff=held_stats[0] - sim_stats[0],
        lambda_diff={c: held_stats[1][c] - sim_stats[1][c] for c in CORNERS},
        alpha_diff={c: held_stats[2][c] - sim_stats[2][c] for c in CORNERS},
        loglik=(),
        q=q, n_gen=sim_panel.n_rows, n_folds=1, fold_seed=0,
        model_id=model_id)


# -- distance binning ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class DistanceProfile:
    bin_edges: np.ndarray
    pair_counts: np.ndarray
    pair_means: dict            # "rho" and "lambda_<corner>" -> (B,)
    site_counts: np.ndarray
    site_means: dict            # "alpha_<corner>" -> (B,)


def distance_profile(report, boxes, reference, bins):
    """Bin the report's statistics by great-circle distance.

    Pairwise statistics bin on the distance between the two sites;
    per-site radii bin on the distance to the `reference` site (given
    as a site id or column index). `bins` is a bin count over the
    observed range or an explicit edge array.
    """
    d = len(report.site_ids)
    if len(boxes) != d:
        raise DataError("need exactly one gridbox per site")
    if isinstance(reference, str):
        if reference not in report.site_ids:
            raise DataError(f"unknown reference site {reference!r}")
        ref = report.site_ids.index(reference)
    else:
        ref = int(reference)
        if not 0 <= ref < d:
            raise DataError("reference index out of range")

    pair_dist = np.array([centroid_distance(boxes[i], boxes[j])
                          for i, j in report.pairs])
    site_dist = np.array([centroid_distance(boxes[i], boxes[ref])
                          for i in range(d)])
    if np.isscalar(bins):
        top = float(max(pair_dist.max(), site_dist.max()))
        edges = np.linspace(0.0, np.nextafter(top, np.inf), int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ConfigError("bin edges must be increasing with length >= 2")

    def binned(dists, values):
        which = np.digitize(dists, edges) - 1
        inside = (which >= 0) & (which < edges.size - 1)
        counts = np.bincount(which[inside], minlength=edges.size - 1)
        means = np.full(edges.size - 1, np.nan)
        for b in range(edges.size - 1):
            sel = inside & (which == b)
            if np.any(sel):
                means[b] = float(np.mean(values[sel]))
        return counts, means

    pair_means = {}
    pair_counts, pair_means["rho"] = binned(pair_dist, report.rho_diff)
    for c in CORNERS:
        pair_means[f"lambda_{c}"] = binned(pair_dist, report.lambda_diff[c])[1]
    site_means = {}
    site_counts = None
    for c in CORNERS:
        site_counts, site_means[f"alpha_{c}"] = binned(
            site_dist, report.alpha_diff[c])
    return DistanceProfile(edges, pair_counts, pair_means,
                           site_counts, site_means)


# -- report files -------------------------------------------------------

_CSV_HEADER = ("metric", "corner", "i", "j_or_site", "mean_diff", "n_folds",
               "distance_km")
_META_PARSE = {"schema_version": int, "q": float, "n_gen": int,
               "n_folds": int, "fold_seed": int, "model_id": str}


def _report_rows(report, boxes):
    dist = lambda i, j: "" if boxes is None else \
        repr(float(centroid_distance(boxes[i], boxes[j])))
    rows = []
    for p, (i, j) in enumerate(report.pairs):
        rows.append(("rho", "", report.site_ids[i], report.site_ids[j],
                     report.rho_diff[p], dist(i, j)))
        for c in CORNERS:
            rows.append(("lambda", c, report.site_ids[i], report.site_ids[j],
                         report.lambda_diff[c][p], dist(i, j)))
    for s in range(len(report.site_ids)):
        for c in CORNERS:
            rows.append(("alpha", c, "", report.site_ids[s],
                         report.alpha_diff[c][s], ""))
    for fold, value in enumerate(report.loglik):
        rows.append(("loglik", "", str(fold), "", value, ""))
    return rows


def emit_report(report, path, fmt="csv", boxes=None):
    """Write the report losslessly as CSV rows or mirrored JSON.

    With `boxes` the CSV pair rows carry the centroid distance as a
    convenience column; it is ignored on load.
    """
    if boxes is not None and len(boxes) != len(report.site_ids):
        raise DataError("need exactly one gridbox per site")
    if fmt == "csv":
        lines = [",".join(_CSV_HEADER)]
        for name, value in _report_meta(report).items():
            lines.append(",".join(("meta", name, "", "", str(value), "", "")))
        for metric, corner, a, b, value, dist in _report_rows(report, boxes):
            lines.append(",".join((metric, corner, a, b, repr(float(value)),
                                   str(report.n_folds), dist)))
        atomic_write_text(path, "\n".join(lines) + "\n")
    elif fmt == "json":
        payload = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "meta": _report_meta(report),
            "site_ids": list(report.site_ids),
            "rho_diff": report.rho_diff.tolist(),
            "lambda_diff": {c: report.lambda_diff[c].tolist()
                            for c in CORNERS},
            "alpha_diff": {c: report.alpha_diff[c].tolist()
                           for c in CORNERS},
            "loglik": list(report.loglik),
        }
        if boxes is not None:
            payload["distance_km"] = {
                f"{report.site_ids[i]}:{report.site_ids[j]}":
                    float(centroid_distance(boxes[i], boxes[j]))
                for i, j in report.pairs}
        atomic_write_text(path, dumps_payload(payload))
    else:
        raise ConfigError("format must be 'csv' or 'json'")


def _report_meta(report):
    return {"schema_version": REPORT_SCHEMA_VERSION, "q": report.q,
            "n_gen": report.n_gen, "n_folds": report.n_folds,
            "fold_seed": report.fold_seed, "model_id": report.model_id}


def load_report(path):
    """Read back a report written by `emit_report` (either format)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        if payload.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise ConfigError("unrecognized report schema version")
        meta = payload["meta"]
        site_ids = tuple(payload["site_ids"])
        d = len(site_ids)
        return MetricReport(
            site_ids=site_ids,
            pairs=tuple(itertools.combinations(range(d), 2)),
            rho_diff=np.asarray(payload["rho_diff"], dtype=float),
            lambda_diff={c: np.asarray(payload["lambda_diff"][c], dtype=float)
                         for c in CORNERS},
            alpha_diff={c: np.asarray(payload["alpha_diff"][c], dtype=float)
                        for c in CORNERS},
            loglik=tuple(payload["loglik"]),
            q=meta["q"], n_gen=meta["n_gen"], n_folds=meta["n_folds"],
            fold_seed=meta["fold_seed"], model_id=meta["model_id"])
    return _load_csv_report(text)


def _load_csv_report(text):
    reader = csv.reader(text.splitlines())
    header = next(reader)
    if tuple(header) != _CSV_HEADER:
        raise ConfigError("unrecognized report header")
    meta = {}
    rho = {}
    lam = {c: {} for c in CORNERS}
    alpha = {c: {} for c in CORNERS}
    loglik = {}
    site_order = []
    for metric, corner, a, b, value, _n_folds, _dist in reader:
        if metric == "meta":
            meta[corner] = _META_PARSE[corner](value)
            continue
        if metric == "rho":
            rho[(a, b)] = float(value)
        elif metric == "lambda":
            lam[corner][(a, b)] = float(value)
        elif metric == "alpha":
            alpha[corner][b] = float(value)
            if b not in site_order:
                site_order.append(b)
        elif metric == "loglik":
            loglik[int(a)] = float(value)
        else:
            raise ConfigError(f"unknown metric row {metric!r}")
    if meta.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ConfigError("unrecognized report schema version")
    site_ids = tuple(site_order)
    d = len(site_ids)
    pairs = tuple(itertools.combinations(range(d), 2))
    key = lambda i, j: (site_ids[i], site_ids[j])
    return MetricReport(
        site_ids=site_ids,
        pairs=pairs,
        rho_diff=np.array([rho[key(i, j)] for i, j in pairs]),
        lambda_diff={c: np.array([lam[c][key(i, j)] for i, j in pairs])
                     for c in CORNERS},
        alpha_diff={c: np.array([alpha[c][s] for s in site_ids])
                    for c in CORNERS},
        loglik=tuple(loglik[i] for i in sorted(loglik)),
        q=meta["q"], n_gen=meta["n_gen"], n_folds=meta["n_folds"],
        fold_seed=meta["fold_seed"], model_id=meta["model_id"])
