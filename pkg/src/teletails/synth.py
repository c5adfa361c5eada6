"""Synthetic generators with dependence known in closed form.

The bivariate Student-t generator is the benchmark case: its four
tail-dependence corners have an analytic expression through the t cdf,
so estimators and trained models can be scored against exact targets.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CopulaMatrix
from .depstats import CORNERS
from .special import norm_cdf, t_cdf


@dataclass(frozen=True)
class TParams:
    nu: float
    rho: float

    def __post_init__(self):
        if not self.nu > 0.0:
            raise ValueError("degrees of freedom must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("correlation must lie in (-1, 1)")


def sample_bivariate_t(n, params, seed, site_ids=("c1", "c2")):
    """Bivariate t pairs pushed through their own t margins to (0, 1)."""
    if n < 1:
        raise ValueError("sample count must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal((n, 2))
    z[:, 1] = params.rho * z[:, 0] + math.sqrt(1.0 - params.rho ** 2) * z[:, 1]
    chi2 = rng.chisquare(params.nu, size=n)
    t = z * np.sqrt(params.nu / chi2)[:, None]
    u = t_cdf(t, params.nu)
    u = np.clip(u, 1e-15, 1.0 - 1e-15)
    return CopulaMatrix(u, site_ids)


def analytic_tail_dep(params, corner):
    """Exact corner tail dependence of the bivariate t copula."""
    if corner not in CORNERS:
        raise ValueError(f"corner must be one of {CORNERS}")
    rho = params.rho if corner in ("UU", "LL") else -params.rho
    arg = -math.sqrt((params.nu + 1.0) * (1.0 - rho) / (1.0 + rho))
    return 2.0 * float(t_cdf(arg, params.nu + 1.0))


def sample_gaussian_copula(n, corr, seed, site_ids=None):
    """Gaussian copula draws via Cholesky and the normal cdf."""
    if n < 1:
        raise ValueError("sample count must be positive")
    corr = np.asarray(corr, dtype=float)
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
        raise ValueError("correlation matrix must be square")
    if not np.allclose(corr, corr.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must have unit diagonal")
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise ValueError("correlation matrix must be positive definite") from exc
    d = corr.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal((n, d)) @ chol.T
    u = np.clip(norm_cdf(z), 1e-15, 1.0 - 1e-15)
    ids = tuple(site_ids) if site_ids else tuple(f"c{i + 1}" for i in range(d))
    return CopulaMatrix(u, ids)
