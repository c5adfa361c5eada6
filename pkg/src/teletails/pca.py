"""Uncentred principal component basis for panel compression.

The basis comes from the singular value decomposition of the site-by-
observation matrix without mean removal, so the origin is kept as the
reference point of the normal-score scale.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateDataError


@dataclass(frozen=True, eq=False)
class PcaBasis:
    """Leading left singular vectors and the full singular spectrum."""

    phi: np.ndarray
    singular_values: np.ndarray
    n_components: int

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        sv = np.asarray(self.singular_values, dtype=float)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "singular_values", sv)
        if phi.ndim != 2 or phi.shape[1] != self.n_components:
            raise DataError("basis shape does not match component count")
        if sv.ndim != 1 or sv.size < self.n_components:
            raise DataError("need at least one singular value per component")


def fit_pca(panel, n_components):
    """Basis of the leading components of the uncentred panel.

    The sign of each column is fixed so that its largest-magnitude entry
    is positive, which makes refits reproducible.
    """
    values = panel.values
    n, d = values.shape
    if not 1 <= n_components <= min(n, d):
        raise ValueError(
            f"component count must lie in [1, {min(n, d)}], got {n_components}")
    u, s, _ = np.linalg.svd(values.T, full_matrices=False)
    phi = u[:, :n_components].copy()
    for col in range(n_components):
        lead = np.argmax(np.abs(phi[:, col]))
        if phi[lead, col] < 0.0:
            phi[:, col] = -phi[:, col]
    return PcaBasis(phi, s, n_components)


def project(basis, values):
    """Least-squares coordinates of rows of `values` in the basis."""
    values = np.asarray(values, dtype=float)
    coords, _, rank, _ = np.linalg.lstsq(basis.phi, values.T, rcond=None)
    if rank < basis.n_components:
        raise DegenerateDataError("basis is rank deficient")
    return coords.T


def reconstruct(basis, coords):
    """Map coordinates back to site space."""
    coords = np.asarray(coords, dtype=float)
    return coords @ basis.phi.T


def explained_variance(basis, n_components=None):
    """Fraction of total squared singular mass in the leading components."""
    m = basis.n_components if n_components is None else n_components
    sv = basis.singular_values
    if not 0 <= m <= sv.size:
        raise ValueError(f"component count must lie in [0, {sv.size}], got {m}")
    if m == 0:
        return 0.0
    total = float(np.sum(sv ** 2))
    if total == 0.0:
        raise DegenerateDataError("all singular values vanish")
    return float(np.sum(sv[:m] ** 2) / total)


def basis_logdet_correction(basis):
    """Density offset for evaluating coordinates instead of site values.

    Minus half the log determinant of the basis Gram matrix; zero for an
    orthonormal basis.
    """
    gram = basis.phi.T @ basis.phi
    sign, logdet = np.linalg.slogdet(gram)
    if sign <= 0.0 or not np.isfinite(logdet):
        raise DegenerateDataError("basis Gram matrix is singular")
    return -0.5 * float(logdet)
