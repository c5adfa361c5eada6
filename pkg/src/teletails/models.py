"""Uniform fit/simulate/loglik adapters over the generative models.

The cross-validation harness only needs three verbs; each adapter maps
them onto one model family. All adapters speak the normal-score scale:
they train on normal scores, simulate normal scores, and report
held-out log-likelihood on that scale, so results are directly
comparable across families.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import flow as flow_mod
from . import gmmn as gmmn_mod
from . import vine as vine_mod
from .dataset import PanelMatrix, SCALE_NORMAL, normal_scores, pseudo_observations
from .errors import ConfigError
from .pca import PcaBasis, basis_logdet_correction, fit_pca, project, reconstruct
from .special import norm_cdf
from .train import TrainConfig, train

MODEL_KINDS = ("flow", "pca_flow", "gmmn", "vine", "oracle")

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model kind must be one of {MODEL_KINDS}")


@dataclass
class PcaFlowModel:
    """Flow over leading principal-component coordinates."""

    basis: PcaBasis
    flow: "flow_mod.FlowModel"
    site_ids: tuple = None


def build_adapter(spec):
    if spec.kind == "flow":
        return _FlowAdapter(spec.options)
    if spec.kind == "pca_flow":
        return _PcaFlowAdapter(spec.options)
    if spec.kind == "gmmn":
        return _GmmnAdapter(spec.options)
    if spec.kind == "vine":
        return _VineAdapter(spec.options)
    if spec.kind == "oracle":
        return _OracleAdapter(spec.options)
    raise ConfigError(f"unknown model kind {spec.kind!r}")


def _opt(options, key, default):
    return options.get(key, default)


def _train_config(options, seed):
    return TrainConfig(
        n_epochs=int(_opt(options, "n_epochs", 10)),
        batch_size=int(_opt(options, "batch_size", 100)),
        lr=float(_opt(options, "lr", 1e-4)),
        seed=seed)


class _FlowAdapter:
    name = "flow"
    has_density = True

    def __init__(self, options):
        self.options = dict(options)
        self.model = None
        self.history = ()

    def fit(self, panel, seed):
        o = self.options
        self.model = flow_mod.FlowModel(
            dim=panel.n_sites,
            n_layers=int(_opt(o, "n_layers", 4)),
            n_bins=int(_opt(o, "n_bins", 8)),
            hidden=int(_opt(o, "hidden", 32)),
            seed=int(_opt(o, "model_seed", seed)),
            site_ids=panel.site_ids)
        self.history = train(self.model, panel.values, _train_config(o, seed))
        return self

    def simulate(self, n, seed):
        return flow_mod.sample(self.model, n, seed)

    def loglik(self, panel):
        return float(np.sum(flow_mod.log_density(self.model, panel.values)))


class _PcaFlowAdapter:
    name = "pca_flow"
    has_density = True

    def __init__(self, options):
        self.options = dict(options)
        self.model = None
        self.history = ()

    def fit(self, panel, seed):
        o = self.options
        n_components = int(_opt(o, "n_components", 25))
        basis = fit_pca(panel, n_components)
        coords = project(basis, panel.values)
        fm = flow_mod.FlowModel(
            dim=n_components,
            n_layers=int(_opt(o, "n_layers", 4)),
            n_bins=int(_opt(o, "n_bins", 8)),
            hidden=int(_opt(o, "hidden", 32)),
            seed=int(_opt(o, "model_seed", seed)))
        self.history = train(fm, coords, _train_config(o, seed))
        self.model = PcaFlowModel(basis, fm, panel.site_ids)
        return self

    def simulate(self, n, seed):
        coords = flow_mod.sample(self.model.flow, n, seed).values
        values = reconstruct(self.model.basis, coords)
        return PanelMatrix(values, self.model.site_ids, SCALE_NORMAL)

    def loglik(self, panel):
        coords = project(self.model.basis, panel.values)
        per_row = flow_mod.log_density(self.model.flow, coords)
        correction = basis_logdet_correction(self.model.basis)
        return float(np.sum(per_row + correction))


class _GmmnAdapter:
    name = "gmmn"
    has_density = False

    def __init__(self, options):
        self.options = dict(options)
        self.model = None
        self.history = ()

    def fit(self, panel, seed):
        o = self.options
        self.model = gmmn_mod.GmmnModel(
            dim=panel.n_sites,
            latent_dim=int(_opt(o, "latent_dim", panel.n_sites)),
            hidden=_opt(o, "hidden", None),
            seed=int(_opt(o, "model_seed", seed)),
            site_ids=panel.site_ids)
        self.history = train(self.model, panel.values, _train_config(o, seed))
        return self

    def simulate(self, n, seed):
        return gmmn_mod.sample(self.model, n, seed)

    def loglik(self, panel):
        return None


class _VineAdapter:
    name = "vine"
    has_density = True

    def __init__(self, options):
        self.options = dict(options)
        self.model = None
        self.history = ()

    def fit(self, panel, seed):
        u = pseudo_observations(panel)
        self.model = vine_mod.fit_vine(u)
        return self

    def simulate(self, n, seed):
        return normal_scores(vine_mod.rvine_sample(self.model, n, seed))

    def loglik(self, panel):
        y = panel.values
        u = np.clip(norm_cdf(y), 1e-12, 1.0 - 1e-12)
        copula_part = vine_mod.rvine_logpdf(self.model, u)
        margin_part = np.sum(-0.5 * y * y - 0.5 * _LOG_2PI, axis=1)
        return float(np.sum(copula_part + margin_part))


class _OracleAdapter:
    """Simulator stand-in: the data generator itself, for harness checks."""

    name = "oracle"
    has_density = False

    def __init__(self, options):
        if "sampler" not in options:
            raise ConfigError("oracle model needs a 'sampler' option")
        self.sampler = options["sampler"]
        self.site_ids = None
        self.history = ()

    def fit(self, panel, seed):
        self.site_ids = panel.site_ids
        return self

    def simulate(self, n, seed):
        values = np.asarray(self.sampler(n, seed), dtype=float)
        return PanelMatrix(values, self.site_ids, SCALE_NORMAL)

    def loglik(self, panel):
        return None
