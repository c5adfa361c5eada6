"""Generative models and diagnostics for asymmetric tail dependence."""

__version__ = "0.1.0"

from .dataset import (
    CopulaMatrix,
    FoldPlan,
    PanelMatrix,
    kfold_split,
    load_csv,
    marginal_correction,
    normal_scores,
    pseudo_observations,
    save_csv,
)
from .depstats import (
    CORNERS,
    are_empirical,
    are_profile,
    spearman_matrix,
    tail_dep_empirical,
    tail_dep_matrix,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    NumericError,
    ParseError,
    TeletailsError,
)
from .evaluation import MetricReport, compare_panels, cv_run, \
    distance_profile, emit_report, load_report
from .flow import FlowModel, flow_pull, flow_push, log_density
from .geostats import GridBox, centroid_distance, gridbox_area, load_gridboxes
from .gmmn import GmmnModel, energy_distance_sq
from .models import ModelSpec, PcaFlowModel, build_adapter
from .pca import PcaBasis, basis_logdet_correction, explained_variance, \
    fit_pca, project, reconstruct
from .synth import TParams, analytic_tail_dep, sample_bivariate_t, \
    sample_gaussian_copula
from .train import TrainConfig, gradient_check
from .vine import (
    BivCopula,
    RVineModel,
    RVineStructure,
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
)
from .checkpoint import load_checkpoint, save_checkpoint
