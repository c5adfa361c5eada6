"""Command line front end.

One structured config file drives every command; `--seed` and `--out`
override the matching config fields so a sweep can reuse one file. All
outputs land in the run directory together with a manifest recording
the config hash and library versions, and every file is written
atomically, so a rerun with the same config reproduces each artifact
byte for byte.
"""

import argparse
import hashlib
import platform
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import flow as flow_mod
from . import gmmn as gmmn_mod
from . import vine as vine_mod
from .checkpoint import atomic_write_text, dumps_payload, load_checkpoint, \
    save_checkpoint
from .dataset import PanelMatrix, SCALE_NORMAL, kfold_split, load_csv, \
    marginal_correction, normal_scores, pseudo_observations, save_csv
from .depstats import CORNERS
from .errors import ConfigError, DataError, NumericError
from .evaluation import compare_panels, cv_run, distance_profile, \
    emit_report, load_report
from .geostats import gridbox_area, load_gridboxes
from .models import ModelSpec, PcaFlowModel, build_adapter
from .pca import reconstruct
from .synth import TParams, sample_bivariate_t, sample_gaussian_copula

COMMANDS = ("synth", "transform", "fit", "sample", "metrics", "crossval",
            "report")
_CONFIG_KEYS = {"data", "model", "train", "eval", "sample", "seed", "out_dir"}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="teletails",
        description="Tail-dependence modelling pipeline.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--workers", type=int, default=1,
                        help="fold workers for crossval")
    parser.add_argument("--out", default=None,
                        help="override the config output directory")
    return parser


def _load_config(args):
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at top level")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    config = dict(raw)
    if args.seed is not None:
        config["seed"] = args.seed
    if args.out is not None:
        config["out_dir"] = args.out
    if "seed" not in config:
        raise ConfigError("config needs an explicit 'seed'")
    if "out_dir" not in config:
        raise ConfigError("config needs an 'out_dir'")
    config["seed"] = int(config["seed"])
    return config


def _section(config, name, required=()):
    value = config.get(name)
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section '{name}' must be a mapping")
    for key in required:
        if key not in value:
            raise ConfigError(f"config section '{name}' needs '{key}'")
    return value


def _out_dir(config):
    out = Path(config["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(config, command, out):
    canon = dumps_payload({k: config[k] for k in sorted(config)})
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(canon.encode("utf-8")).hexdigest(),
        "seed": config["seed"],
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "teletails": __version__,
        },
    }
    atomic_write_text(out / "manifest.json", dumps_payload(manifest))


# -- data resolution ----------------------------------------------------


def _synth_copula(spec, seed):
    kind = spec.get("kind")
    n = int(spec.get("n", 0))
    if n < 1:
        raise ConfigError("synth spec needs a positive 'n'")
    if kind == "bivariate_t":
        params = TParams(nu=float(spec.get("nu", 1.0)),
                         rho=float(spec.get("rho", 0.8)))
        return sample_bivariate_t(n, params, seed)
    if kind == "gaussian":
        if "corr" in spec:
            corr = np.asarray(spec["corr"], dtype=float)
        elif "d" in spec:
            d = int(spec["d"])
            rho = float(spec.get("rho", 0.5))
            corr = np.full((d, d), rho)
            np.fill_diagonal(corr, 1.0)
        else:
            raise ConfigError("gaussian synth spec needs 'corr' or 'd'")
        site_ids = spec.get("site_ids")
        return sample_gaussian_copula(n, corr, seed, site_ids=site_ids)
    raise ConfigError(f"unknown synth kind {kind!r}")


def _synth_sampler(spec, seed):
    """Normal-scale draws from the synthetic generator, for oracle runs.

    Seeds fold into the data seed so oracle draws never replay the
    training data.
    """

    def sampler(n, sim_seed):
        child = int(np.random.SeedSequence(
            entropy=[int(seed), int(sim_seed)]).generate_state(1)[0])
        inner = dict(spec, n=n)
        return normal_scores(_synth_copula(inner, child)).values

    return sampler


def _training_panel(config):
    """Resolve the config's data source to a normal-scale panel.

    Synthetic sources map exactly through the normal quantile; files
    default to the rank pipeline unless tagged as already normal.
    """
    data = _section(config, "data")
    if "synth" in data:
        spec = data["synth"]
        seed = int(spec.get("seed", config["seed"]))
        return normal_scores(_synth_copula(spec, seed))
    if "path" not in data:
        raise ConfigError("config section 'data' needs 'path' or 'synth'")
    panel = load_csv(data["path"])
    if data.get("scale", "raw") == SCALE_NORMAL:
        return PanelMatrix(panel.values, panel.site_ids, SCALE_NORMAL)
    return normal_scores(pseudo_observations(panel))


def _site_areas(config, site_ids):
    data = _section(config, "data")
    if "gridboxes" not in data:
        return None, None
    labels, boxes = load_gridboxes(data["gridboxes"])
    if tuple(labels) != tuple(site_ids):
        raise DataError("gridbox sites do not match the data columns")
    areas = np.array([gridbox_area(b) for b in boxes])
    return areas, boxes


def _model_spec(config, need_model=True):
    model = _section(config, "model")
    if "kind" not in model:
        if need_model:
            raise ConfigError("config section 'model' needs 'kind'")
        return None
    options = {k: v for k, v in model.items() if k != "kind"}
    options.update(_section(config, "train"))
    return ModelSpec(model["kind"], options)


def _simulate_model(model, n, seed):
    if isinstance(model, flow_mod.FlowModel):
        return flow_mod.sample(model, n, seed)
    if isinstance(model, gmmn_mod.GmmnModel):
        return gmmn_mod.sample(model, n, seed)
    if isinstance(model, vine_mod.RVineModel):
        return normal_scores(vine_mod.rvine_sample(model, n, seed))
    if isinstance(model, PcaFlowModel):
        coords = flow_mod.sample(model.flow, n, seed).values
        values = reconstruct(model.basis, coords)
        return PanelMatrix(values, model.site_ids, SCALE_NORMAL)
    raise ConfigError(f"cannot sample from {type(model).__name__}")


# -- commands -----------------------------------------------------------


def _cmd_synth(config, args, out):
    data = _section(config, "data", required=("synth",))
    spec = data["synth"]
    seed = int(spec.get("seed", config["seed"]))
    copula = _synth_copula(spec, seed)
    save_csv(copula, out / "synthetic.csv")
    return ["synthetic.csv"]


def _cmd_transform(config, args, out):
    data = _section(config, "data", required=("path",))
    panel = load_csv(data["path"])
    u = pseudo_observations(panel)
    save_csv(u, out / "pseudo.csv")
    save_csv(normal_scores(u), out / "normal.csv")
    return ["pseudo.csv", "normal.csv"]


def _cmd_fit(config, args, out):
    panel = _training_panel(config)
    spec = _model_spec(config)
    if spec.kind == "oracle":
        raise ConfigError("the oracle model has no parameters to fit")
    adapter = build_adapter(spec).fit(panel, config["seed"])
    save_checkpoint(out / "model.json", adapter.model)
    lines = ["epoch,loss"]
    for epoch, loss in enumerate(adapter.history):
        lines.append(f"{epoch},{repr(float(loss))}")
    atomic_write_text(out / "loss.csv", "\n".join(lines) + "\n")
    return ["model.json", "loss.csv"]


def _cmd_sample(config, args, out):
    section = _section(config, "sample", required=("n",))
    checkpoint = section.get("checkpoint", out / "model.json")
    model = load_checkpoint(checkpoint)
    panel = _simulate_model(model, int(section["n"]), config["seed"])
    if section.get("correct_marginals", False):
        panel = marginal_correction(panel)
    save_csv(panel, out / "sample.csv")
    return ["sample.csv"]


def _cmd_metrics(config, args, out):
    section = _section(config, "sample", required=("path",))
    eval_spec = _section(config, "eval")
    held = _training_panel(config)
    sim_raw = load_csv(section["path"])
    sim = PanelMatrix(sim_raw.values, sim_raw.site_ids, SCALE_NORMAL)
    areas, boxes = _site_areas(config, held.site_ids)
    report = compare_panels(held, sim, q=float(eval_spec.get("q", 0.95)),
                            areas=areas)
    emit_report(report, out / "metrics.csv", "csv", boxes=boxes)
    return ["metrics.csv"]


def _cmd_crossval(config, args, out):
    panel = _training_panel(config)
    eval_spec = _section(config, "eval")
    spec = _model_spec(config)
    if spec.kind == "oracle":
        data = _section(config, "data", required=("synth",))
        synth_spec = data["synth"]
        data_seed = int(synth_spec.get("seed", config["seed"]))
        spec = ModelSpec("oracle", dict(
            spec.options, sampler=_synth_sampler(synth_spec, data_seed)))
    k = int(eval_spec.get("k", 10))
    folds = kfold_split(panel.n_rows, k, config["seed"])
    areas, boxes = _site_areas(config, panel.site_ids)
    report = cv_run(
        panel, spec, folds,
        q=float(eval_spec.get("q", 0.95)),
        n_gen=int(eval_spec.get("n_gen", 100000)),
        seed=config["seed"], areas=areas, workers=args.workers)
    fmt = eval_spec.get("format", "csv")
    name = f"report.{fmt}"
    emit_report(report, out / name, fmt, boxes=boxes)
    return [name]


def _cmd_report(config, args, out):
    eval_spec = _section(config, "eval", required=("reference",))
    data = _section(config, "data", required=("gridboxes",))
    fmt = eval_spec.get("format", "csv")
    path = eval_spec.get("report_path", out / f"report.{fmt}")
    report = load_report(path)
    labels, boxes = load_gridboxes(data["gridboxes"])
    if tuple(labels) != tuple(report.site_ids):
        raise DataError("gridbox sites do not match the report")
    profile = distance_profile(report, boxes, eval_spec["reference"],
                               eval_spec.get("bins", 10))
    lines = ["bin_lo,bin_hi,pair_count,site_count," +
             ",".join(["rho"] + [f"lambda_{c}" for c in CORNERS] +
                      [f"alpha_{c}" for c in CORNERS])]
    for b in range(profile.bin_edges.size - 1):
        cells = [repr(float(profile.bin_edges[b])),
                 repr(float(profile.bin_edges[b + 1])),
                 str(int(profile.pair_counts[b])),
                 str(int(profile.site_counts[b])),
                 repr(float(profile.pair_means["rho"][b]))]
        cells += [repr(float(profile.pair_means[f"lambda_{c}"][b]))
                  for c in CORNERS]
        cells += [repr(float(profile.site_means[f"alpha_{c}"][b]))
                  for c in CORNERS]
        lines.append(",".join(cells))
    atomic_write_text(out / "profile.csv", "\n".join(lines) + "\n")
    return ["profile.csv"]


_HANDLERS = {
    "synth": _cmd_synth,
    "transform": _cmd_transform,
    "fit": _cmd_fit,
    "sample": _cmd_sample,
    "metrics": _cmd_metrics,
    "crossval": _cmd_crossval,
    "report": _cmd_report,
}


def run(command, config, args):
    """Execute one command; returns the artifact names it wrote."""
    out = _out_dir(config)
    written = _HANDLERS[command](config, args, out)
    _write_manifest(config, command, out)
    return written


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        written = run(args.command, config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in written:
        print(f"wrote {Path(config['out_dir']) / name}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
