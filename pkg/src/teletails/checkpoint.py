"""Versioned JSON checkpoints with byte-stable, atomic writes.

Parameters are stored raw (pre-activation) so a loaded model is a pure
function of the file. Serialization uses sorted keys and shortest
round-trip float text, which makes save -> load -> save byte-identical
and lets tests compare files directly.
"""

import json
import os
import tempfile

import numpy as np

from .errors import ConfigError
from .flow import FlowModel
from .gmmn import GmmnModel
from .pca import PcaBasis
from .vine import RVineModel, vine_from_dict, vine_to_dict

FORMAT_VERSION = 1


def atomic_write_text(path, text):
    """Write via a temp file and rename so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_payload(payload):
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def _flow_payload(model):
    return {
        "kind": "flow",
        "dim": model.dim,
        "n_layers": model.n_layers,
        "n_bins": model.n_bins,
        "hidden": model.hidden,
        "min_bin": model.min_bin,
        "min_deriv": model.min_deriv,
        "seed": model.seed,
        "site_ids": list(model.site_ids) if model.site_ids else None,
        "train_seed": model.train_seed,
        "train_epochs": model.train_epochs,
        "permutations": [p.tolist() for p in model.permutations],
        "params": [{k: layer[k].tolist() for k in model.PARAM_KEYS}
                   for layer in model.params],
    }


def _flow_restore(payload):
    model = FlowModel(
        dim=payload["dim"], n_layers=payload["n_layers"],
        n_bins=payload["n_bins"], hidden=payload["hidden"],
        min_bin=payload["min_bin"], min_deriv=payload["min_deriv"],
        seed=payload["seed"],
        permutations=[np.asarray(p, dtype=int)
                      for p in payload["permutations"]],
        site_ids=payload["site_ids"])
    for layer, stored in zip(model.params, payload["params"]):
        for key in model.PARAM_KEYS:
            arr = np.asarray(stored[key], dtype=float)
            if arr.shape != layer[key].shape:
                raise ConfigError("parameter shape does not match architecture")
            layer[key] = arr
    model.train_seed = payload["train_seed"]
    model.train_epochs = payload["train_epochs"]
    return model


def _gmmn_payload(model):
    return {
        "kind": "gmmn",
        "dim": model.dim,
        "latent_dim": model.latent_dim,
        "hidden": list(model.hidden),
        "seed": model.seed,
        "site_ids": list(model.site_ids) if model.site_ids else None,
        "train_seed": model.train_seed,
        "train_epochs": model.train_epochs,
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }


def _gmmn_restore(payload):
    model = GmmnModel(dim=payload["dim"], latent_dim=payload["latent_dim"],
                      hidden=payload["hidden"], seed=payload["seed"],
                      site_ids=payload["site_ids"])
    arrays = []
    for w, b in zip(payload["weights"], payload["biases"]):
        arrays.append(np.asarray(w, dtype=float))
        arrays.append(np.asarray(b, dtype=float))
    model.set_param_arrays(arrays)
    model.train_seed = payload["train_seed"]
    model.train_epochs = payload["train_epochs"]
    return model


def _vine_payload(model):
    payload = vine_to_dict(model)
    payload["kind"] = "vine"
    payload["site_ids"] = list(model.site_ids) if model.site_ids else None
    return payload


def _vine_restore(payload):
    model = vine_from_dict(payload)
    if payload.get("site_ids"):
        model = RVineModel(model.structure, tuple(payload["site_ids"]))
    return model


def _basis_payload(basis):
    return {"phi": basis.phi.tolist(),
            "singular_values": basis.singular_values.tolist(),
            "n_components": basis.n_components}


def _basis_restore(payload):
    return PcaBasis(np.asarray(payload["phi"], dtype=float),
                    np.asarray(payload["singular_values"], dtype=float),
                    payload["n_components"])


def save_checkpoint(path, model):
    """Serialize a supported model (or pca+flow composite) to `path`."""
    from .models import PcaFlowModel

    if isinstance(model, FlowModel):
        payload = _flow_payload(model)
    elif isinstance(model, GmmnModel):
        payload = _gmmn_payload(model)
    elif isinstance(model, RVineModel):
        payload = _vine_payload(model)
    elif isinstance(model, PcaFlowModel):
        payload = {"kind": "pca_flow",
                   "basis": _basis_payload(model.basis),
                   "flow": _flow_payload(model.flow),
                   "site_ids": list(model.site_ids) if model.site_ids else None}
    else:
        raise ConfigError(f"cannot checkpoint {type(model).__name__}")
    payload["format_version"] = FORMAT_VERSION
    atomic_write_text(path, dumps_payload(payload))


def load_checkpoint(path):
    """Restore the model stored at `path`."""
    from .models import PcaFlowModel

    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(
            f"checkpoint format {version!r} is not supported (expected "
            f"{FORMAT_VERSION})")
    kind = payload.get("kind")
    if kind == "flow":
        return _flow_restore(payload)
    if kind == "gmmn":
        return _gmmn_restore(payload)
    if kind == "vine":
        return _vine_restore(payload)
    if kind == "pca_flow":
        return PcaFlowModel(_basis_restore(payload["basis"]),
                            _flow_restore(payload["flow"]),
                            tuple(payload["site_ids"])
                            if payload.get("site_ids") else None)
    raise ConfigError(f"unknown checkpoint kind {kind!r}")
