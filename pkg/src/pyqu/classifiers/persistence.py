"""JSON persistence for trained models.

Floats go through ``repr`` round-tripping in the json module, so a reloaded
model reproduces predictions bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from pyqu.classifiers.models import FAMILIES, Model, Tree, validate_hyperparameters

MODEL_FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _payload(model: Model) -> dict:
    st = model.state
    if model.family == "logistic":
        return {
            "mean": st["mean"].tolist(),
            "scale": st["scale"].tolist(),
            "weights": st["weights"].tolist(),
            "bias": float(st["bias"]),
        }
    out = {"trees": [t.to_dict() for t in st["trees"]]}
    if model.family == "gradient_boosting":
        out["init"] = float(st["init"])
    return out


def serialize_model(model: Model) -> bytes:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "family": model.family,
        "qa": model.qa,
        "dim": model.dim,
        "threshold": model.threshold,
        "hyperparameters": model.hyperparameters,
        "payload": _payload(model),
    }
    return json.dumps(doc, sort_keys=True).encode("utf-8")


def deserialize_model(blob: bytes | str) -> Model:
    try:
        doc = json.loads(blob)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must hold a JSON object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format_version {version!r} (expected {MODEL_FORMAT_VERSION})")
    try:
        family = doc["family"]
        if family not in FAMILIES:
            raise ModelFormatError(f"unknown model family {family!r}")
        hp = validate_hyperparameters(family, doc["hyperparameters"])
        dim = int(doc["dim"])
        p = doc["payload"]
        if family == "logistic":
            state = {
                "mean": np.asarray(p["mean"], dtype=np.float64),
                "scale": np.asarray(p["scale"], dtype=np.float64),
                "weights": np.asarray(p["weights"], dtype=np.float64),
                "bias": float(p["bias"]),
            }
            if not all(state[k].shape == (dim,) for k in ("mean", "scale", "weights")):
                raise ModelFormatError("logistic payload does not match dim")
        else:
            trees = [Tree.from_dict(t) for t in p["trees"]]
            if not trees:
                raise ModelFormatError("tree model has no trees")
            if any(int(t.feature.max()) >= dim for t in trees):
                raise ModelFormatError("tree references a feature beyond dim")
            state = {"trees": trees}
            if family == "gradient_boosting":
                state["init"] = float(p["init"])
        return Model(family, hp, dim, state, doc.get("qa"), float(doc.get("threshold", 0.5)))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt model payload: {exc}") from exc


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_bytes(serialize_model(model))


def load_model(path: str | Path) -> Model:
    return deserialize_model(Path(path).read_bytes())
