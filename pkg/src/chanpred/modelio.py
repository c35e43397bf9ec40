"""Versioned JSON container for banks, compressed models and trained nets.

One document format covers all three model kinds: a header with the
construction parameters, then named arrays stored row-major (complex
arrays as separate real and imaginary lists).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .gridded import FilterBank
from .nn import NNWeights
from .structured import StructuredModel, q_matrix

FORMAT_NAME = "chanpred-model"
FORMAT_VERSION = 1

KIND_BANK = "filter_bank"
KIND_STRUCTURED = "structured"
KIND_NETWORK = "network"


def _encode(arr: np.ndarray) -> dict:
    arr = np.asarray(arr)
    entry = {"shape": list(arr.shape)}
    if np.iscomplexobj(arr):
        entry["re"] = arr.real.ravel().tolist()
        entry["im"] = arr.imag.ravel().tolist()
    else:
        entry["re"] = arr.astype(float).ravel().tolist()
    return entry


def _decode(entry: dict) -> np.ndarray:
    shape = tuple(entry["shape"])
    re = np.asarray(entry["re"], dtype=float).reshape(shape)
    if "im" in entry:
        return re + 1j * np.asarray(entry["im"], dtype=float).reshape(shape)
    return re


def bank_document(bank: FilterBank, **extra_header) -> dict:
    header = {"obs_len": bank.obs_len, "step": bank.step,
              "noise_var": bank.noise_var, "grid_samples": bank.num_samples}
    header.update(extra_header)
    return {
        "format": FORMAT_NAME, "version": FORMAT_VERSION, "kind": KIND_BANK,
        "header": header,
        "arrays": {
            "doas": _encode(bank.doas),
            "dopplers": _encode(bank.dopplers),
            "powers": _encode(bank.powers),
            "filters": _encode(bank.filters),
            "bias": _encode(bank.bias),
        },
    }


def structured_document(model: StructuredModel, **extra_header) -> dict:
    header = {"obs_len": model.obs_len, "step": model.step,
              "noise_var": model.noise_var, "grid_samples": model.num_samples,
              "q_kind": model.q_kind}
    header.update(extra_header)
    return {
        "format": FORMAT_NAME, "version": FORMAT_VERSION, "kind": KIND_STRUCTURED,
        "header": header,
        "arrays": {
            "spectral_weights": _encode(model.spectral_weights),
            "output_rows": _encode(model.output_rows),
            "bias": _encode(model.bias),
        },
    }


def network_document(weights: NNWeights, *, obs_len: int, step: int,
                     noise_var: float, q_kind: str, velocity_kmh: float,
                     **extra_header) -> dict:
    header = {"obs_len": obs_len, "step": step, "noise_var": noise_var,
              "q_kind": q_kind, "velocity_kmh": velocity_kmh,
              "grid_samples": weights.hidden_bias.shape[0]}
    header.update(extra_header)
    return {
        "format": FORMAT_NAME, "version": FORMAT_VERSION, "kind": KIND_NETWORK,
        "header": header,
        "arrays": {
            "hidden_weights": _encode(weights.hidden_weights),
            "hidden_bias": _encode(weights.hidden_bias),
            "output_weights": _encode(weights.output_weights),
            "output_bias": _encode(weights.output_bias),
        },
    }


def _check_envelope(doc: dict):
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")


def load_document(doc: dict):
    """Rebuild the model object from a document; returns (object, header)."""
    _check_envelope(doc)
    header = doc["header"]
    arrays = {name: _decode(entry) for name, entry in doc["arrays"].items()}
    kind = doc["kind"]
    if kind == KIND_BANK:
        filters = arrays["filters"]
        obj = FilterBank(arrays["doas"], arrays["dopplers"], arrays["powers"],
                         filters, filters[:, 0, :].copy(), arrays["bias"],
                         int(header["obs_len"]), int(header["step"]),
                         float(header["noise_var"]))
    elif kind == KIND_STRUCTURED:
        obj = StructuredModel(header["q_kind"],
                              q_matrix(header["q_kind"], int(header["obs_len"])),
                              arrays["spectral_weights"], arrays["output_rows"],
                              arrays["bias"], int(header["obs_len"]),
                              int(header["step"]), float(header["noise_var"]))
    elif kind == KIND_NETWORK:
        obj = NNWeights(arrays["hidden_weights"], arrays["hidden_bias"],
                        arrays["output_weights"], arrays["output_bias"])
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return obj, header


def save_model(doc: dict, path: str | Path):
    _check_envelope(doc)
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return load_document(doc)
