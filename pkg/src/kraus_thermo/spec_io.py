"""
Channel-spec and result files (JSON).

A channel spec names a measure, a map ``L`` and optionally a second map (or
measure and map) for a potential ``H``::

    {
      "dim": 2,
      "measure": {"atoms": [{"weight": 1.0, "matrix": {"re": [[...]], "im": [[...]]}}]},
      "lmap": {"identity": {}},
      "hamiltonian": {"lmap": {"table": {"matrices": [...]}}}
    }

``measure`` may instead be a generator: ``{"markov_chain": {"P": ...}}``,
``{"gaussian_rotation": {"n_r": 40, "n_theta": 32}}``,
``{"example1_truncated": {"mass_tol": 1e-4}}`` or ``{"four_projector": {}}``.
``lmap`` is ``{"identity": {}}``, ``{"conjugation": {"U": matrix}}`` or
``{"table": {"matrices": [matrix, ...]}}``.  Matrices are split into real and
imaginary row-major arrays.  Floats are written with ``repr``, which is the
shortest string that round-trips, so explicit atoms survive a dump and reload
bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SpecFormatError
from .measure import (ConjugationByUnitary, Identity, KrausFamily, LMapSpec, PriorMeasure, Table,
                      build_family, example1_family, four_projector_measure, from_gaussian_rotation,
                      from_markov_chain)

_REAL_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_MATRIX = {
    "type": "object",
    "properties": {"re": _REAL_MATRIX, "im": _REAL_MATRIX},
    "required": ["re"],
    "additionalProperties": False,
}
_MEASURE = {
    "type": "object",
    "minProperties": 1,
    "maxProperties": 1,
    "properties": {
        "atoms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"weight": {"type": "number", "exclusiveMinimum": 0},
                               "matrix": _MATRIX},
                "required": ["weight", "matrix"],
                "additionalProperties": False,
            },
        },
        "markov_chain": {"type": "object", "properties": {"P": _REAL_MATRIX},
                         "required": ["P"], "additionalProperties": False},
        "gaussian_rotation": {"type": "object",
                              "properties": {"n_r": {"type": "integer", "minimum": 8},
                                             "n_theta": {"type": "integer", "minimum": 8}},
                              "additionalProperties": False},
        "example1_truncated": {"type": "object",
                               "properties": {"mass_tol": {"type": "number", "exclusiveMinimum": 0}},
                               "additionalProperties": False},
        "four_projector": {"type": "object", "additionalProperties": False},
    },
    "additionalProperties": False,
}
_LMAP = {
    "type": "object",
    "minProperties": 1,
    "maxProperties": 1,
    "properties": {
        "identity": {"type": "object", "additionalProperties": False},
        "conjugation": {"type": "object", "properties": {"U": _MATRIX}, "required": ["U"],
                        "additionalProperties": False},
        "table": {"type": "object",
                  "properties": {"matrices": {"type": "array", "items": _MATRIX, "minItems": 1}},
                  "required": ["matrices"], "additionalProperties": False},
    },
    "additionalProperties": False,
}

CHANNEL_SPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "channel spec",
    "type": "object",
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "measure": _MEASURE,
        "lmap": _LMAP,
        "hamiltonian": {
            "type": "object",
            "properties": {"measure": _MEASURE, "lmap": _LMAP},
            "required": ["lmap"],
            "additionalProperties": False,
        },
    },
    "required": ["dim", "measure"],
    "additionalProperties": False,
}


def matrix_to_json(A) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(d: dict) -> np.ndarray:
    re = np.asarray(d["re"], dtype=float)
    im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
    if re.ndim != 2 or re.shape != im.shape:
        raise SpecFormatError(f"malformed matrix: re {re.shape}, im {im.shape}")
    return re + 1j * im


@dataclass
class ChannelSpec:
    """A parsed spec: the measure, the map ``L`` and the optional potential ``H``."""

    dim: int
    measure: PriorMeasure
    lmap: LMapSpec
    measure_doc: dict
    h_measure: PriorMeasure | None = None
    h_lmap: LMapSpec | None = None
    h_doc: dict | None = None

    @property
    def family(self) -> KrausFamily:
        return build_family(self.measure, self.lmap)

    @property
    def hamiltonian(self) -> KrausFamily | None:
        if self.h_lmap is None:
            return None
        return build_family(self.h_measure if self.h_measure is not None else self.measure, self.h_lmap)

    def to_json(self) -> dict:
        """Re-serialise from the parsed arrays (generators are written by their parameters)."""
        doc = {"dim": self.dim, "measure": _measure_json(self.measure, self.measure_doc),
               "lmap": _lmap_json(self.lmap)}
        if self.h_lmap is not None:
            h = {}
            if self.h_measure is not None:
                h["measure"] = _measure_json(self.h_measure, self.h_doc["measure"])
            h["lmap"] = _lmap_json(self.h_lmap)
            doc["hamiltonian"] = h
        return doc


def _measure_json(mu: PriorMeasure, original: dict) -> dict:
    if "atoms" not in original:
        return original
    return {"atoms": [{"weight": float(w), "matrix": matrix_to_json(v)}
                      for w, v in zip(mu.weights, mu.points)]}


def _lmap_json(L) -> dict:
    if isinstance(L, ConjugationByUnitary):
        return {"conjugation": {"U": matrix_to_json(L.U)}}
    if isinstance(L, Table):
        return {"table": {"matrices": [matrix_to_json(K) for K in L.operators]}}
    return {"identity": {}}


def _measure(doc: dict) -> PriorMeasure:
    (kind, body), = doc.items()
    if kind == "atoms":
        return PriorMeasure([matrix_from_json(a["matrix"]) for a in body],
                            [a["weight"] for a in body])
    if kind == "markov_chain":
        return from_markov_chain(body["P"])[0]
    if kind == "gaussian_rotation":
        return from_gaussian_rotation(body.get("n_r", 40), body.get("n_theta", 32))[0]
    if kind == "example1_truncated":
        return example1_family(body.get("mass_tol", 1e-4))[0]
    if kind == "four_projector":
        return four_projector_measure()
    raise SpecFormatError(f"unknown measure kind {kind!r}")


def _lmap(doc: dict) -> LMapSpec:
    (kind, body), = doc.items()
    if kind == "identity":
        return Identity()
    if kind == "conjugation":
        return ConjugationByUnitary(matrix_from_json(body["U"]))
    if kind == "table":
        return Table(np.array([matrix_from_json(m) for m in body["matrices"]]))
    raise SpecFormatError(f"unknown lmap kind {kind!r}")


def parse_spec(doc: dict) -> ChannelSpec:
    """Validate a spec document and build its measure and maps.

    Raises
    ------
    SpecFormatError
        On schema violations, malformed matrices or dimension mismatches.
    """
    try:
        jsonschema.validate(doc, CHANNEL_SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SpecFormatError(f"invalid channel spec: {exc.message}") from exc
    lmap_doc = doc.get("lmap", {"identity": {}})
    try:
        mu = _measure(doc["measure"])
        L = _lmap(lmap_doc)
        h_doc = doc.get("hamiltonian")
        h_mu = h_L = None
        if h_doc is not None:
            h_mu = _measure(h_doc["measure"]) if "measure" in h_doc else None
            h_L = _lmap(h_doc["lmap"])
    except (ValueError, TypeError) as exc:
        raise SpecFormatError(str(exc)) from exc
    if mu.dim != doc["dim"]:
        raise SpecFormatError(f"dim is {doc['dim']} but the measure lives in M_{mu.dim}")
    for m in (mu, h_mu):
        if m is not None and m.dim != doc["dim"]:
            raise SpecFormatError("hamiltonian measure has the wrong dimension")
    return ChannelSpec(doc["dim"], mu, L, doc["measure"], h_mu, h_L, h_doc)


def load_spec(path) -> ChannelSpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"{path}: not valid JSON ({exc})") from exc
    return parse_spec(doc)


def dump_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")


def explicit_spec(family: KrausFamily) -> dict:
    """A spec with the family's atoms written out and its operators as a table."""
    atoms = [{"weight": float(w), "matrix": matrix_to_json(v)}
             for w, v in zip(family.weights, family.points)]
    return {"dim": family.dim, "measure": {"atoms": atoms},
            "lmap": {"table": {"matrices": [matrix_to_json(K) for K in family.operators]}}}


def to_jsonable(obj):
    """Recursively turn arrays and numpy scalars into JSON values (complex as re/im)."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return matrix_to_json(obj)
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj
