"""Instance and report serialization: version-tagged JSON, reproducible bytes.

Matrices are nested arrays of [re, im] pairs; every real is written with 17
significant digits so parsed values round-trip bit-exactly and identical runs
produce identical files.  Instances are hashed over their canonical
re-serialization, making the hash independent of formatting.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .core import DensityMatrix, QsdError, StateEnsemble, make_ensemble, validate_density

INSTANCE_VERSION = "qsd-1"
REPORT_VERSION = "qsd-report-1"


class FormatError(QsdError):
    """Input file is not a well-formed instance or report."""


def format_real(x: float) -> str:
    if not np.isfinite(x):
        raise FormatError(f"cannot serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def dump_json(obj) -> str:
    """Deterministic JSON with fixed float formatting and stable key order."""
    return _emit(obj, 0) + "\n"


def _emit(obj, level: int) -> str:
    pad = "  " * level
    inner = "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f'{inner}{json.dumps(str(k))}: {_emit(v, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            return "[]"
        if not any(_contains_dict(v) for v in items):
            return "[" + ", ".join(_emit(v, level + 1) for v in items) + "]"
        parts = [f"{inner}{_emit(v, level + 1)}" for v in items]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_real(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise FormatError(f"cannot serialize object of type {type(obj).__name__}")


def _contains_dict(obj) -> bool:
    if isinstance(obj, dict):
        return True
    if isinstance(obj, (list, tuple)):
        return any(_contains_dict(v) for v in obj)
    return False


def encode_matrix(matrix: np.ndarray) -> list:
    a = np.asarray(matrix, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def decode_matrix(data, context: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise FormatError(f"{context}: expected a non-empty array of rows")
    d = len(data)
    out = np.empty((d, d), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != d:
            raise FormatError(f"{context}: row {i} has {len(row) if isinstance(row, list) else 'no'} entries, expected {d}")
        for j, pair in enumerate(row):
            if not isinstance(pair, list) or len(pair) != 2:
                raise FormatError(f"{context}: entry ({i},{j}) is not a [re, im] pair")
            try:
                out[i, j] = complex(float(pair[0]), float(pair[1]))
            except (TypeError, ValueError):
                raise FormatError(f"{context}: entry ({i},{j}) is not numeric") from None
    return out


def ensemble_to_doc(ensemble: StateEnsemble, labels=None) -> dict:
    states = []
    for x in range(len(ensemble)):
        entry = {"prior": float(ensemble.priors[x])}
        if labels and labels[x] is not None:
            entry["label"] = str(labels[x])
        entry["matrix"] = encode_matrix(ensemble.states[x].matrix)
        states.append(entry)
    return {"version": INSTANCE_VERSION, "dimension": ensemble.dim, "states": states}


def parse_instance(text: str) -> tuple[StateEnsemble, list]:
    """Parse instance JSON into a validated ensemble, or fail naming the field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None
    return instance_from_doc(doc)


def instance_from_doc(doc) -> tuple[StateEnsemble, list]:
    if not isinstance(doc, dict):
        raise FormatError("instance must be a JSON object")
    if doc.get("version") != INSTANCE_VERSION:
        raise FormatError(f'version: expected "{INSTANCE_VERSION}", got {doc.get("version")!r}')
    dim = doc.get("dimension")
    if not isinstance(dim, int) or dim < 1:
        raise FormatError(f"dimension: expected a positive integer, got {dim!r}")
    raw_states = doc.get("states")
    if not isinstance(raw_states, list) or len(raw_states) < 2:
        raise FormatError("states: expected an array of at least 2 entries")

    priors = []
    states: list[DensityMatrix] = []
    labels = []
    for x, entry in enumerate(raw_states):
        if not isinstance(entry, dict):
            raise FormatError(f"states[{x}]: expected an object")
        prior = entry.get("prior")
        if not isinstance(prior, (int, float)):
            raise FormatError(f"states[{x}].prior: expected a number, got {prior!r}")
        matrix = decode_matrix(entry.get("matrix"), f"states[{x}].matrix")
        if matrix.shape[0] != dim:
            raise FormatError(f"states[{x}].matrix: dimension {matrix.shape[0]}, expected {dim}")
        try:
            states.append(validate_density(matrix))
        except QsdError as exc:
            raise FormatError(f"states[{x}].matrix: {exc}") from None
        priors.append(float(prior))
        labels.append(entry.get("label"))
    try:
        ensemble = make_ensemble(priors, states)
    except QsdError as exc:
        raise FormatError(f"states: {exc}") from None
    return ensemble, labels


def instance_hash(ensemble: StateEnsemble, labels=None) -> str:
    """Formatting-independent fingerprint of an instance."""
    canonical = dump_json(ensemble_to_doc(ensemble, labels))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def parse_report(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError("report must be a JSON object")
    if doc.get("version") != REPORT_VERSION:
        raise FormatError(f'version: expected "{REPORT_VERSION}", got {doc.get("version")!r}')
    return doc
