"""JSON file formats for matrices, channels and reports.

Matrix: ``{"dim": n, "entries": [[re, im], ...]}`` row-major, optionally with
``"dims": [dA, dB]`` for bipartite operators. Rectangular matrices (Kraus
operators, isometries) carry ``"shape": [rows, cols]`` instead of ``dim``.

Channel: ``{"d_in": n, "d_out": m, "kraus": [matrix, ...]}``.

Floats are written with 17 significant digits so that every double
round-trips exactly.
"""

import json
import math
import re

import numpy as np

from .channels import QuantumChannel
from .errors import InvalidInput

_NUM = "\x00num:"


def format_number(x) -> str:
    return format(float(x), ".17g")


def _prepare(obj):
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _prepare(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        return _NUM + format_number(obj)
    return obj


def dumps(obj, indent=2) -> str:
    """``json.dumps`` with floats rendered as 17 significant digits."""
    text = json.dumps(_prepare(obj), indent=indent)
    return re.sub(r'"\\u0000num:([^"]*)"', r"\1", text)


def matrix_to_json(M, dims=None) -> dict:
    M = np.asarray(M, dtype=complex)
    out = {}
    if M.shape[0] == M.shape[1]:
        out["dim"] = int(M.shape[0])
    else:
        out["shape"] = [int(M.shape[0]), int(M.shape[1])]
    if dims is not None:
        out["dims"] = [int(d) for d in dims]
    out["entries"] = [[z.real, z.imag] for z in M.reshape(-1)]
    return out


def _field(obj, key, where):
    if not isinstance(obj, dict):
        raise InvalidInput(f"{where}: expected a JSON object")
    if key not in obj:
        raise InvalidInput(f"{where}: missing field '{key}'")
    return obj[key]


def _positive_int(value, field, where):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidInput(f"{where}: field '{field}' must be a positive integer, got {value!r}")
    return value


def matrix_from_json(obj, where="matrix"):
    """Return ``(M, dims)``; ``dims`` is None when absent."""
    if isinstance(obj, dict) and "shape" in obj:
        shape = obj["shape"]
        if not isinstance(shape, list) or len(shape) != 2:
            raise InvalidInput(f"{where}: field 'shape' must be [rows, cols]")
        rows, cols = (_positive_int(v, "shape", where) for v in shape)
    else:
        rows = cols = _positive_int(_field(obj, "dim", where), "dim", where)
    entries = _field(obj, "entries", where)
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise InvalidInput(
            f"{where}: field 'entries' must hold {rows * cols} [re, im] pairs")
    values = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(entries):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
            raise InvalidInput(f"{where}: field 'entries'[{i}] must be a [re, im] pair of numbers")
        if not all(math.isfinite(v) for v in pair):
            raise InvalidInput(f"{where}: field 'entries'[{i}] is not finite")
        values[i] = complex(float(pair[0]), float(pair[1]))
    dims = obj.get("dims")
    if dims is not None:
        if (not isinstance(dims, list) or not dims
                or any(isinstance(d, bool) or not isinstance(d, int) or d < 1 for d in dims)):
            raise InvalidInput(f"{where}: field 'dims' must be a list of positive integers")
        if int(np.prod(dims)) != rows or rows != cols:
            raise InvalidInput(f"{where}: field 'dims' {dims} does not factor dimension {rows}")
    return values.reshape(rows, cols), dims


def channel_to_json(ch: QuantumChannel) -> dict:
    return {"d_in": ch.input_dim, "d_out": ch.output_dim,
            "kraus": [matrix_to_json(K) for K in ch.kraus]}


def channel_from_json(obj, where="channel") -> QuantumChannel:
    d_in = _positive_int(_field(obj, "d_in", where), "d_in", where)
    d_out = _positive_int(_field(obj, "d_out", where), "d_out", where)
    kraus = _field(obj, "kraus", where)
    if not isinstance(kraus, list) or not kraus:
        raise InvalidInput(f"{where}: field 'kraus' must be a non-empty list")
    ops = []
    for i, k in enumerate(kraus):
        K, _ = matrix_from_json(k, f"{where}: kraus[{i}]")
        if K.shape != (d_out, d_in):
            raise InvalidInput(
                f"{where}: kraus[{i}] has shape {K.shape}, expected ({d_out}, {d_in})")
        ops.append(K)
    return QuantumChannel(tuple(ops))


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def read_matrix(path):
    return matrix_from_json(_load(path), str(path))


def write_matrix(path, M, dims=None):
    with open(path, "w") as fh:
        fh.write(dumps(matrix_to_json(M, dims)) + "\n")


def read_channel(path) -> QuantumChannel:
    return channel_from_json(_load(path), str(path))


def write_channel(path, ch: QuantumChannel):
    with open(path, "w") as fh:
        fh.write(dumps(channel_to_json(ch)) + "\n")


def read_json(path):
    return _load(path)
