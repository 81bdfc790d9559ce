"""JSON helpers: the repo-wide matrix schema and reproducible float formatting."""

import json

import numpy as np

from .errors import InvariantViolation
from .phase_space import Statistics


def matrix_to_json(a, statistics):
    a = np.asarray(a, float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise InvariantViolation(f"expected a square 2N x 2N matrix, got shape {a.shape}")
    return {"n_modes": a.shape[0] // 2, "statistics": Statistics.parse(statistics).value,
            "rows": a.shape[0], "cols": a.shape[1], "data": [float(x) for x in a.ravel()]}


def matrix_from_json(obj):
    """Returns (matrix, statistics). Validates the declared shape."""
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        stats = Statistics.parse(obj["statistics"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolation(f"malformed matrix JSON: {exc}") from exc
    if len(data) != rows * cols or rows != cols or rows != 2 * int(obj.get("n_modes", rows // 2)):
        raise InvariantViolation("matrix JSON dimensions are inconsistent")
    return np.array(data, float).reshape(rows, cols), stats


def fmt(x):
    """Locale-independent 17-significant-digit formatting."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _serialize(o, indent=0):
    pad, end = "  " * (indent + 1), "  " * indent
    if isinstance(o, dict):
        if not o:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_serialize(v, indent + 1)}" for k, v in o.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(o, np.ndarray):
        o = o.tolist()
    if isinstance(o, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
            return "[" + ", ".join(_serialize(v, indent + 1) for v in o) + "]"
        return "[\n" + ",\n".join(pad + _serialize(v, indent + 1) for v in o) + "\n" + end + "]"
    if isinstance(o, (bool, np.bool_)) or o is None:
        return json.dumps(None if o is None else bool(o))
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, (float, np.floating)):
        return "null" if not np.isfinite(o) else fmt(o)
    if isinstance(o, complex):
        return _serialize([o.real, o.imag], indent)
    return json.dumps(str(o) if not isinstance(o, str) else o)


def dumps(obj):
    """Deterministic JSON with 17 significant digits; non-finite floats become null."""
    return _serialize(obj) + "\n"
