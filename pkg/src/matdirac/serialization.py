"""JSON wire format shared by every command.

A matrix is ``{"rows": r, "cols": c, "re": [[...]], "im": [[...]]}`` in
row-major order.  Floats are written with ``repr`` precision, so a
round trip is lossless and identical inputs give identical bytes.
"""

import json

import numpy as np

from .errors import MatDiracError, ShapeMismatch

__all__ = ["matrix_to_json", "matrix_from_json", "dumps", "load_json_arg"]


def matrix_to_json(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ShapeMismatch(f"expected 2-d matrix, got shape {M.shape}")
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": [[float(v) for v in row] for row in M.real],
        "im": [[float(v) for v in row] for row in M.imag],
    }


def matrix_from_json(obj):
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((rows, cols))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MatDiracError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ShapeMismatch(
            f"matrix JSON declares {rows}x{cols} but holds re {re.shape}, im {im.shape}"
        )
    return re + 1j * im


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True)


def load_json_arg(text):
    """Parse either inline JSON or the path of a JSON file."""
    text = text.strip()
    try:
        if text.startswith(("{", "[")):
            return json.loads(text)
        with open(text) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MatDiracError(f"cannot read JSON from {text[:60]!r}: {exc}") from exc
