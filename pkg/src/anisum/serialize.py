"""Canonical JSON for instance files and reports.

Key order is fixed by construction (insertion order, never sorted),
floats use their shortest round-trip representation, and infinities are
carried as the string tokens "inf" / "-inf" so output stays valid JSON.
Serializing the parse of a canonical document is byte-identical.
"""

from __future__ import annotations

import json
import math

import numpy as np


def to_jsonable(obj):
    """Recursively convert numbers, arrays and containers to JSON-safe
    values; rejects NaN rather than silently emitting it."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            raise ValueError("NaN is not serializable")
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def float_from_token(tok, where: str = "value") -> float:
    """Parse a JSON number or the "inf"/"-inf" tokens."""
    if isinstance(tok, str):
        if tok == "inf":
            return math.inf
        if tok == "-inf":
            return -math.inf
        raise ValueError(f"{where}: expected a number or 'inf', got {tok!r}")
    if isinstance(tok, bool) or not isinstance(tok, (int, float)):
        raise ValueError(f"{where}: expected a number, got {tok!r}")
    if math.isnan(tok):
        raise ValueError(f"{where}: NaN is not allowed")
    return float(tok)


def canonical_dumps(obj) -> str:
    """Serialize with fixed key order and a trailing newline."""
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"
