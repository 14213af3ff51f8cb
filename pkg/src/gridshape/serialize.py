"""Deterministic JSON serialization and case content hashing.

All report emitters go through :func:`dump_json` so that identical inputs
produce byte-identical artifacts: floats are rounded to 12 significant
digits, keys are sorted, and no timestamps enter the payload.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from typing import Any

import numpy as np

SIG_DIGITS = 12


def round_sig(x: float, sig: int = SIG_DIGITS) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.{sig}g}")


def to_jsonable(obj: Any, sig: int = SIG_DIGITS) -> Any:
    """Recursively convert to plain JSON types with fixed float precision."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, sig)
    if isinstance(obj, complex):
        return {"re": round_sig(obj.real, sig), "im": round_sig(obj.imag, sig)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return round_sig(float(obj), sig)
    if isinstance(obj, np.complexfloating):
        return to_jsonable(complex(obj), sig)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v, sig) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name), sig)
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, sig) for v in obj]
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj: Any, sig: int = SIG_DIGITS) -> str:
    """Canonical JSON text: sorted keys, fixed precision, trailing newline."""
    return json.dumps(to_jsonable(obj, sig), sort_keys=True, indent=2) + "\n"


def content_hash(obj: Any) -> str:
    """Stable hex id of a JSON-able object (whitespace-insensitive)."""
    canonical = json.dumps(to_jsonable(obj, sig=17), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
