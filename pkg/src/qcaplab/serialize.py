"""Canonical JSON encoding shared by documents and reports.

Complex arrays are written entry-wise as ``[re, im]`` pairs, real arrays as
plain nested lists. Keys are sorted and floats use the shortest repr that
round-trips, so equal values always produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np


def encode_complex(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def _clean_float(x: float):
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    # normalize -0.0 so equal values print identically
    return x + 0.0


def to_jsonable(obj):
    """Recursively convert numpy values and dataclass-like objects to JSON types."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(encode_complex(obj))
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean_float(obj.real), _clean_float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj, indent: int | None = 2) -> str:
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=indent, ensure_ascii=False,
                      separators=(",", ": ") if indent is not None else (",", ":"))
    return text + ("\n" if indent is not None else "")


def digest(obj) -> str:
    """sha256 of the compact canonical encoding."""
    return hashlib.sha256(canonical_json(obj, indent=None).encode("utf-8")).hexdigest()
