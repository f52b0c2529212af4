"""Deterministic JSON rendering.

All file artifacts (instance/policy/result JSON, report sidecars) go through
render_json so that identical inputs produce identical bytes: keys sorted,
floats printed with 17 significant digits (lossless round-trip for IEEE
doubles), two-space indentation, trailing newline.
"""
from __future__ import annotations

import json
import math

import numpy as np


def _format_float(value: float) -> str:
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"non-finite float {value!r} cannot be serialized")
    text = format(value, ".17g")
    # Make integral floats self-describing so they parse back as floats.
    if "e" not in text and "E" not in text and "." not in text:
        text += ".0"
    return text


def _render(value, indent: int, level: int) -> str:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, (np.integer,)):
        value = int(value)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            items.append(f"{pad_in}{json.dumps(key)}: {_render(value[key], indent, level + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = [f"{pad_in}{_render(item, indent, level + 1)}" for item in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot render {type(value).__name__} as JSON")


def render_json(value, indent: int = 2) -> str:
    """Render value as a deterministic JSON document (ends with newline)."""
    return _render(value, indent, 0) + "\n"


def config_hash(value) -> str:
    """sha256 of the canonical rendering, used to fingerprint configs."""
    import hashlib

    return hashlib.sha256(render_json(value).encode("utf-8")).hexdigest()
