"""JSON reading and writing for states and reports.

Floats are written with 17 significant digits so every double survives a
round trip bit for bit.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any, Iterator

import numpy as np


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = f"{x:.17g}"
    # keep floats recognisable as floats
    if not any(c in text for c in ".eEn"):
        text += ".0"
    return text


def dumps(obj: Any) -> str:
    """Compact deterministic JSON with 17-digit floats."""
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k), ensure_ascii=False)}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_text(source: str) -> str:
    """Contents of a path, or of stdin when ``source`` is ``"-"``."""
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text()


def parse_fvector(obj: Any) -> np.ndarray:
    """Accept ``{"F": [...]}`` or a bare list of 16 numbers."""
    if isinstance(obj, dict):
        if "F" not in obj:
            raise ValueError('state JSON needs an "F" key')
        obj = obj["F"]
    if not isinstance(obj, list):
        raise ValueError("state must be a list of 16 numbers")
    return np.array(obj, dtype=float)


def parse_density(obj: Any) -> np.ndarray:
    """Accept ``{"re": [[...]], "im": [[...]]}``; ``im`` may be omitted."""
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValueError('density matrix JSON needs an "re" key')
    re = np.array(obj["re"], dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != (16, 16) or im.shape != (16, 16):
        raise ValueError(f"density matrix must be 16x16, got {re.shape} and {im.shape}")
    return re + 1j * im


def load_fvector(source: str) -> np.ndarray:
    return parse_fvector(json.loads(read_text(source)))


def load_density(source: str) -> np.ndarray:
    return parse_density(json.loads(read_text(source)))


def iter_corpus(source: str) -> Iterator[np.ndarray]:
    """One state per non-blank JSONL line."""
    for line in read_text(source).splitlines():
        if line.strip():
            yield parse_fvector(json.loads(line))
