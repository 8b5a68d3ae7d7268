"""Writers for CSV tables, PGM images and JSON run manifests.

Every file is written to a temporary name in the target directory and
renamed into place, so a reader never sees a partial artifact.
"""
from __future__ import annotations

import json
import os
import platform
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np


def _atomic_write(path: str | Path, data: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_value(v) -> str:
    """Cell text: blank for None, integers as-is, reals as the shortest
    round-trip decimal (at most 17 significant digits)."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else repr(float(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, header: list[str], rows) -> Path:
    return _atomic_write(path, csv_text(header, rows))


def pgm_text(pixels: np.ndarray) -> str:
    """ASCII P2 with maximum gray 255; pixels[0] is the top row."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 2 or pixels.size == 0:
        raise ValueError("need a non-empty 2-D image")
    if pixels.min() < 0 or pixels.max() > 255:
        raise ValueError("gray values must be in 0..255")
    h, w = pixels.shape
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in pixels)
    return f"P2\n{w} {h}\n255\n{body}\n"


def write_pgm(path, pixels: np.ndarray) -> Path:
    return _atomic_write(path, pgm_text(pixels))


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P2":
        raise ValueError("not an ASCII PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    vals = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if vals.shape[0] != w * h or maxval != 255:
        raise ValueError("malformed PGM body")
    return vals.reshape(h, w)


def _versions() -> dict:
    from . import __version__

    out = {"rotorrouter": __version__, "python": platform.python_version(),
           "numpy": np.__version__}
    for name in ("numba", "mpmath", "scipy", "pyamg"):
        mod = sys.modules.get(name)
        if mod is not None:
            out[name] = getattr(mod, "__version__", "unknown")
    return out


def write_manifest(path, argv: list[str], params: dict, outputs: list[str],
                   elapsed: float, extra: dict | None = None) -> Path:
    doc = {
        "command_line": list(argv),
        "parameters": params,
        "versions": _versions(),
        "elapsed_seconds": elapsed,
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        doc.update(extra)
    return _atomic_write(path, json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n")


def write_json(path, doc: dict) -> Path:
    return _atomic_write(path, json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, (set, frozenset, tuple)):
        return sorted(v) if isinstance(v, (set, frozenset)) else list(v)
    raise TypeError(f"not serializable: {type(v).__name__}")
