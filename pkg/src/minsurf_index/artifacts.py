"""Deterministic JSON/CSV writers, profile-grid files and the grid cache.

All files are written atomically (temporary file in the target directory,
then ``os.replace``).  JSON floats are printed with 17 significant digits so
that identical inputs give byte-identical files; ``inf``/``nan`` become the
strings ``"inf"``, ``"-inf"``, ``"nan"``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, DomainError
from .geometry import CATENOID, PLANE, ProfileGrid, plane_grid, solve_profile

FORMAT_VERSION = 1
GRID_HEADER = ("s", "r", "z", "rp", "zp")
CACHE_ENV = "MINSURF_CACHE_DIR"


# --------------------------------------------------------------- writing


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


class _Raw(str):
    """A pre-formatted JSON number."""


def to_jsonable(obj):
    """Plain JSON tree; floats become pre-formatted numbers (or strings for inf/nan)."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        s = format_float(obj)
        return s if s in ("nan", "inf", "-inf") else _Raw(s)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): to_jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(node, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(node, _Raw):
        return str(node)
    if isinstance(node, dict):
        if not node:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in node.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(node, list):
        if not node:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in node):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in node) + "]"
        items = [f"{pad}{_emit(v, indent, level + 1)}" for v in node]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json.dumps(node)


def dumps(obj, indent=2):
    return _emit(to_jsonable(obj), indent, 0) + "\n"


def write_json(path, obj):
    return atomic_write(path, dumps(obj))


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return atomic_write(path, buf.getvalue())


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ----------------------------------------------------------- profile grids


def _meta_path(path):
    return Path(str(path) + ".meta")


def write_key_values(path, mapping):
    text = "".join(f"{k}={format_float(v) if isinstance(v, float) else v}\n" for k, v in mapping.items())
    return atomic_write(path, text)


def read_key_values(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, sep, v = line.partition("=")
        if not sep:
            raise DomainError(f"malformed line {line!r} in {path}")
        out[k.strip()] = v.strip()
    return out


def grid_metadata(grid):
    return {"n": grid.n, "r0": float(grid.r0), "h": float(grid.h), "s_max": grid.s_max,
            "kind": grid.kind, "format_version": FORMAT_VERSION}


def save_grid(grid, path):
    """Write ``path`` (CSV ``s,r,z,rp,zp``) and its ``.meta`` sidecar."""
    rows = np.column_stack([grid.s, grid.r, grid.z, grid.rp, grid.zp])
    write_csv(path, GRID_HEADER, rows.tolist())
    write_key_values(_meta_path(path), grid_metadata(grid))
    return Path(path)


def load_grid(path):
    meta = read_key_values(_meta_path(path))
    if int(meta.get("format_version", -1)) != FORMAT_VERSION:
        raise ConsistencyError(f"unsupported grid format in {path}")
    header, rows = read_csv(path)
    if tuple(header) != GRID_HEADER:
        raise ConsistencyError(f"unexpected grid header {header}")
    data = np.array(rows, dtype=float).reshape(-1, len(GRID_HEADER))
    kind = meta["kind"]
    if kind not in (CATENOID, PLANE):
        raise ConsistencyError(f"unknown surface kind {kind!r}")
    size = data.shape[0]
    N = size - 1 if kind == PLANE else (size - 1) // 2
    grid = ProfileGrid(int(meta["n"]), float(meta["r0"]), float(meta["h"]), N,
                       *(data[:, k] for k in range(5)), kind=kind)
    return grid


# --------------------------------------------------------------- the cache


def cache_key(n, r0, s_max, N, kind=CATENOID):
    text = f"kind={kind};n={int(n)};r0={float(r0)!r};s_max={float(s_max)!r};N={int(N)};v={FORMAT_VERSION}"
    return hashlib.sha256(text.encode()).hexdigest()[:24]


def resolve_cache_dir(cache_dir=None):
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else (Path(cache_dir) if cache_dir else None)


def build_grid(n, r0, s_max, N, kind=CATENOID):
    if kind == PLANE:
        return plane_grid(n, s_max, N)
    return solve_profile(n, r0, s_max, N)


def cached_grid(n, r0, s_max, N, kind=CATENOID, cache_dir=None):
    """Profile grid from the content-keyed cache, computing and storing it on a miss."""
    root = resolve_cache_dir(cache_dir)
    if root is None:
        return build_grid(n, r0, s_max, N, kind)
    path = root / f"grid-{cache_key(n, r0, s_max, N, kind)}.csv"
    if path.exists() and _meta_path(path).exists():
        try:
            return load_grid(path)
        except (ConsistencyError, ValueError, KeyError):
            pass  # unreadable entry: rebuild and overwrite
    grid = build_grid(n, r0, s_max, N, kind)
    save_grid(grid, path)
    return grid
