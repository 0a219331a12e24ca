"""Raw binary field snapshots with a JSON sidecar.

A snapshot is two files: ``<stem>.bin`` holding the C-ordered samples as
little-endian float64 ('<f8') or complex128 ('<c16'), and ``<stem>.json``
describing the grid and payload.  Round-trips are byte-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .grids import Field, Grid

_DTYPE_TAGS = {np.dtype("<f8"): "<f8", np.dtype("<c16"): "<c16"}
LAYOUT = "C"


def save_field(stem: str | Path, field: Field, name: str, time: float = 0.0) -> tuple[Path, Path]:
    """Write ``<stem>.bin`` + ``<stem>.json``; returns both paths."""
    stem = Path(stem)
    data = np.ascontiguousarray(field.values)
    tag = _DTYPE_TAGS.get(data.dtype.newbyteorder("<"))
    if tag is None:
        raise ValueError(f"unsupported field dtype {data.dtype}")
    if data.dtype.byteorder == ">":  # big-endian host data: force wire order
        data = data.astype(data.dtype.newbyteorder("<"))

    bin_path = stem.with_suffix(".bin")
    json_path = stem.with_suffix(".json")
    bin_path.write_bytes(data.tobytes(order=LAYOUT))

    sidecar = {
        "name": str(name),
        "time": float(time),
        "dim": field.grid.dim,
        "points": list(field.grid.points),
        "extents": list(field.grid.extents),
        "dtype": tag,
        "layout": LAYOUT,
    }
    json_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return bin_path, json_path


def load_field(stem: str | Path) -> tuple[Field, dict]:
    """Read a snapshot pair back; returns (field, sidecar metadata)."""
    stem = Path(stem)
    bin_path = stem.with_suffix(".bin")
    json_path = stem.with_suffix(".json")
    if not json_path.exists():
        raise FileNotFoundError(f"missing sidecar {json_path}")
    if not bin_path.exists():
        raise FileNotFoundError(f"missing payload {bin_path}")

    meta = json.loads(json_path.read_text())
    for key in ("points", "extents", "dtype", "layout", "name", "time", "dim"):
        if key not in meta:
            raise ValueError(f"sidecar {json_path} lacks required key {key!r}")
    if meta["layout"] != LAYOUT:
        raise ValueError(f"unsupported layout {meta['layout']!r}")
    if meta["dtype"] not in ("<f8", "<c16"):
        raise ValueError(f"unsupported dtype {meta['dtype']!r}")

    grid = Grid(extents=tuple(meta["extents"]), points=tuple(meta["points"]))
    if int(meta["dim"]) != grid.dim:
        raise ValueError("sidecar dim disagrees with points/extents")

    raw = bin_path.read_bytes()
    dtype = np.dtype(meta["dtype"])
    expected = grid.size * dtype.itemsize
    if len(raw) != expected:
        raise ValueError(f"payload {bin_path} holds {len(raw)} bytes, expected {expected}")
    values = np.frombuffer(raw, dtype=dtype).reshape(grid.shape).copy()
    return Field(grid, values), meta
