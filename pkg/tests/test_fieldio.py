"""Snapshot persistence: byte-exact round trips and sidecar validation."""

import json

import numpy as np
import pytest

from gwbec.fieldio import load_field, save_field
from gwbec.grids import Field, Grid


@pytest.fixture
def grid():
    return Grid(extents=(4.0, 6.0), points=(8, 12))


def test_round_trip_real_bytes_exact(tmp_path, grid):
    rng = np.random.Generator(np.random.Philox(11))
    f = Field(grid, rng.standard_normal(grid.shape))
    save_field(tmp_path / "snap", f, "rho", time=1.25)
    back, meta = load_field(tmp_path / "snap")
    assert np.array_equal(back.values, f.values)  # no tolerance: same bytes
    assert back.grid == grid
    assert meta["name"] == "rho"
    assert meta["time"] == 1.25


def test_round_trip_complex(tmp_path, grid):
    rng = np.random.Generator(np.random.Philox(12))
    f = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    save_field(tmp_path / "psi", f, "psi")
    back, meta = load_field(tmp_path / "psi")
    assert np.array_equal(back.values, f.values)
    assert meta["dtype"] == "<c16"


def test_missing_sidecar(tmp_path, grid):
    save_field(tmp_path / "snap", Field(grid, np.zeros(grid.shape)), "rho")
    (tmp_path / "snap.json").unlink()
    with pytest.raises(FileNotFoundError, match="sidecar"):
        load_field(tmp_path / "snap")


def test_missing_payload(tmp_path, grid):
    save_field(tmp_path / "snap", Field(grid, np.zeros(grid.shape)), "rho")
    (tmp_path / "snap.bin").unlink()
    with pytest.raises(FileNotFoundError, match="payload"):
        load_field(tmp_path / "snap")


def test_truncated_payload_detected(tmp_path, grid):
    save_field(tmp_path / "snap", Field(grid, np.ones(grid.shape)), "rho")
    raw = (tmp_path / "snap.bin").read_bytes()
    (tmp_path / "snap.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="bytes"):
        load_field(tmp_path / "snap")


def test_corrupt_sidecar_keys(tmp_path, grid):
    save_field(tmp_path / "snap", Field(grid, np.ones(grid.shape)), "rho")
    meta = json.loads((tmp_path / "snap.json").read_text())
    del meta["extents"]
    (tmp_path / "snap.json").write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="extents"):
        load_field(tmp_path / "snap")


def test_unsupported_dtype_rejected_at_load(tmp_path, grid):
    # Field itself normalizes everything to f8/c16, so the only way to meet a
    # foreign dtype is a sidecar written by someone else
    save_field(tmp_path / "snap", Field(grid, np.zeros(grid.shape)), "rho")
    sidecar = tmp_path / "snap.json"
    meta = json.loads(sidecar.read_text())
    meta["dtype"] = "<f4"
    sidecar.write_text(json.dumps(meta))
    with pytest.raises(ValueError, match="dtype"):
        load_field(tmp_path / "snap")


def test_sidecar_is_stable_json(tmp_path, grid):
    # sorted keys, trailing newline: hand-diffable output
    save_field(tmp_path / "snap", Field(grid, np.zeros(grid.shape)), "rho")
    text = (tmp_path / "snap.json").read_text()
    assert text.endswith("\n")
    meta = json.loads(text)
    assert list(meta.keys()) == sorted(meta.keys())
