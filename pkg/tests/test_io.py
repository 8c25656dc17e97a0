import json
import math

import numpy as np
import pytest

from pt_trimer import __version__
from pt_trimer.io import (fmt, read_columns, read_csv, snapshot_filename, write_csv, write_json,
                          write_manifest)


def test_fmt_rules():
    assert fmt(None) == ""
    assert fmt(True) == "1" and fmt(np.bool_(False)) == "0"
    assert fmt(3) == "3"
    assert fmt(math.pi) == "3.14159265359"
    assert fmt(-0.0) == "0"
    assert fmt(1e-20) == "1e-20"
    assert fmt("ep3") == "ep3"
    with pytest.raises(ValueError):
        fmt(float("nan"))


def test_round_trip_and_line_endings(tmp_path):
    path = write_csv(tmp_path / "a.csv", ("x", "label", "y"),
                     [(0.1, "exact", None), (2, "ep2", 1 / 3)])
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, rows = read_csv(path)
    assert header == ["x", "label", "y"]
    assert rows == [[0.1, "exact", None], [2, "ep2", 0.333333333333]]
    assert read_columns(path)["label"] == ["exact", "ep2"]


def test_row_length_checked(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "b.csv", ("a", "b"), [(1,)])


def test_json_and_manifest(tmp_path):
    write_json(tmp_path / "s.json", {"z": 1 + 2j, "arr": np.arange(2), "bad": float("inf")})
    data = json.loads((tmp_path / "s.json").read_text())
    assert data == {"z": {"re": 1.0, "im": 2.0}, "arr": [0, 1], "bad": None}
    write_manifest(tmp_path, "spectrum", {"kappa": 1.0}, ["b.csv", "a.csv"])
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest == {"subcommand": "spectrum", "version": __version__,
                        "parameters": {"kappa": 1.0}, "outputs": ["a.csv", "b.csv"]}


def test_snapshot_filename():
    assert snapshot_filename(500) == "snap_t500.csv"
    assert snapshot_filename(12.5) == "snap_t12.5.csv"
