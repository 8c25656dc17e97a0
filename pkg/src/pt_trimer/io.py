"""CSV and JSON output with a fixed numeric format.

Every float is written with 12 significant digits, rows end in LF and
missing values are empty cells, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

PHASE_HEADER = ("phi", "kappa", "gamma", "j", "label", "discriminant",
                "e1_re", "e1_im", "e2_re", "e2_im", "e3_re", "e3_im")
EVOLUTION_HEADER = ("t", "re1", "im1", "re2", "im2", "re3", "im3", "prob")
SCATTER_HEADER = ("system", "gamma", "phi", "k", "T", "RL", "RR", "singular")
SNAPSHOT_HEADER = ("site", "prob")
BAND_HEADER = ("phi", "e1_re", "e1_im", "e2_re", "e2_im", "e3_re", "e3_im")
SPECTRUM_HEADER = ("index", "re", "im", "block_size")


def fmt(value) -> str:
    """One CSV cell: 12 significant digits for floats, empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if not math.isfinite(x):
            raise ValueError("non-finite values are written as empty cells, pass None")
        if x == 0.0:
            x = 0.0     # drop the sign of negative zero
        return format(x, ".12g")
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
            writer.writerow([fmt(v) for v in row])
    return path


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(path) -> tuple[list[str], list[list]]:
    """Header and rows; numeric cells become int/float, empty cells ``None``."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[_parse_cell(c) for c in row] for row in reader]
    return header, rows


def read_columns(path) -> dict:
    header, rows = read_csv(path)
    return {name: [row[i] for row in rows] for i, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_json(path, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_manifest(out_dir, subcommand: str, parameters: dict,
                   outputs: Optional[Sequence[str]] = None) -> Path:
    """``manifest.json``: subcommand, toolkit version, resolved parameters, output files."""
    from . import __version__

    data = {"subcommand": subcommand, "version": __version__,
            "parameters": parameters, "outputs": sorted(outputs or [])}
    return write_json(Path(out_dir) / "manifest.json", data)


def snapshot_filename(time: float) -> str:
    return f"snap_t{fmt(float(time))}.csv"


def complex_cells(values) -> list:
    out = []
    for z in values:
        out.extend((float(np.real(z)), float(np.imag(z))))
    return out
