"""
Snapshot and time-series persistence.

Snapshot file layout: a single UTF-8 JSON header line

    {"schema": "cascade-scope/1", "N", "L", "nu", "time",
     "fields": ["ux", "uy", "uz", "p"], "dtype": "f64-le", "order": "x-fastest"}

followed by the raw little-endian float64 arrays, N³ values each, with the
x index varying fastest.  The force is stored in the same format with fields
["fx", "fy", "fz"].
"""

import json
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import SnapshotIOError
from ..fields import Grid, Representation, ScalarField, VectorField

SCHEMA = "cascade-scope/1"
SERIES_COLUMNS = ["t", "energy", "enstrophy", "force_work"]

PathLike = Union[str, Path]


def write_arrays(path: PathLike, grid: Grid, nu: float, time: float,
                 names: Sequence[str], arrays: Sequence[np.ndarray]) -> Path:
    """Write physical arrays with a JSON header line."""
    header = {
        "schema": SCHEMA,
        "N": grid.N,
        "L": grid.L,
        "nu": nu,
        "time": time,
        "fields": list(names),
        "dtype": "f64-le",
        "order": "x-fastest",
    }
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "wb") as fh:
            fh.write((json.dumps(header) + "\n").encode("utf-8"))
            for arr in arrays:
                fh.write(np.asarray(arr, dtype="<f8").ravel(order="F").tobytes())
    except OSError as e:
        raise SnapshotIOError(f"could not write {p}: {e}") from e
    return p


def read_arrays(path: PathLike) -> Tuple[Dict, List[np.ndarray]]:
    """Read a file written by ``write_arrays``; returns (header, arrays)."""
    p = Path(path)
    try:
        with open(p, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            payload = fh.read()
    except FileNotFoundError as e:
        raise SnapshotIOError(f"snapshot file is missing: {p}") from e
    except (OSError, ValueError) as e:
        raise SnapshotIOError(f"could not read {p}: {e}") from e
    if header.get("schema") != SCHEMA:
        raise SnapshotIOError(f"{p}: unsupported schema {header.get('schema')!r}")
    N = int(header["N"])
    count = len(header["fields"])
    data = np.frombuffer(payload, dtype="<f8")
    if data.size != count * N ** 3:
        raise SnapshotIOError(f"{p}: expected {count * N ** 3} values, found {data.size}")
    arrays = [data[i * N ** 3:(i + 1) * N ** 3].reshape((N, N, N), order="F") for i in range(count)]
    return header, arrays


def write_snapshot(path: PathLike, u: VectorField, p: ScalarField, nu: float, time: float) -> Path:
    up = u.physical().data
    pp = p.physical().data
    return write_arrays(path, u.grid, nu, time, ["ux", "uy", "uz", "p"], [up[0], up[1], up[2], pp])


def read_snapshot(path: PathLike) -> Tuple[Dict, VectorField, ScalarField]:
    header, arrays = read_arrays(path)
    if header["fields"] != ["ux", "uy", "uz", "p"]:
        raise SnapshotIOError(f"{path}: not a velocity snapshot (fields {header['fields']})")
    grid = Grid(int(header["N"]), float(header["L"]))
    u = VectorField(grid, np.stack(arrays[:3]), Representation.PHYSICAL)
    p = ScalarField(grid, arrays[3], Representation.PHYSICAL)
    return header, u, p


def write_force(path: PathLike, f: VectorField, nu: float) -> Path:
    fp = f.physical().data
    return write_arrays(path, f.grid, nu, 0.0, ["fx", "fy", "fz"], list(fp))


def read_force(path: PathLike) -> VectorField:
    header, arrays = read_arrays(path)
    if header["fields"] != ["fx", "fy", "fz"]:
        raise SnapshotIOError(f"{path}: not a force file (fields {header['fields']})")
    grid = Grid(int(header["N"]), float(header["L"]))
    return VectorField(grid, np.stack(arrays), Representation.PHYSICAL).spectral()


def write_time_series(path: PathLike, series: pd.DataFrame) -> Path:
    p = Path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        series[SERIES_COLUMNS].to_csv(p, index=False, float_format="%.17g")
    except OSError as e:
        raise SnapshotIOError(f"could not write {p}: {e}") from e
    return p


def read_time_series(path: PathLike) -> pd.DataFrame:
    p = Path(path)
    try:
        df = pd.read_csv(p)
    except FileNotFoundError as e:
        raise SnapshotIOError(f"time-series file is missing: {p}") from e
    missing = set(SERIES_COLUMNS) - set(df.columns)
    if missing:
        raise SnapshotIOError(f"{p}: missing columns {sorted(missing)}")
    return df
