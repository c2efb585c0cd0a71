"""
Deterministic CSV and raw binary output.

Floats are written with 17 significant digits so values round-trip
exactly; identical inputs therefore produce byte-identical files.
Binary field blocks are little-endian float64 in row-major cell order
with a small text sidecar describing the grid.
"""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable, Sequence

import numpy as np

from .grid import GridSpec, GridState


def fmt(x) -> str:
    """Canonical text form: 17 significant digits for floats."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows with the canonical float format, LF line endings."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str) -> tuple:
    """Read a CSV written by :func:`write_csv`: (header, list of rows as str)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    return header, rows


def write_field_csv(path: str, state: GridState) -> None:
    """One row per cell: index per axis, then the value."""
    spec = state.spec
    if spec.d == 1:
        header = ("i", "value")
        rows = ((i, state.values[i]) for i in range(spec.n))
    else:
        header = ("i", "j", "value")
        rows = ((i, j, state.values[i, j]) for i in range(spec.n) for j in range(spec.n))
    write_csv(path, header, rows)


def read_field_csv(path: str) -> np.ndarray:
    header, rows = read_csv(path)
    if header[-1] != "value":
        raise ValueError(f"{path}: not a field CSV")
    d = len(header) - 1
    n = round(len(rows) ** (1.0 / d))
    vals = np.array([float(r[-1]) for r in rows])
    return vals.reshape((n,) * d)


def write_field_binary(path: str, state: GridState) -> None:
    """Raw little-endian float64 block plus a text sidecar ``path + '.hdr'``."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(state.values, dtype="<f8").tobytes())
    with open(path + ".hdr", "w") as fh:
        fh.write(f"dims {state.spec.d}\n")
        fh.write(f"cells {state.spec.n}\n")
        fh.write(f"time {fmt(state.time)}\n")
        fh.write("dtype float64-le\n")
        fh.write("order row-major\n")


def read_field_binary(path: str) -> GridState:
    meta = {}
    with open(path + ".hdr") as fh:
        for line in fh:
            key, _, val = line.strip().partition(" ")
            meta[key] = val
    spec = GridSpec(int(meta["dims"]), int(meta["cells"]))
    raw = np.fromfile(path, dtype="<f8")
    return GridState(spec, raw.reshape(spec.shape), float(meta["time"]))


def write_series_csv(path: str, params: Sequence, values: Sequence,
                     param_name: str = "param", value_name: str = "value") -> None:
    """Two-column series: (param, value)."""
    write_csv(path, (param_name, value_name), zip(params, values))


def write_snapshot_stack(path: str, spec: GridSpec, snapshots: Sequence) -> None:
    """Concatenated field frames, one per snapshot, with the frame times
    listed in the sidecar."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as fh:
        for _, vals in snapshots:
            fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())
    with open(path + ".hdr", "w") as fh:
        fh.write(f"dims {spec.d}\n")
        fh.write(f"cells {spec.n}\n")
        fh.write(f"frames {len(snapshots)}\n")
        fh.write("times " + " ".join(fmt(t) for t, _ in snapshots) + "\n")
        fh.write("dtype float64-le\n")
        fh.write("order row-major\n")


def read_snapshot_stack(path: str) -> tuple:
    """Read back (spec, [(time, values)])."""
    meta = {}
    with open(path + ".hdr") as fh:
        for line in fh:
            key, _, val = line.strip().partition(" ")
            meta[key] = val
    spec = GridSpec(int(meta["dims"]), int(meta["cells"]))
    times = [float(t) for t in meta["times"].split()]
    raw = np.fromfile(path, dtype="<f8")
    frames = raw.reshape((len(times),) + spec.shape)
    return spec, [(times[i], frames[i]) for i in range(len(times))]
