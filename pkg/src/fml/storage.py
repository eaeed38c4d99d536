"""On-disk artifact formats.

OrbitalSet: raw little-endian complex64 pairs, column-major over
(grid point, orbital index), next to a JSON sidecar
{d, M, L, N, epsilon, creation, parameters}.

PhaseSpaceDensity: raw little-endian float64, C order, sidecar
{d, M, L, M_v, v_max, t}.

CSV output prints floats with 17 significant digits so results diff cleanly.
All writes go through a temp file + rename, so partially written artifacts
never shadow completed ones.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .grids import Grid, ScaleParams
from .initial import OrbitalSet
from .semiclassics import PhaseSpaceDensity, VelocityGrid

__all__ = [
    "save_orbitals",
    "load_orbitals",
    "save_phase_space",
    "load_phase_space",
    "write_csv",
    "read_csv",
    "write_json_atomic",
    "config_hash",
    "write_trajectory_csv",
    "TRAJECTORY_COLUMNS",
]


def _atomic_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt_float(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.17g}"
    return str(x)


def save_orbitals(
    state: OrbitalSet, path: str | Path, creation: str = "", parameters: dict | None = None
) -> None:
    path = Path(path)
    arr = np.asfortranarray(state.orbitals.astype("<c8"))
    _atomic_bytes(path, arr.tobytes(order="F"))
    sidecar = {
        "d": state.grid.d,
        "M": state.grid.M,
        "L": state.grid.L,
        "N": state.scale.N,
        "epsilon": state.scale.epsilon,
        "creation": creation,
        "parameters": parameters or {},
    }
    write_json_atomic(path.with_suffix(path.suffix + ".json"), sidecar)


def load_orbitals(path: str | Path) -> OrbitalSet:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as fh:
        meta = json.load(fh)
    grid = Grid(d=meta["d"], M=meta["M"], L=meta["L"])
    scale = ScaleParams(N=meta["N"], d=meta["d"])
    if abs(scale.epsilon - meta["epsilon"]) > 1e-12:
        raise ValueError("sidecar epsilon inconsistent with N^(-1/d)")
    raw = np.fromfile(path, dtype="<c8")
    arr = raw.reshape((grid.npoints, scale.N), order="F").astype(complex)
    # storage is single precision: re-orthonormalize to restore the invariants
    q, r = np.linalg.qr(arr * math.sqrt(grid.weight))
    frame = q * np.sign(np.diag(r).real)[None, :]
    return OrbitalSet(frame / math.sqrt(grid.weight), grid, scale)


def save_phase_space(W: PhaseSpaceDensity, path: str | Path) -> None:
    path = Path(path)
    _atomic_bytes(path, W.values.astype("<f8").tobytes(order="C"))
    sidecar = {
        "d": W.grid.d,
        "M": W.grid.M,
        "L": W.grid.L,
        "M_v": W.v_grid.M_v,
        "v_max": W.v_grid.v_max,
        "t": W.time,
    }
    write_json_atomic(path.with_suffix(path.suffix + ".json"), sidecar)


def load_phase_space(path: str | Path) -> PhaseSpaceDensity:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as fh:
        meta = json.load(fh)
    grid = Grid(d=meta["d"], M=meta["M"], L=meta["L"])
    vg = VelocityGrid(d=meta["d"], M_v=meta["M_v"], dv=2.0 * meta["v_max"] / meta["M_v"])
    raw = np.fromfile(path, dtype="<f8")
    W = PhaseSpaceDensity(raw.reshape(grid.shape + vg.shape), grid, vg, time=meta["t"])
    return W


def write_csv(path: str | Path, columns: list[str], rows: list[dict]) -> None:
    buf = []
    buf.append(",".join(columns))
    for row in rows:
        buf.append(",".join(fmt_float(row.get(c, "")) for c in columns))
    _atomic_bytes(Path(path), ("\n".join(buf) + "\n").encode())


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json_atomic(path: str | Path, obj) -> None:
    _atomic_bytes(Path(path), (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode())


def config_hash(config: dict) -> str:
    payload = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


TRAJECTORY_COLUMNS = [
    "t",
    "energy",
    "trace",
    "orthonormality_defect",
    "exch_comm_hs",
]


def write_trajectory_csv(path: str | Path, trajectory, d: int) -> None:
    """Diagnostics CSV: t, energy, trace, orthonormality_defect,
    comm_x_1..comm_x_d, exch_comm_hs."""
    comm_cols = [f"comm_x_{a + 1}" for a in range(d)]
    columns = TRAJECTORY_COLUMNS[:4] + comm_cols + TRAJECTORY_COLUMNS[4:]
    rows = []
    for rec in trajectory.diagnostics:
        row = {
            "t": rec.t,
            "energy": rec.energy,
            "trace": rec.trace,
            "orthonormality_defect": rec.orthonormality_defect,
            "exch_comm_hs": rec.exch_comm_hs,
        }
        for a, col in enumerate(comm_cols):
            row[col] = rec.comm_x[a] if a < len(rec.comm_x) else ""
        rows.append(row)
    write_csv(path, columns, rows)
