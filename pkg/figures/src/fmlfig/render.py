"""Deterministic renderers for the five figure kinds.

Each kind declares the CSV columns (or files) it needs; a missing column is a
SchemaError naming it.  Rendering is read-only on the artifacts and only ever
writes the requested output path.  Fonts, sizes, and the SVG hash salt are
pinned so identical inputs produce identical images (modulo raster metadata).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams.update(
    {
        "svg.hashsalt": "fml-fig",
        "font.family": "DejaVu Sans",
        "font.size": 9,
        "figure.dpi": 110,
    }
)

FIGURE_KINDS = (
    "convergence-scaling",
    "commutator-growth",
    "energy-drift",
    "wigner-heatmap",
    "vlasov-gap",
)

REQUIRED_COLUMNS = {
    "convergence-scaling": ("results.csv", ["N", "t", "hs_dist", "fluct_number"]),
    "commutator-growth": ("results.csv", ["N", "t", "comm_x_ratio"]),
    "energy-drift": ("results.csv", ["N", "t", "energy_mf", "energy_exact"]),
    "vlasov-gap": ("vlasov_compare.csv", ["t", "l1_distance", "mass_W1", "mass_W2"]),
}


class SchemaError(ValueError):
    """An artifact is missing a column or file the figure kind requires."""


@dataclass(frozen=True)
class FigureSpec:
    input_dir: str
    kind: str
    output: str
    format: str = "svg"

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {FIGURE_KINDS}")
        if self.format not in ("svg", "png"):
            raise SchemaError(f"format must be svg or png, got {self.format!r}")

    @classmethod
    def from_json(cls, path: str | Path) -> "FigureSpec":
        data = json.loads(Path(path).read_text())
        try:
            return cls(
                input_dir=data["input_dir"],
                kind=data["kind"],
                output=data["output"],
                format=data.get("format", "svg"),
            )
        except KeyError as exc:
            raise SchemaError(f"figure spec missing key {exc}") from exc


def _load_csv(directory: Path, name: str, required: list[str]) -> list[dict]:
    path = directory / name
    if not path.exists():
        raise SchemaError(f"required artifact {name} not found in {directory}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{name} is missing required column {col!r}")
        return list(reader)


def _by_n(rows: list[dict]) -> dict[int, list[dict]]:
    groups: dict[int, list[dict]] = {}
    for row in rows:
        if row.get("cell_status", "ok").startswith("failed"):
            continue
        groups.setdefault(int(float(row["N"])), []).append(row)
    for g in groups.values():
        g.sort(key=lambda r: float(r["t"]))
    return groups


def _save(fig, spec: FigureSpec) -> Path:
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format=spec.format, metadata={"Date": None} if spec.format == "svg" else None)
    plt.close(fig)
    return out


def _render_convergence(spec: FigureSpec, directory: Path) -> Path:
    rows = _load_csv(directory, *REQUIRED_COLUMNS["convergence-scaling"])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for n, group in sorted(_by_n(rows).items()):
        t = np.array([float(r["t"]) for r in group])
        hs = np.array([float(r["hs_dist"]) for r in group])
        fl = np.array([float(r["fluct_number"]) for r in group])
        line, = ax.plot(t, np.maximum(hs, 1e-16), marker="o", label=f"N={n}")
        ax.plot(t, np.maximum(fl, 1e-16), linestyle=":", color=line.get_color())
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|\gamma_t-\omega_t\|_{HS}$ (solid),  $2\,\mathrm{tr}\,\gamma(1-\omega)$ (dotted)")
    ax.set_title("mean-field distance to the exact evolution")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def _render_commutator(spec: FigureSpec, directory: Path) -> Path:
    rows = _load_csv(directory, *REQUIRED_COLUMNS["commutator-growth"])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for n, group in sorted(_by_n(rows).items()):
        t = np.array([float(r["t"]) for r in group])
        c = np.array([float(r["comm_x_ratio"]) for r in group])
        ax.plot(t, np.maximum(c, 1e-16), marker="o", label=f"N={n}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\mathrm{tr}\,|[x,\omega_t]|\,/\,(N\varepsilon)$")
    ax.set_title("commutator growth along the flow")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def _render_energy(spec: FigureSpec, directory: Path) -> Path:
    rows = _load_csv(directory, *REQUIRED_COLUMNS["energy-drift"])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for n, group in sorted(_by_n(rows).items()):
        t = np.array([float(r["t"]) for r in group])
        for col, style in (("energy_mf", "-"), ("energy_exact", ":")):
            e = np.array([float(r[col]) for r in group])
            drift = np.abs(e - e[0]) / max(abs(e[0]), 1e-300)
            ax.plot(t, np.maximum(drift, 1e-17), style, marker=".", label=f"N={n} {col}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("relative energy drift")
    ax.set_title("energy conservation (mean-field and exact)")
    ax.legend(loc="best", fontsize=7)
    fig.tight_layout()
    return _save(fig, spec)


def _render_wigner(spec: FigureSpec, directory: Path) -> Path:
    bin_path = directory / "wigner_t0.bin"
    meta_path = directory / "wigner_t0.bin.json"
    if not bin_path.exists() or not meta_path.exists():
        raise SchemaError(f"required artifact wigner_t0.bin(.json) not found in {directory}")
    meta = json.loads(meta_path.read_text())
    for key in ("d", "M", "L", "M_v", "v_max", "t"):
        if key not in meta:
            raise SchemaError(f"wigner_t0.bin.json is missing required key {key!r}")
    if meta["d"] != 1:
        raise SchemaError("wigner-heatmap supports d=1 artifacts")
    M, M_v = meta["M"], meta["M_v"]
    W = np.fromfile(bin_path, dtype="<f8").reshape(M, M_v)
    x = np.linspace(0.0, meta["L"], M, endpoint=False)
    dv = 2.0 * meta["v_max"] / M_v
    v = dv * (np.arange(M_v) - M_v // 2)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    mesh = ax.pcolormesh(x, v, W.T, shading="nearest", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="W(x, v)")
    ax.set_xlabel("x")
    ax.set_ylabel("v")
    ax.set_title(f"phase-space density at t={meta['t']}")
    fig.tight_layout()
    return _save(fig, spec)


def _render_vlasov_gap(spec: FigureSpec, directory: Path) -> Path:
    rows = _load_csv(directory, *REQUIRED_COLUMNS["vlasov-gap"])
    t = np.array([float(r["t"]) for r in rows])
    gap = np.array([float(r["l1_distance"]) for r in rows])
    m1 = np.array([float(r["mass_W1"]) for r in rows])
    m2 = np.array([float(r["mass_W2"]) for r in rows])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.0, 4.2), sharex=True, height_ratios=[2, 1])
    ax1.plot(t, np.maximum(gap, 1e-16), marker="o")
    ax1.set_yscale("log")
    ax1.set_ylabel(r"$L^1$(Wigner, Vlasov)")
    ax1.set_title("Hartree-Fock Wigner function vs Vlasov transport")
    ax2.plot(t, m1 - 1.0, marker=".", label="Wigner mass - 1")
    ax2.plot(t, m2 - 1.0, marker=".", linestyle=":", label="Vlasov mass - 1")
    ax2.set_xlabel("t")
    ax2.set_ylabel("mass defect")
    ax2.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, spec)


_RENDERERS = {
    "convergence-scaling": _render_convergence,
    "commutator-growth": _render_commutator,
    "energy-drift": _render_energy,
    "wigner-heatmap": _render_wigner,
    "vlasov-gap": _render_vlasov_gap,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written path."""
    directory = Path(spec.input_dir)
    if not directory.is_dir():
        raise SchemaError(f"input directory not found: {directory}")
    return _RENDERERS[spec.kind](spec, directory)
