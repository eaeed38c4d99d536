"""Experiment runner: file-driven, reproducible studies over all modules.

Configs are flat ``key = value`` text with dotted sections (``grid.M = 16``);
JSON files are accepted as an alternative.  Every run directory receives a
manifest sufficient to re-run the experiment exactly; a rerun against an
existing manifest is refused unless --force, which also resumes incomplete
sweeps (completed cells are keyed by the config hash and skipped).

Exit codes: 0 success, 2 configuration error, 3 numerical failure (partial
artifacts plus a failure record are left behind).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .grids import Grid, ScaleParams, build_grid
from .potentials import PotentialSpec, cos_well
from .storage import (
    config_hash,
    read_csv,
    write_csv,
    write_json_atomic,
    write_trajectory_csv,
)

__all__ = ["RunConfig", "ConfigError", "main", "run_experiment", "validate_config"]

EXPERIMENTS = (
    "init",
    "evolve-hf",
    "evolve-hartree",
    "evolve-vlasov",
    "oracle-compare",
    "semiclassical-sweep",
    "diagnostics",
)

INIT_SOURCES = ("free-sea", "scf", "weyl", "trap")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Normalized experiment description; round-trips losslessly through dicts."""

    experiment: str
    grid: dict = field(default_factory=dict)
    scale: dict = field(default_factory=dict)
    potential: dict = field(default_factory=dict)
    trap: dict = field(default_factory=dict)
    integrator: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    init: dict = field(default_factory=dict)
    vlasov: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "grid": dict(self.grid),
            "scale": dict(self.scale),
            "potential": dict(self.potential),
            "trap": dict(self.trap),
            "integrator": dict(self.integrator),
            "oracle": dict(self.oracle),
            "init": dict(self.init),
            "vlasov": dict(self.vlasov),
            "sweep": dict(self.sweep),
            "output": dict(self.output),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "experiment" not in data:
            raise ConfigError("missing key 'experiment'")
        exp = data["experiment"]
        if exp not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {exp!r}; choose from {EXPERIMENTS}")
        kwargs = {}
        for name in (
            "grid",
            "scale",
            "potential",
            "trap",
            "integrator",
            "oracle",
            "init",
            "vlasov",
            "sweep",
            "output",
        ):
            section = data.get(name, {})
            if not isinstance(section, dict):
                raise ConfigError(f"section {name!r} must be a table of keys")
            kwargs[name] = dict(section)
        return cls(experiment=exp, seed=int(data.get("seed", 0)), **kwargs)

    def hash(self) -> str:
        return config_hash(self.to_dict())


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip()


def parse_config_file(path: str | Path) -> RunConfig:
    """Parse flat dotted key=value text, or JSON if the file starts with '{'."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            return RunConfig.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
    data: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        target = data
        parts = key.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"line {lineno}: key collision at {part!r}")
        target[parts[-1]] = _parse_scalar(val)
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Config realization
# ---------------------------------------------------------------------------


def _build_grid(cfg: RunConfig, *, require_pow2: bool = True) -> Grid:
    g = cfg.grid
    try:
        return build_grid(
            int(g.get("d", 1)),
            int(g["M"]),
            float(g.get("L", 2.0 * np.pi)),
            require_pow2=require_pow2,
        )
    except KeyError as exc:
        raise ConfigError(f"grid section missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_potential(cfg: RunConfig) -> PotentialSpec:
    p = cfg.potential
    kind = p.get("kind", "zero")
    try:
        if kind == "zero":
            return PotentialSpec("zero")
        if kind == "gaussian":
            if "width" not in p:
                raise ConfigError("potential.width is required for gaussian potentials")
            return PotentialSpec("gaussian", amplitude=float(p.get("amplitude", 0.0)), width=float(p["width"]))
        raise ConfigError(f"unsupported potential kind {kind!r} in configs")
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad potential section: {exc}") from exc


def _build_scale(cfg: RunConfig, grid: Grid) -> ScaleParams:
    try:
        return ScaleParams(N=int(cfg.scale["N"]), d=grid.d)
    except KeyError as exc:
        raise ConfigError(f"scale section missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_trap(cfg: RunConfig, grid: Grid):
    t = cfg.trap
    if not t or t.get("kind", "none") == "none":
        return None
    if t["kind"] == "cos-well":
        return cos_well(grid, float(t.get("depth", 1.0)), t.get("center"))
    raise ConfigError(f"unsupported trap kind {t['kind']!r}")


def _initial_state(cfg: RunConfig, grid: Grid, scale: ScaleParams, V: PotentialSpec):
    from .initial import free_fermi_sea, scf_ground_state, thomas_fermi_density, weyl_projection

    source = cfg.init.get("source", "free-sea")
    trap = _build_trap(cfg, grid)
    if source == "free-sea":
        return free_fermi_sea(grid, scale)
    if trap is None:
        raise ConfigError(f"init.source={source!r} requires a trap section")
    if source == "trap":
        return scf_ground_state(trap, PotentialSpec("zero"), scale).orbitals
    if source == "scf":
        return scf_ground_state(
            trap,
            V,
            scale,
            mixing=float(cfg.init.get("mixing", 0.3)),
            tol=float(cfg.init.get("tol", 1e-9)),
            max_iter=int(cfg.init.get("max_iter", 300)),
        ).orbitals
    if source == "weyl":
        tf = thomas_fermi_density(trap, V, scale)
        return weyl_projection(tf.rho, grid, scale)[1]
    raise ConfigError(f"unknown init.source {source!r}; choose from {INIT_SOURCES}")


# ---------------------------------------------------------------------------
# Guards / validation
# ---------------------------------------------------------------------------


def validate_config(cfg: RunConfig) -> list[str]:
    """Check guards without running; returns the list of violations."""
    import math as _math

    violations: list[str] = []
    try:
        grid = _build_grid(cfg, require_pow2=cfg.experiment != "oracle-compare")
    except ConfigError as exc:
        return [f"grid: {exc}"]
    try:
        _build_potential(cfg)
    except ConfigError as exc:
        violations.append(f"potential: schema error: {exc}")
    if cfg.experiment == "oracle-compare":
        m = int(cfg.grid.get("M", 0))
        for n in cfg.oracle.get("N_list", [int(cfg.scale.get("N", 0))]):
            n = int(n)
            if not (1 <= n <= m <= 24):
                violations.append(f"basis guard: need 1 <= N={n} <= M={m} <= 24")
                continue
            dim = _math.comb(m, n)
            if dim > 200_000:
                violations.append(f"basis guard: C({m},{n}) = {dim} exceeds 200000")
    if cfg.experiment in ("diagnostics", "oracle-compare", "init"):
        if grid.npoints > 4096:
            violations.append(f"dense guard: M^d = {grid.npoints} exceeds 4096 for dense kernels")
    if cfg.experiment == "evolve-vlasov":
        dt = float(cfg.integrator.get("dt", 1e-3))
        v_max = float(cfg.vlasov.get("v_max", 1.0))
        if 2.0 * v_max * dt > 0.5 * grid.L:
            violations.append("CFL guard: x displacement per step exceeds half the box")
    return violations


def _estimate_cells(cfg: RunConfig) -> int:
    if cfg.experiment == "oracle-compare":
        return len(cfg.oracle.get("N_list", [1])) * len(cfg.oracle.get("times", [1]))
    if cfg.experiment == "semiclassical-sweep":
        return len(cfg.sweep.get("N_list", [1]))
    return 1


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _out_dir(cfg: RunConfig) -> Path:
    out = cfg.output.get("dir")
    if not out:
        raise ConfigError("output.dir is required")
    return Path(out)


def _exp_init(cfg: RunConfig, out: Path) -> int:
    from .semiclassics import commutator_report
    from .storage import save_orbitals

    grid = _build_grid(cfg)
    V = _build_potential(cfg)
    scale = _build_scale(cfg, grid)
    state = _initial_state(cfg, grid, scale, V)
    save_orbitals(
        state, out / "orbitals.bin", creation=cfg.init.get("source", "free-sea"), parameters=cfg.to_dict()
    )
    rep = commutator_report(state)
    kernel_trace = grid.weight * float(np.sum(np.abs(state.orbitals) ** 2))
    rows = [
        {
            "N": scale.N,
            "epsilon": scale.epsilon,
            "trace": kernel_trace,
            "orthonormality_defect": state.orthonormality_defect(),
            "projection_defect": state.projection_defect_hs(),
            **{f"comm_x_{a + 1}": rep.position[a] for a in range(grid.d)},
            **{f"comm_grad_{a + 1}": rep.gradient[a] for a in range(grid.d)},
        }
    ]
    write_csv(out / "diagnostics.csv", list(rows[0].keys()), rows)
    return 0


def _exp_evolve(cfg: RunConfig, out: Path, exchange_on: bool) -> int:
    from .dynamics import EvolveConfig, PropagationError, evolve
    from .storage import save_orbitals

    grid = _build_grid(cfg)
    V = _build_potential(cfg)
    scale = _build_scale(cfg, grid)
    state = _initial_state(cfg, grid, scale, V)
    integ = cfg.integrator
    try:
        ecfg = EvolveConfig(
            t_final=float(integ.get("t_final", 1.0)),
            dt=float(integ.get("dt", 1e-3)),
            exchange_on=exchange_on,
            include_Vext=bool(integ.get("include_Vext", False)),
            krylov_dim=int(integ.get("krylov_dim", 8)),
            snapshot_times=integ.get("snapshot_times"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    v_ext = _build_trap(cfg, grid) if ecfg.include_Vext else None
    try:
        traj = evolve(state, V, ecfg, v_ext)
    except PropagationError as exc:
        write_trajectory_csv(out / "diagnostics.csv", exc.trajectory, grid.d)
        write_json_atomic(out / "failure.json", {"error": str(exc)})
        return 3
    write_trajectory_csv(out / "diagnostics.csv", traj, grid.d)
    for i, (t, snap) in enumerate(traj.snapshots):
        save_orbitals(snap, out / f"state_{i:04d}.bin", creation="evolve", parameters={"t": t})
    return 0


def _exp_evolve_vlasov(cfg: RunConfig, out: Path) -> int:
    from .semiclassics import evolve_vlasov, wigner_transform
    from .storage import save_phase_space

    grid = _build_grid(cfg)
    V = _build_potential(cfg)
    scale = _build_scale(cfg, grid)
    state = _initial_state(cfg, grid, scale, V)
    W0 = wigner_transform(state)
    integ = cfg.integrator
    try:
        traj = evolve_vlasov(
            W0,
            V,
            t_final=float(integ.get("t_final", 0.5)),
            dt=float(integ.get("dt", 1e-3)),
            snapshot_times=integ.get("snapshot_times"),
        )
    except ValueError as exc:
        write_json_atomic(out / "failure.json", {"error": str(exc)})
        return 3
    save_phase_space(W0, out / "wigner_t0.bin")
    save_phase_space(traj.final(), out / "wigner_final.bin")
    rows = [{"t": t, "mass": m} for t, m in traj.mass_history]
    write_csv(out / "mass.csv", ["t", "mass"], rows)
    return 0


def _oracle_study_config(cfg: RunConfig):
    from .oracle import StudyConfig

    o = cfg.oracle
    return StudyConfig(
        M=int(cfg.grid.get("M", 12)),
        N_list=tuple(int(n) for n in o.get("N_list", [2, 3])),
        times=tuple(float(t) for t in o.get("times", [0.0, 0.25, 0.5])),
        dt_mf=float(cfg.integrator.get("dt", 1e-3)),
        L=float(cfg.grid.get("L", 2.0 * np.pi)),
        potential=_build_potential(cfg),
        trap_depth=float(cfg.trap.get("depth", 1.0)),
        exchange_on=bool(cfg.integrator.get("exchange_on", True)),
    )


def _oracle_cell_worker(args):
    from .oracle import _study_cell

    study, n = args
    try:
        return n, _study_cell(study, n), None
    except Exception as exc:  # recorded per cell
        return n, None, str(exc)


def _exp_oracle_compare(cfg: RunConfig, out: Path, jobs: int) -> int:
    from .oracle import RESULT_COLUMNS, StudyConfig

    study = _oracle_study_config(cfg)
    cells_dir = out / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    run_hash = cfg.hash()

    pending = []
    for n in study.cells():
        cell_file = cells_dir / f"N{n:03d}.json"
        if cell_file.exists():
            try:
                cached = json.loads(cell_file.read_text())
                if cached.get("hash") == run_hash:
                    continue
            except json.JSONDecodeError:
                pass
        pending.append(n)

    def finish_cell(n, rows, error):
        payload = {"hash": run_hash, "N": n, "rows": rows, "error": error}
        write_json_atomic(cells_dir / f"N{n:03d}.json", payload)

    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for n, rows, error in pool.map(_oracle_cell_worker, [(study, n) for n in pending]):
                finish_cell(n, rows, error)
    else:
        for n in pending:
            n, rows, error = _oracle_cell_worker((study, n))
            finish_cell(n, rows, error)

    all_rows: list[dict] = []
    failed = False
    for n in study.cells():
        payload = json.loads((cells_dir / f"N{n:03d}.json").read_text())
        if payload.get("error"):
            failed = True
            all_rows.append(
                {c: float("nan") for c in RESULT_COLUMNS}
                | {"d": 1, "M": study.M, "N": n, "cell_status": f"failed: {payload['error']}"}
            )
        else:
            all_rows.extend(payload["rows"])
    all_rows.sort(key=lambda r: (r["N"], r["t"] if r["t"] == r["t"] else 1e300))
    write_csv(out / "results.csv", RESULT_COLUMNS, all_rows)

    _oracle_side_artifacts(cfg, study, out)
    if failed:
        write_json_atomic(out / "failure.json", {"error": "one or more cells failed"})
        return 3
    return 0


def _oracle_side_artifacts(cfg: RunConfig, study, out: Path) -> None:
    """Wigner snapshot and a small Wigner-vs-Vlasov gap table, so a completed
    oracle-compare directory feeds every figure kind.

    The exact-diagonalization lattice is too coarse to resolve phase space
    (trapped states reach the momentum Nyquist edge), so these companions use
    a dedicated spectral grid with the same physics parameters."""
    from .initial import scf_ground_state
    from .dynamics import EvolveConfig, evolve
    from .semiclassics import evolve_vlasov, phase_space_l1_distance, wigner_transform
    from .storage import save_phase_space

    grid = build_grid(1, int(cfg.output.get("figure_grid_M", 64)), study.L)
    n_max = max(study.N_list)
    scale = ScaleParams(N=n_max, d=1)
    trap = cos_well(grid, study.trap_depth)
    state = scf_ground_state(trap, PotentialSpec("zero"), scale).orbitals
    W0 = wigner_transform(state)
    save_phase_space(W0, out / "wigner_t0.bin")

    times = sorted(t for t in study.times if t > 0)
    rows = []
    if times:
        ecfg = EvolveConfig(
            t_final=max(times),
            dt=study.dt_mf,
            exchange_on=study.exchange_on,
            snapshot_times=times,
            record_commutators=False,
        )
        traj = evolve(state, study.potential, ecfg)
        vtraj = evolve_vlasov(W0, study.potential, t_final=max(times), dt=study.dt_mf, snapshot_times=times)
        vl = {round(t, 12): w for t, w in vtraj.snapshots}
        masses = dict(vtraj.mass_history)
        for t, snap in traj.snapshots:
            key = round(t, 12)
            if key in vl:
                whf = wigner_transform(snap, v_grid=W0.v_grid)
                rows.append(
                    {
                        "t": t,
                        "l1_distance": phase_space_l1_distance(whf, vl[key]),
                        "mass_W1": whf.mass,
                        "mass_W2": vl[key].mass,
                    }
                )
    write_csv(out / "vlasov_compare.csv", ["t", "l1_distance", "mass_W1", "mass_W2"], rows)


def _exp_semiclassical_sweep(cfg: RunConfig, out: Path) -> int:
    from .initial import free_fermi_sea, scf_ground_state
    from .semiclassics import commutator_report

    grid = _build_grid(cfg)
    V = _build_potential(cfg)
    source = cfg.sweep.get("source", "free-sea")
    rows = []
    status = 0
    for n in cfg.sweep.get("N_list", []):
        scale = ScaleParams(N=int(n), d=grid.d)
        try:
            if source == "free-sea":
                state = free_fermi_sea(grid, scale)
            elif source == "scf":
                trap = _build_trap(cfg, grid)
                if trap is None:
                    raise ConfigError("sweep.source=scf requires a trap")
                state = scf_ground_state(trap, V, scale).orbitals
            else:
                raise ConfigError(f"unknown sweep.source {source!r}")
            rep = commutator_report(state)
            rows.append(
                {
                    "N": scale.N,
                    "epsilon": scale.epsilon,
                    "status": "ok",
                    **{f"comm_x_{a + 1}": rep.position[a] for a in range(grid.d)},
                    **{f"comm_x_ratio_{a + 1}": rep.position_ratio[a] for a in range(grid.d)},
                    **{f"comm_grad_{a + 1}": rep.gradient[a] for a in range(grid.d)},
                }
            )
        except ConfigError:
            raise
        except Exception as exc:
            rows.append({"N": int(n), "epsilon": float("nan"), "status": f"failed: {exc}"})
            status = 3
    if rows:
        cols = list(rows[0].keys())
        write_csv(out / "results.csv", cols, rows)
    return status


def _exp_diagnostics(cfg: RunConfig, out: Path) -> int:
    from .initial import hf_energy
    from .semiclassics import commutator_report
    from .storage import load_orbitals

    src = cfg.init.get("state_file")
    if not src:
        raise ConfigError("diagnostics needs init.state_file")
    if not Path(src).exists():
        raise ConfigError(f"state file not found: {src}")
    state = load_orbitals(src)
    V = _build_potential(cfg)
    rep = commutator_report(state)
    rows = [
        {
            "N": state.scale.N,
            "epsilon": state.scale.epsilon,
            "energy": hf_energy(state, None, V),
            "orthonormality_defect": state.orthonormality_defect(),
            "projection_defect": state.projection_defect_hs(),
            **{f"comm_x_{a + 1}": rep.position[a] for a in range(state.grid.d)},
            **{f"comm_x_ratio_{a + 1}": rep.position_ratio[a] for a in range(state.grid.d)},
            **{f"comm_grad_{a + 1}": rep.gradient[a] for a in range(state.grid.d)},
        }
    ]
    write_csv(out / "results.csv", list(rows[0].keys()), rows)
    return 0


def run_experiment(cfg: RunConfig, force: bool = False, jobs: int = 1) -> int:
    out = _out_dir(cfg)
    manifest_path = out / "manifest.json"
    if manifest_path.exists() and not force:
        print(f"error: output exists at {out} (use --force to overwrite/resume)", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    write_json_atomic(
        manifest_path,
        {"config": cfg.to_dict(), "hash": cfg.hash(), "version": f"fml {__version__}"},
    )
    if cfg.experiment == "init":
        return _exp_init(cfg, out)
    if cfg.experiment == "evolve-hf":
        return _exp_evolve(cfg, out, exchange_on=True)
    if cfg.experiment == "evolve-hartree":
        return _exp_evolve(cfg, out, exchange_on=False)
    if cfg.experiment == "evolve-vlasov":
        return _exp_evolve_vlasov(cfg, out)
    if cfg.experiment == "oracle-compare":
        return _exp_oracle_compare(cfg, out, jobs)
    if cfg.experiment == "semiclassical-sweep":
        return _exp_semiclassical_sweep(cfg, out)
    if cfg.experiment == "diagnostics":
        return _exp_diagnostics(cfg, out)
    raise ConfigError(f"unhandled experiment {cfg.experiment!r}")


def _cmd_run(args) -> int:
    try:
        cfg = parse_config_file(args.config)
        violations = validate_config(cfg)
        if violations:
            for v in violations:
                print(f"config violation: {v}", file=sys.stderr)
            return 2
        return run_experiment(cfg, force=args.force, jobs=args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _cmd_validate(args) -> int:
    try:
        cfg = parse_config_file(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}")
        return 2
    violations = validate_config(cfg)
    grid_pts = int(cfg.grid.get("M", 0)) ** int(cfg.grid.get("d", 1))
    mem = 2 * grid_pts**2 * 16 / 1e6
    print(f"experiment: {cfg.experiment}")
    print(f"estimated cells: {_estimate_cells(cfg)}")
    print(f"estimated dense-kernel memory: {mem:.1f} MB")
    if violations:
        print("violations:")
        for v in violations:
            print(f"  - {v}")
    else:
        print("violations: none")
    return 0


def _cmd_info(args) -> int:
    d = Path(args.artifact_dir)
    manifest = d / "manifest.json"
    if not manifest.exists():
        print(f"no manifest.json under {d}", file=sys.stderr)
        return 2
    meta = json.loads(manifest.read_text())
    print(f"version: {meta.get('version')}")
    print(f"hash:    {meta.get('hash')}")
    print(f"experiment: {meta.get('config', {}).get('experiment')}")
    for f in sorted(d.iterdir()):
        if f.name == "manifest.json" or f.is_dir():
            continue
        print(f"  {f.name}  ({f.stat().st_size} bytes)")
    results = d / "results.csv"
    if results.exists():
        rows = read_csv(results)
        print(f"results.csv: {len(rows)} rows")
        statuses = {r.get("cell_status", r.get("status", "ok")) for r in rows}
        print(f"  statuses: {sorted(statuses)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fml", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--force", action="store_true", help="overwrite/resume an existing output dir")
    p_run.add_argument(
        "--jobs",
        "-j",
        type=int,
        default=int(os.environ.get("FML_JOBS", "1")),
        help="parallel sweep cells (default: env FML_JOBS or 1)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config against guards without running")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_info = sub.add_parser("info", help="summarize an artifact directory")
    p_info.add_argument("artifact_dir")
    p_info.set_defaults(func=_cmd_info)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
