import json

import numpy as np
import pytest

from fml.cli import RunConfig, main, parse_config_file, validate_config
from fml.storage import read_csv


def write_config(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_flat_config(tmp_path):
    cfg = parse_config_file(
        write_config(
            tmp_path,
            """
            # free sea init
            experiment = init
            grid.d = 1
            grid.M = 16
            grid.L = 6.283185307179586
            scale.N = 3
            init.source = free-sea
            output.dir = out
            seed = 7
            """,
        )
    )
    assert cfg.experiment == "init"
    assert cfg.grid["M"] == 16
    assert cfg.seed == 7


def test_config_roundtrip_lossless(tmp_path):
    cfg = parse_config_file(
        write_config(
            tmp_path,
            """
            experiment = oracle-compare
            grid.M = 10
            oracle.N_list = [2, 3]
            oracle.times = [0.0, 0.2]
            potential.kind = gaussian
            potential.amplitude = 0.5
            potential.width = 0.6
            trap.kind = cos-well
            trap.depth = 1.5
            output.dir = out
            """,
        )
    )
    again = RunConfig.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
    assert again.hash() == cfg.hash()


def test_parse_json_config(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"experiment": "init", "grid": {"M": 16}, "scale": {"N": 3}, "output": {"dir": "o"}}))
    cfg = parse_config_file(p)
    assert cfg.experiment == "init"


def test_validate_basis_guard(tmp_path):
    path = write_config(
        tmp_path,
        """
        experiment = oracle-compare
        grid.M = 24
        oracle.N_list = [12]
        output.dir = out
        """,
    )
    cfg = parse_config_file(path)
    violations = validate_config(cfg)
    assert any("basis guard" in v for v in violations)


def test_validate_missing_potential_width(tmp_path):
    path = write_config(
        tmp_path,
        """
        experiment = init
        grid.M = 16
        scale.N = 3
        potential.kind = gaussian
        potential.amplitude = 0.5
        output.dir = out
        """,
    )
    violations = validate_config(parse_config_file(path))
    assert any("schema error" in v and "width" in v for v in violations)


def test_validate_clean_config(tmp_path):
    path = write_config(
        tmp_path,
        """
        experiment = init
        grid.M = 16
        scale.N = 3
        init.source = free-sea
        output.dir = out
        """,
    )
    assert validate_config(parse_config_file(path)) == []


def test_run_init_free_sea(tmp_path):
    out = tmp_path / "artifacts"
    path = write_config(
        tmp_path,
        f"""
        experiment = init
        grid.d = 1
        grid.M = 16
        scale.N = 3
        init.source = free-sea
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    assert (out / "orbitals.bin").exists()
    assert (out / "orbitals.bin.json").exists()
    assert (out / "manifest.json").exists()
    rows = read_csv(out / "diagnostics.csv")
    assert float(rows[0]["trace"]) == pytest.approx(3.0, abs=1e-10)


def test_run_refuses_overwrite(tmp_path, capsys):
    out = tmp_path / "artifacts"
    path = write_config(
        tmp_path,
        f"""
        experiment = init
        grid.M = 16
        scale.N = 3
        init.source = free-sea
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    assert main(["run", path]) == 2
    assert "output exists" in capsys.readouterr().err
    assert main(["run", path, "--force"]) == 0


def test_run_bad_config_exits_2(tmp_path):
    path = write_config(tmp_path, "experiment = nonsense\n")
    assert main(["run", path]) == 2
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_run_oracle_compare_free(tmp_path):
    out = tmp_path / "oc"
    path = write_config(
        tmp_path,
        f"""
        experiment = oracle-compare
        grid.M = 10
        oracle.N_list = [2, 3]
        oracle.times = [0.0, 0.2]
        integrator.dt = 0.002
        trap.kind = cos-well
        trap.depth = 1.5
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    rows = read_csv(out / "results.csv")
    assert all(r["cell_status"] == "ok" for r in rows)
    assert all(float(r["hs_dist"]) <= 1e-6 for r in rows)
    assert (out / "wigner_t0.bin").exists()
    assert (out / "vlasov_compare.csv").exists()
    # resumable cells keyed by config hash
    cells = sorted(p.name for p in (out / "cells").iterdir())
    assert cells == ["N002.json", "N003.json"]


def test_run_evolve_hf_artifacts(tmp_path):
    out = tmp_path / "evo"
    path = write_config(
        tmp_path,
        f"""
        experiment = evolve-hf
        grid.M = 16
        scale.N = 3
        init.source = free-sea
        potential.kind = gaussian
        potential.amplitude = 0.3
        potential.width = 0.5
        integrator.t_final = 0.05
        integrator.dt = 0.005
        integrator.snapshot_times = [0.0, 0.05]
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    rows = read_csv(out / "diagnostics.csv")
    assert set(rows[0].keys()) == {
        "t",
        "energy",
        "trace",
        "orthonormality_defect",
        "comm_x_1",
        "exch_comm_hs",
    }
    assert (out / "state_0000.bin").exists()
    assert (out / "state_0001.bin").exists()


def test_run_semiclassical_sweep(tmp_path):
    out = tmp_path / "sweep"
    path = write_config(
        tmp_path,
        f"""
        experiment = semiclassical-sweep
        grid.M = 64
        sweep.N_list = [9, 17]
        sweep.source = free-sea
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    rows = read_csv(out / "results.csv")
    ratios = [float(r["comm_x_ratio_1"]) for r in rows]
    assert all(abs(r - 2.0) < 1e-8 for r in ratios)


def test_info_smoke(tmp_path, capsys):
    out = tmp_path / "artifacts"
    path = write_config(
        tmp_path,
        f"""
        experiment = init
        grid.M = 16
        scale.N = 3
        init.source = free-sea
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    assert main(["info", str(out)]) == 0
    text = capsys.readouterr().out
    assert "experiment: init" in text
    assert "orbitals.bin" in text


def test_validate_cli_reports(tmp_path, capsys):
    path = write_config(
        tmp_path,
        """
        experiment = oracle-compare
        grid.M = 24
        oracle.N_list = [12]
        output.dir = out
        """,
    )
    assert main(["validate", path]) == 0
    text = capsys.readouterr().out
    assert "basis guard" in text


def test_run_evolve_vlasov(tmp_path):
    out = tmp_path / "vl"
    path = write_config(
        tmp_path,
        f"""
        experiment = evolve-vlasov
        grid.M = 64
        scale.N = 7
        init.source = trap
        trap.kind = cos-well
        trap.depth = 1.5
        potential.kind = gaussian
        potential.amplitude = 0.3
        potential.width = 0.5
        integrator.t_final = 0.1
        integrator.dt = 0.005
        output.dir = {out}
        """,
    )
    assert main(["run", path]) == 0
    assert (out / "wigner_t0.bin").exists()
    assert (out / "wigner_final.bin").exists()
    rows = read_csv(out / "mass.csv")
    masses = [float(r["mass"]) for r in rows]
    assert max(abs(m - masses[0]) for m in masses) < 1e-8


def test_run_diagnostics_from_state_file(tmp_path):
    init_out = tmp_path / "init"
    path = write_config(
        tmp_path,
        f"""
        experiment = init
        grid.M = 32
        scale.N = 5
        init.source = free-sea
        output.dir = {init_out}
        """,
        name="init.cfg",
    )
    assert main(["run", path]) == 0
    diag_out = tmp_path / "diag"
    path2 = write_config(
        tmp_path,
        f"""
        experiment = diagnostics
        grid.M = 32
        scale.N = 5
        init.state_file = {init_out / 'orbitals.bin'}
        output.dir = {diag_out}
        """,
        name="diag.cfg",
    )
    assert main(["run", path2]) == 0
    rows = read_csv(diag_out / "results.csv")
    assert float(rows[0]["comm_x_ratio_1"]) == pytest.approx(2.0, abs=1e-6)


def test_run_oracle_compare_parallel_jobs(tmp_path):
    out = tmp_path / "oc_par"
    path = write_config(
        tmp_path,
        f"""
        experiment = oracle-compare
        grid.M = 10
        oracle.N_list = [2, 3]
        oracle.times = [0.0, 0.2]
        integrator.dt = 0.002
        trap.kind = cos-well
        trap.depth = 1.5
        output.dir = {out}
        """,
    )
    assert main(["run", path, "--jobs", "2"]) == 0
    rows = read_csv(out / "results.csv")
    assert sorted({r["N"] for r in rows}) == ["2", "3"]
    assert all(r["cell_status"] == "ok" for r in rows)
