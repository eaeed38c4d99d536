"""Figure-suite acceptance: all five kinds render from a completed
oracle-compare artifact directory; removing a required CSV column produces a
schema error naming it.

The artifacts are produced by the `fml` CLI in a subprocess: this package
talks to the simulator only through files.
"""

import json
import shutil
import subprocess
import sys

import pytest

from fmlfig import FIGURE_KINDS, FigureSpec, SchemaError, render
from fmlfig.cli import main as fig_main


@pytest.fixture(scope="session")
def oracle_artifacts(tmp_path_factory):
    base = tmp_path_factory.mktemp("artifacts")
    out = base / "oracle-compare"
    cfg = base / "run.cfg"
    cfg.write_text(
        f"""
        experiment = oracle-compare
        grid.M = 10
        oracle.N_list = [2, 3]
        oracle.times = [0.0, 0.2, 0.4]
        integrator.dt = 0.002
        potential.kind = gaussian
        potential.amplitude = 0.5
        potential.width = 0.6
        trap.kind = cos-well
        trap.depth = 1.5
        output.dir = {out}
        """
    )
    proc = subprocess.run(
        [sys.executable, "-m", "fml.cli", "run", str(cfg)], capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    return out


def test_all_five_kinds_render(oracle_artifacts, tmp_path):
    produced = []
    for kind in FIGURE_KINDS:
        out = tmp_path / f"{kind}.svg"
        path = render(FigureSpec(str(oracle_artifacts), kind, str(out)))
        assert path.exists() and path.stat().st_size > 0
        produced.append(kind)
    print(f"[ACCEPTANCE 10] PASS rendered {len(produced)}/5 figure kinds: {produced}")


def test_png_format(oracle_artifacts, tmp_path):
    out = tmp_path / "w.png"
    render(FigureSpec(str(oracle_artifacts), "wigner-heatmap", str(out), format="png"))
    assert out.stat().st_size > 0


def test_missing_column_names_it(oracle_artifacts, tmp_path):
    mutated = tmp_path / "mutated"
    shutil.copytree(oracle_artifacts, mutated)
    results = mutated / "results.csv"
    lines = results.read_text().splitlines()
    header = lines[0].split(",")
    drop = header.index("fluct_number")
    keep = [i for i in range(len(header)) if i != drop]
    results.write_text(
        "\n".join(",".join(row.split(",")[i] for i in keep) for row in lines) + "\n"
    )
    with pytest.raises(SchemaError, match="fluct_number"):
        render(FigureSpec(str(mutated), "convergence-scaling", str(tmp_path / "x.svg")))


def test_cli_roundtrip_and_errors(oracle_artifacts, tmp_path, capsys):
    spec = tmp_path / "spec.json"
    out = tmp_path / "fig.svg"
    spec.write_text(
        json.dumps(
            {
                "input_dir": str(oracle_artifacts),
                "kind": "vlasov-gap",
                "output": str(out),
            }
        )
    )
    assert fig_main([str(spec)]) == 0
    assert out.stat().st_size > 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"input_dir": str(oracle_artifacts), "kind": "nope", "output": "x"}))
    assert fig_main([str(bad)]) == 2
    assert "schema error" in capsys.readouterr().err


def test_rendering_is_deterministic(oracle_artifacts, tmp_path):
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    render(FigureSpec(str(oracle_artifacts), "commutator-growth", str(a)))
    render(FigureSpec(str(oracle_artifacts), "commutator-growth", str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_rendering_is_read_only(oracle_artifacts, tmp_path):
    before = sorted(p.name for p in oracle_artifacts.rglob("*"))
    render(FigureSpec(str(oracle_artifacts), "energy-drift", str(tmp_path / "e.svg")))
    after = sorted(p.name for p in oracle_artifacts.rglob("*"))
    assert before == after


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError, match="unknown figure kind"):
        FigureSpec(str(tmp_path), "not-a-kind", "x.svg")
