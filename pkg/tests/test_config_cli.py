import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from wiggly.cli import main
from wiggly.config import ConfigError, ExperimentConfig, Grid, load_config, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "scripts" / "configs"

SMALL = {
    "grids": {"xi": [-2.0, 2.0, 9], "v": [0.0, 2.0, 5], "h": [-2.0, -0.1, 4],
              "eps": [0.2, 0.1]},
    "landscape": {"eps": 0.1},
}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=2))
    return p


def test_defaults_roundtrip():
    cfg = ExperimentConfig()
    again = parse_config(json.loads(cfg.dumps()))
    assert again.to_dict() == cfg.to_dict()


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    cfg = load_config(path)
    assert cfg.eps > 0


def test_grid_values():
    assert np.allclose(Grid(0, 1, 3).values(), [0, 0.5, 1])
    with pytest.raises(ValueError):
        Grid(0, 1, 0)


def test_unknown_section_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "potential": {"kind": "quadratic"},\n  "nonsense": 1\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.line == 3


def test_bad_eps_list(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "grids": {"eps": [0.1, 0.2]}\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.line == 2 and "grids" in str(exc.value)


def test_json_syntax_error_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "grids": {\n  "eps": [0.1,, 0.2]}\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert exc.value.line == 3


def test_negative_eps_rejected():
    with pytest.raises(ConfigError):
        parse_config({"landscape": {"eps": -1}})


def test_tabulated_samples_file(tmp_path):
    (tmp_path / "prof.txt").write_text("0 1 0.5 -0.7 -0.4\n")
    p = write(tmp_path, {"profile": {"kind": "tabulated", "samples_file": "prof.txt"}})
    cfg = load_config(p)
    assert cfg.profile.kind == "tabulated" and abs(cfg.profile.mean()) < 1e-12


def test_cli_kinetic_relation(tmp_path, capsys):
    p = write(tmp_path, SMALL)
    assert main(["kinetic-relation", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "kinetic_relation.csv").read_text().splitlines()
    assert lines[0] == "xi,K,R_eff_star" and len(lines) == 10


def test_cli_contact_surface(tmp_path):
    p = write(tmp_path, SMALL)
    assert main(["contact-surface", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "contact_surface.json").read_text())
    assert rep["min_M_minus_vxi"] >= -1e-9


def test_cli_flow_and_sweep(tmp_path):
    p = write(tmp_path, SMALL)
    assert main(["flow", "--config", str(p), "--out", str(tmp_path / "f")]) == 0
    assert (tmp_path / "f" / "trajectory_wiggly.csv").exists()
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "s")]) == 0
    rep = json.loads((tmp_path / "s" / "sweep_report.json").read_text())
    assert rep["eps"] == [0.2, 0.1]


def test_cli_verify_passes_on_default(tmp_path, capsys):
    p = write(tmp_path, SMALL)
    assert main(["verify", "--config", str(p), "--out", str(tmp_path / "v")]) == 0
    out = capsys.readouterr().out
    assert "edb" in out and "FAIL" not in out


def test_cli_verify_fails_on_coarse_integrator(tmp_path, capsys):
    assert main(["verify", "--config", str(CONFIGS / "coarse_ode.json"),
                 "--out", str(tmp_path / "v")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "grids": {"eps": [0.1, 0.2]}\n}\n')
    assert main(["verify", "--config", str(p)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_bad_tol_scale(capsys):
    assert main(["verify", "--tol-scale", "0"]) == 2


def test_module_entry_point(tmp_path):
    p = write(tmp_path, SMALL)
    r = subprocess.run([sys.executable, "-m", "wiggly", "kinetic-relation", "--config", str(p),
                        "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
