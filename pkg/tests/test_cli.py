import csv
import json

import pytest

from stratawave import cli
from stratawave.cli import ConfigError, RunConfig


LAMBDA_1 = -1.1207441833126341
ALPHA_1 = -0.45611250365943495
SIGMA_DEGENERATE = 0.23488891408622858


def test_config_defaults_and_overrides():
    config = RunConfig.from_mapping({"k": 2, "s": 0.015})
    assert config.k == 2
    assert config.s == 0.015
    assert config.branch == 1
    assert config.params.rho == 1.0
    assert config.method == "asymptotic"
    round_trip = config.to_dict()
    assert round_trip["k"] == 2
    assert round_trip["nx"] == 64


@pytest.mark.parametrize("bad", [
    {"rho": 0.8, "rho_bar": 0.9},
    {"branch": 3},
    {"nx": 24},
    {"ny": 4},
    {"method": "spectral"},
    {"tol": 0.0},
    {"s": -0.1},
    {"k": 0},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(bad)


def test_missing_wavenumber_is_a_config_error(capsys):
    code = cli.main(["dispersion"])
    assert code == 2
    err = capsys.readouterr().err
    assert "wavenumber" in err


def test_unknown_subcommand():
    assert cli.run("sing", {"k": 1}) == 2


def test_dispersion_stdout(capsys):
    code = cli.main(["dispersion", "--k", "3"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["k"] == 3
    rows = out["rows"]
    assert len(rows) == 3
    assert float(rows[0][1]) == pytest.approx(LAMBDA_1, rel=1e-14)
    assert float(rows[0][2]) == pytest.approx(0.7399471053347516, rel=1e-14)


def test_dispersion_csv_with_sidecar(tmp_path, capsys):
    out = tmp_path / "disp.csv"
    code = cli.main(["dispersion", "--k", "2", "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert float(rows[0]["lambda_1"]) == pytest.approx(LAMBDA_1, rel=1e-14)
    assert rows[0]["simple_1"] in ("0", "1")
    meta = json.loads((tmp_path / "disp.csv.meta.json").read_text())
    assert meta["config"]["k"] == 2


def test_expand_matches_the_quadratic_coefficients(capsys):
    code = cli.main(["expand", "--k", "1", "--branch", "1", "--s", "0.03"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    # the predictor carries no s^2 speed correction, only the profile does
    assert out["lambda"] == pytest.approx(LAMBDA_1, rel=1e-12)
    coeffs = out["profile"]["coeffs"]
    assert coeffs[0] == pytest.approx(-0.03)
    assert coeffs[1] == pytest.approx(ALPHA_1 * 0.03**2, rel=1e-12)
    assert out["coefficients"]["Lambda"] == pytest.approx(LAMBDA_1, rel=1e-14)


def test_branch_single_point_csv(tmp_path):
    out = tmp_path / "point.csv"
    code = cli.main(["branch", "--k", "1", "--s", "0.01", "--nx", "32",
                     "--ny", "49", "--tol", "1e-8", "--out", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    row = rows[0]
    assert float(row["s"]) == 0.01
    assert float(row["a1"]) == -0.01
    assert float(row["lambda"]) == pytest.approx(-1.12069119, abs=1e-3)
    assert float(row["residual"]) < 1e-8
    meta = json.loads((tmp_path / "point.csv.meta.json").read_text())
    assert meta["points"][0]["branch_id"] == [1, 1]


def test_field_csv(tmp_path):
    out = tmp_path / "field.csv"
    code = cli.main(["field", "--k", "1", "--s", "0.02", "--nx", "16",
                     "--ny", "17", "--out", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 16 * 17
    layers = {r["layer"] for r in rows}
    assert layers == {"lower", "upper"}
    sample = rows[10]
    float(sample["psi"]), float(sample["u_rel"]), float(sample["v"])


def test_flow_reports_the_stagnation_triple(capsys):
    code = cli.main(["flow", "--k", "1", "--s", "0.02", "--nx", "64",
                     "--ny", "65"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    points = out["report"]["points"]
    assert len(points) == 3
    kinds = sorted(p[2] for p in points)
    assert kinds == ["interior-center", "surface", "surface"]


def test_plot_writes_svg(tmp_path):
    out = tmp_path / "flow.svg"
    code = cli.main(["plot", "--k", "1", "--s", "0.02", "--nx", "64",
                     "--ny", "65", "--out", str(out)])
    assert code == 0
    head = out.read_text()[:400]
    assert "<svg" in head or "<?xml" in head
    assert (tmp_path / "flow.svg.meta.json").exists()


def test_verify_passes_on_defaults(capsys):
    code = cli.main(["verify", "--s", "0.01", "--tol", "1e-8"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] is True
    assert all(c["passed"] for c in out["checks"])
    names = {c["name"] for c in out["checks"]}
    assert "flat interface is a solution" in names


def test_degenerate_branch_exits_numerical(capsys):
    code = cli.main(["expand", "--k", "1", "--branch", "1",
                     "--sigma", str(SIGMA_DEGENERATE), "--omega-bar", "0"])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "numerical-failure"
    assert err["type"] == "DegenerateBranchError"


def test_config_file_merge_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"k": 2, "s": 0.015, "branch": 2}))
    code = cli.main(["expand", "--config", str(cfg), "--s", "0.01"])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["k"] == 2
    assert out["config"]["branch"] == 2
    assert out["config"]["s"] == 0.01


def test_unreadable_config_file(tmp_path, capsys):
    missing = tmp_path / "none.json"
    assert cli.main(["dispersion", "--config", str(missing)]) == 2
    assert "cannot read" in capsys.readouterr().err
