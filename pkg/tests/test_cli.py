import json
import math

import numpy as np
import pytest

from feastube import cli
from feastube import value as val


def _capture(capsys):
    out = capsys.readouterr().out.strip().splitlines()
    return json.loads(out[-1])


def test_unknown_subcommand_is_usage_error(capsys):
    assert cli.run(["frobnicate"]) == 1


def test_missing_command_is_usage_error():
    assert cli.run([]) == 1


def test_geom_dist_line(capsys):
    code = cli.run(["geom", "dist", "--problem", "moving-wall-1d",
                    "--t0", "0", "--x0", "1.3"])
    assert code == 0
    line = _capture(capsys)
    assert line["distance"] == pytest.approx(0.3, abs=1e-6)
    assert line["witness"][0] == pytest.approx(1.0, abs=1e-6)


def test_geom_active_line(capsys):
    code = cli.run(["geom", "active", "--problem", "moving-wall-1d",
                    "--t0", "0", "--x0", "1.0", "--delta", "0.1"])
    assert code == 0
    line = _capture(capsys)
    assert line["indices"] == [0]
    assert line["conservative"] is True


def test_ipc_verify_pass_and_artifact(tmp_path, capsys):
    code = cli.run(["ipc", "verify", "--problem", "moving-wall-1d",
                    "--rmin", "0.9", "--ntime", "30", "--ndirs", "2",
                    "--out", str(tmp_path)])
    assert code == 0
    line = _capture(capsys)
    assert line["ok"] and line["r"] == pytest.approx(1.0, abs=1e-9)
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["r"] == pytest.approx(1.0, abs=1e-9)
    assert set(cert) >= {"r", "delta", "eps", "eta", "n_samples", "worst_witness"}


def test_ipc_verify_pinched_corridor_fails(capsys):
    code = cli.run(["ipc", "verify", "--problem", "corridor-2d",
                    "--set", "width=0.01", "--delta", "0.1",
                    "--rmin", "0.5", "--ntime", "8", "--ndirs", "8"])
    assert code == 2
    line = _capture(capsys)
    assert not line["ok"]
    assert line["worst"]["r"] <= 1e-9


def test_unknown_problem_is_usage_error(capsys):
    assert cli.run(["geom", "dist", "--problem", "no-such"]) == 1


def test_nft_run_roundtrip(tmp_path, capsys):
    code = cli.run(["nft", "run", "--problem", "moving-wall-1d",
                    "--t0", str(math.pi), "--t1", str(math.pi + 1),
                    "--x0", "0.95", "--uref", "0.0", "--dt", "2e-3",
                    "--out", str(tmp_path)])
    assert code == 0
    line = _capture(capsys)
    assert line["ok"]
    data = cli.read_trajectory_csv(tmp_path / "corrected.csv")
    assert np.all(data["maxh"] <= 1e-9)
    ref = cli.read_trajectory_csv(tmp_path / "reference.csv")
    assert np.max(ref["dist"]) == pytest.approx(line["rho_in"], rel=1e-6)


def test_track_run(tmp_path, capsys):
    code = cli.run(["track", "run", "--problem", "moving-wall-1d",
                    "--x0", "0.5", "--x1", "0.4", "--horizon", "2",
                    "--dt", "2e-3", "--out", str(tmp_path)])
    assert code == 0
    dev = cli.read_trajectory_like(tmp_path / "deviations.csv")
    assert np.all(dev["deviation"] <= dev["bound"] + 1e-12)


def test_value_solve_field_roundtrip(tmp_path, capsys):
    code = cli.run(["value", "solve", "--problem", "moving-wall-1d",
                    "--lambda", "6", "--points", "46", "--horizon", "2",
                    "--out", str(tmp_path)])
    assert code == 0
    field = cli.read_field(tmp_path, "field")
    assert field.lam == 6.0
    v = val.evaluate_value(field, 0.0, [0.0])
    assert np.isfinite(v)


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# pinned settings\nproblem = moving-wall-1d\nt0 = 0.0\n"
                   "x0 = 1.3\ndelta = 0.2\n")
    code = cli.run(["geom", "active", "--config", str(cfg), "--delta", "0.1"])
    assert code == 0
    line = _capture(capsys)
    # flag wins over config for delta; config supplies problem and x0
    assert line["radius_delta"] == 0.1
    assert line["x"] == [1.3]


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nope = 1\n")
    assert cli.run(["geom", "dist", "--config", str(cfg)]) == 1


def test_pipeline_deterministic(tmp_path, capsys):
    args = ["pipeline", "--problem", "moving-wall-1d", "--lambda", "6",
            "--points", "61", "--seed", "3"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.run(args + ["--out", str(out1)]) == 0
    assert cli.run(args + ["--out", str(out2)]) == 0
    files1 = sorted(fp.relative_to(out1) for fp in out1.rglob("*") if fp.is_file())
    files2 = sorted(fp.relative_to(out2) for fp in out2.rglob("*") if fp.is_file())
    assert files1 and files1 == files2
    for rel in files1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel


def test_pipeline_artifacts_parse_back(tmp_path, capsys):
    out = tmp_path / "run"
    assert cli.run(["pipeline", "--problem", "moving-wall-1d", "--lambda", "6",
                    "--points", "61", "--out", str(out)]) == 0
    verdicts = json.loads((out / "verdicts.json").read_text())
    assert verdicts["assumptions"] is True
    assert verdicts["ipc"] is True
    field = cli.read_field(out, "field_relaxed")
    assert field.relaxed
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["ok"]
    assert (out / "summary.json").exists()
