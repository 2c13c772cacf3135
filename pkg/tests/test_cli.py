import json

import pytest

from xrelay import analysis
from xrelay.cli import UsageError, main, parse_invocation, parse_snr_grid


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_feasibility_feasible(capsys):
    code, out, err = run_cli(["feasibility", "--tx", "3", "--rx", "3", "--relay-antennas", "2"],
                             capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["feasible"] is True and doc["margin"] == 0
    assert "resolved config" in err


def test_feasibility_infeasible(capsys):
    code, out, _ = run_cli(["feasibility", "--tx", "3", "--rx", "3", "--relay-antennas", "1"],
                           capsys)
    assert code == 2
    assert json.loads(out)["margin"] == -3


@pytest.mark.parametrize("argv", [
    ["feasibility", "--tx", "3", "--rx", "3", "--relay-antennas", "1,x"],
    ["feasibility", "--tx", "3", "--rx", "3", "--relay-antennas", "0"],
    ["feasibility", "--tx", "3", "--rx", "3", "--bogus"],
    ["feasibility", "--rx", "3"],
    ["feasibility", "--tx", "0", "--rx", "3"],
    ["sweep", "--tx", "2", "--rx", "2", "--relay-antennas", "1", "--trials", "0"],
    ["dof", "--tx", "2", "--rx", "2", "--relay-antennas", "1", "--snr", "60:30:10"],
    ["dof", "--tx", "2", "--rx", "2", "--relay-antennas", "1", "--snr", "a:b:c"],
    ["certify", "--tx", "2", "--rx", "2", "--relay-antennas", "1", "--jobs", "0"],
    ["certify", "--tx", "2", "--rx", "2", "--channel", "fast"],
    ["launch"],
    [],
])
def test_usage_errors(argv, capsys):
    code, _, err = run_cli(argv, capsys)
    assert code == 64
    assert "usage error" in err


def test_usage_error_names_flag():
    with pytest.raises(UsageError, match="--relay-antennas"):
        parse_invocation(["feasibility", "--tx", "2", "--rx", "2", "--relay-antennas", "1,x"])


def test_snr_grid_parsing():
    assert parse_snr_grid("30:60:10") == [30.0, 40.0, 50.0, 60.0]
    assert parse_snr_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_snr_grid("5:5:1") == [5.0]


def test_certify_writes_json(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run_cli(["certify", "--tx", "2", "--rx", "2", "--relay-antennas", "1",
                          "--trials", "100", "--channel", "constant", "--seed", "7",
                          "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["pass"] is True and doc["pass_rate"] == 1.0
    assert doc["config"]["channel_mode"] == "constant" and doc["seed"] == 7


def test_certify_failure_exit_code(monkeypatch, tmp_path, capsys):
    real = analysis.certify

    def broken(cfg, seed=None, **kw):
        report = real(cfg, seed, **kw)
        report.passed = False
        return report
    monkeypatch.setattr(analysis, "certify", broken)
    code, _, _ = run_cli(["certify", "--tx", "2", "--rx", "2", "--relay-antennas", "1",
                          "--trials", "3", "--jobs", "1", "--out", str(tmp_path / "r.json")],
                         capsys)
    assert code == 1


def test_infeasible_campaign_exit_code(monkeypatch, capsys):
    def never(*a, **k):
        raise AssertionError("solver invoked")
    monkeypatch.setattr(analysis, "solve_precoders", never)
    for cmd in ("certify", "sweep", "dof"):
        code, out, _ = run_cli([cmd, "--tx", "3", "--rx", "3", "--relay-antennas", "1"], capsys)
        assert code == 2 and out == ""


def test_dof_csv(capsys):
    code, out, _ = run_cli(["dof", "--tx", "2", "--rx", "2", "--relay-antennas", "1",
                            "--snr", "30:60:10", "--trials", "200", "--jobs", "1"], capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "slope,theoretical,rel_error,fit_points"
    slope, theory, rel, pts = row.split(",")
    assert abs(float(slope) - 4 / 3) <= 0.05 * 4 / 3
    assert int(pts) == 2


def test_sweep_csv(capsys):
    code, out, _ = run_cli(["sweep", "--tx", "2", "--rx", "3", "--relay-antennas", "2",
                            "--snr", "0:20:10", "--trials", "10", "--jobs", "1"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "snr_db,sum_rate,trials,std_err"
    assert [l.split(",")[0] for l in lines[1:]] == ["0.0", "10.0", "20.0"]


def test_config_file_and_flag_override(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"m": 3, "n": 3, "relay_antennas": [1], "channel_mode": "constant",
                                "seed": 4, "constellation": "qpsk"}))
    code, out, _ = run_cli(["feasibility", "--config", str(path)], capsys)
    assert code == 2
    code, out, _ = run_cli(["feasibility", "--config", str(path), "--relay-antennas", "1,1,1,1"],
                           capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["relay_antennas"] == [1, 1, 1, 1]
    assert doc["config"]["channel_mode"] == "constant" and doc["config"]["seed"] == 4


def test_config_file_errors(tmp_path, capsys):
    code, _, err = run_cli(["feasibility", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 74 and "I/O error" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["feasibility", "--config", str(bad)], capsys)[0] == 64
    bad.write_text(json.dumps({"m": 2, "n": 2, "relays": 3}))
    assert run_cli(["feasibility", "--config", str(bad)], capsys)[0] == 64


def test_unwritable_output(tmp_path, capsys):
    code, _, err = run_cli(["feasibility", "--tx", "2", "--rx", "2", "--relay-antennas", "1",
                            "--out", str(tmp_path / "no" / "such" / "dir.json")], capsys)
    assert code == 74 and "dir.json" in err


def test_default_seed_is_fixed():
    inv = parse_invocation(["certify", "--tx", "2", "--rx", "2", "--relay-antennas", "1"])
    assert inv.config.seed == 0 and inv.trials == 100


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "xrelay", "feasibility", "--tx", "2", "--rx",
                           "3", "--relay-antennas", "1"], capture_output=True, text=True)
    assert proc.returncode == 2
