import json

import numpy as np
import pytest

from chillwave import mean_value, read_snapshot
from chillwave.cli import build_parser, main


def write_json(path, obj):
    path.write_text(json.dumps(obj))


RUN_CFG = dict(M=8, eps=0.25, gamma=1.0, tau=0.1, T=0.5, scheme="SL_CN",
               A=0.25, B=8.0, seed=6)


def test_parser_subcommands():
    parser = build_parser()
    args = parser.parse_args(["run", "--config", "x.json", "--out-dir", "d"])
    assert args.config == "x.json" and args.out_dir == "d"
    with pytest.raises(SystemExit):
        parser.parse_args(["frobnicate"])


def test_run_outputs(tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, dict(RUN_CFG, snapshot_every=2))
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--out-dir", str(out)]) == 0
    assert (out / "trace.csv").exists()
    assert (out / "final_field.csv").exists()
    assert sorted(p.name for p in out.glob("snapshot_*.csv")) == [
        "snapshot_000002.csv",
        "snapshot_000004.csv",
        "snapshot_000005.csv",
    ]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["steps_completed"] == 5
    assert summary["blew_up"] is False
    assert summary["max_residual"] <= 1e-10
    assert summary["mean_drift"] <= 1e-11
    assert summary["config"]["M"] == 8
    assert "completed" in capsys.readouterr().out


def test_run_final_field_matches_last_snapshot(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, dict(RUN_CFG, snapshot_every=1))
    out = tmp_path / "out"
    main(["run", "--config", str(cfg_path), "--out-dir", str(out)])
    u_final, meta_final = read_snapshot(out / "final_field.csv")
    u_last, meta_last = read_snapshot(out / "snapshot_000005.csv")
    np.testing.assert_array_equal(u_final.coeffs, u_last.coeffs)
    assert meta_final == meta_last


def test_run_deterministic_outputs(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, RUN_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    main(["run", "--config", str(cfg_path), "--out-dir", str(out1)])
    main(["run", "--config", str(cfg_path), "--out-dir", str(out2)])
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
    assert (out1 / "final_field.csv").read_bytes() == (out2 / "final_field.csv").read_bytes()


def test_run_rejects_unknown_key(tmp_path):
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, dict(RUN_CFG, epsilon=0.1))
    with pytest.raises(ValueError):
        main(["run", "--config", str(cfg_path)])


def test_sweep_command(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CHILLWAVE_THREADS", "2")
    cfg_path = tmp_path / "sweep.json"
    write_json(cfg_path, {
        "base": dict(M=8, eps=0.25, gamma=1.0, tau=4e-5, T=64 * 4e-5,
                     scheme="SL_BDF2", seed=9),
        "target": "A",
        "gamma_list": [1.0],
        "tau_list": [4e-5],
        "steps": 64,
    })
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg_path), "--out-dir", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "tau,gamma=1"
    assert lines[1] == "4e-05,0"
    assert "1 cells" in capsys.readouterr().out


def test_converge_command(tmp_path, capsys):
    cfg_path = tmp_path / "conv.json"
    write_json(cfg_path, dict(
        M=8, eps=0.25, gamma=1e-3, tau=0.01, T=0.02, scheme="SL_BDF2",
        A=0.25, B=8.0, seed=11, tau_list=[0.01, 0.005], tau_ref=1.25e-3,
    ))
    out = tmp_path / "out"
    assert main(["converge", "--config", str(cfg_path), "--out-dir", str(out)]) == 0
    lines = (out / "convergence.csv").read_text().strip().splitlines()
    assert lines[0].startswith("tau,")
    assert len(lines) == 3
    assert "convergence table" in capsys.readouterr().out


def test_prepare_initial_command(tmp_path, capsys):
    out = tmp_path / "init"
    rc = main(["prepare-initial", "--M", "8", "--eps", "0.25",
               "--seed", "7", "--out", str(out)])
    assert rc == 0
    phi0, meta0 = read_snapshot(out / "phi0.csv")
    phi1, meta1 = read_snapshot(out / "phi1.csv")
    assert meta0["t"] == 0.0 and meta0["step"] == 0
    assert meta1["t"] == pytest.approx(64 * 0.25**3)
    assert meta1["step"] == 64
    assert mean_value(phi0) == pytest.approx(mean_value(phi1), abs=1e-11)
    assert "phi0.csv" in capsys.readouterr().out
