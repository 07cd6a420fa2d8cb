import json

import numpy as np
import pytest

from lomac.cli import EXIT_ABORT, EXIT_CONFIG, EXIT_OK, main
from lomac.io import read_diagnostics, read_snapshot


def write_cfg(tmp_path, **kw):
    cfg = dict(benchmark="weak_landau_1d", nx=8, nv=16, k=1, t_end=0.2)
    cfg.update(kw)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def test_run_writes_diagnostics_and_snapshots(tmp_path, capsys):
    p = write_cfg(tmp_path, snapshot_times=[0.1])
    assert main(["run", "--config", str(p), "--output", str(tmp_path / "out")]) == EXIT_OK
    d = read_diagnostics(tmp_path / "out" / "weak_landau_1d_diagnostics.csv")
    assert d["t"][-1] == pytest.approx(0.2) and np.all(d["mass_rel_dev"] < 1e-12)
    s = read_snapshot(tmp_path / "out" / "weak_landau_1d_t0.1.npz")
    assert s.t == pytest.approx(0.1) and s.mode == "vp1d1v"
    assert "weak_landau_1d" in capsys.readouterr().out


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", "--config", str(write_cfg(tmp_path, nx=-3))]) == EXIT_CONFIG
    assert "nx" in capsys.readouterr().err
    assert main(["run", "--config", str(write_cfg(tmp_path)), "--override", "bogus=1"]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["advect", "--override", "benchmark=weak_landau_1d"]) == EXIT_CONFIG


def test_rank_cap_exit_3(tmp_path, capsys):
    p = write_cfg(tmp_path, benchmark="strong_landau_1d", eps=0.0, rank_cap=3)
    assert main(["run", "--config", str(p), "--output", str(tmp_path)]) == EXIT_ABORT
    assert "rank" in capsys.readouterr().err


def test_thread_env_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("LOMAC_THREADS", "zero")
    assert main(["run", "--config", str(write_cfg(tmp_path))]) == EXIT_CONFIG
    monkeypatch.setenv("LOMAC_THREADS", "1")
    assert main(["run", "--config", str(write_cfg(tmp_path)), "--output", str(tmp_path)]) == EXIT_OK


def test_convergence_table_output(tmp_path, capsys):
    p = write_cfg(tmp_path, benchmark="forced_vp", k=2, t_end=0.1)
    assert main(["convergence", "--config", str(p), "--levels", "2", "--output", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "forced_vp_k2_convergence.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[1].startswith("8x16")
    assert "order" in capsys.readouterr().out
    p = write_cfg(tmp_path)
    assert main(["convergence", "--config", str(p), "--levels", "2"]) == EXIT_CONFIG


def test_advect_with_postprocess(tmp_path, capsys):
    assert main(["advect", "--postprocess", "--override", "t_end=0.5", "--output", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "16x16" in out and "after SIAC filtering" in out
    assert read_snapshot(tmp_path / "linear_advection_2d_t0.5.npz").mode == "advect2d"


def test_verify(capsys):
    assert main(["verify", "--steps", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 4
