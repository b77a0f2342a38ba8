import csv

import numpy as np
import pytest

from hypflow.cli import ConfigError, build_flow_config, main, parse_config
from hypflow.flow import CSV_COLUMNS
from hypflow.geometry import read_snapshot


def test_parse_config_basics():
    run, lines = parse_config("# comment\nsigma = 0.5  # inline\n\nnode_count=41\nepsilon = none\n")
    assert run.sigma == 0.5 and run.node_count == 41 and run.epsilon is None
    assert lines == {"sigma": 2, "node_count": 4, "epsilon": 5}


@pytest.mark.parametrize(
    "text,line,key",
    [
        ("sigma = 0.5\nbogus = 1\n", 2, "bogus"),
        ("sigma = abc\n", 1, "sigma"),
        ("sigma = 0.5\nsigma = 0.4\n", 2, "sigma"),
        ("sigma 0.5\n", 1, None),
        ("node_count = 41\n", None, "sigma"),
        ("sigma =\n", 1, "sigma"),
    ],
)
def test_parse_config_diagnostics(text, line, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == line and err.value.key == key


def test_semantic_errors_point_at_the_field():
    run, lines = parse_config("node_count = 41\n\nsigma = 1.5\n")
    with pytest.raises(ConfigError) as err:
        build_flow_config(run, lines)
    assert err.value.key == "sigma" and err.value.line == 3
    run, lines = parse_config("sigma = 0.5\nsigma_prime = 0.7\n")
    with pytest.raises(ConfigError) as err:
        build_flow_config(run, lines)
    assert err.value.key == "sigma_prime"
    run, lines = parse_config("sigma = 0.5\nkind = wedge\n")
    with pytest.raises(ConfigError):
        build_flow_config(run, lines)


def test_sigma0_command(capsys):
    assert main(["sigma0"]) == 0
    first = capsys.readouterr().out
    assert "root = 0.145964275862" in first
    assert main(["sigma0"]) == 0
    assert capsys.readouterr().out == first
    assert main(["sigma0", "--tol", "1e-4"]) == 0
    assert main(["sigma0", "--tol", "1e-30"]) == 2


def _write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_flow_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["flow", "--config", _write(tmp_path, "sigma = 0\n"), "--out", out, "--quiet"]) == 2
    assert main(["flow", "--config", str(tmp_path / "missing.cfg"), "--out", out, "--quiet"]) == 2
    horo = _write(tmp_path, "sigma = 0.5\nkind = horosphere\nnode_count = 21\n")
    assert main(["flow", "--config", horo, "--out", out, "--quiet"]) == 3
    short = _write(tmp_path, "sigma = 0.5\nnode_count = 21\nt_end = 0.01\n")
    assert main(["flow", "--config", short, "--out", out, "--quiet"]) == 4
    with pytest.raises(SystemExit) as err:
        main(["verify", "--suite", "unknown"])
    assert err.value.code == 2


def test_flow_outputs(tmp_path):
    out = tmp_path / "run"
    cfg = _write(tmp_path, "sigma = 0.5\nsigma_prime = 0.4\nnode_count = 31\nstat_tol = 1e-5\n")
    code = main(["flow", "--config", cfg, "--out", str(out), "--snapshot-stride", "500", "--quiet"])
    assert code == 0
    manifest = dict(line.split("=", 1) for line in (out / "manifest.txt").read_text().splitlines())
    assert manifest["sigma"] == "0.5" and manifest["epsilon"] == "0.01" and manifest["node_count"] == "31"
    assert "artifact_version" in manifest and "start_time" in manifest
    with open(out / "steps.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    t = np.array([float(r[0]) for r in rows[1:]])
    assert np.all(np.diff(t) > 0)
    snaps = sorted((out / "snapshots").iterdir())
    assert snaps[0].name == "0000.txt"
    head0, data0 = read_snapshot(snaps[0])
    head1, data1 = read_snapshot(snaps[-1])
    assert head0["t"] == 0.0 and head1["t"] == pytest.approx(t[-1])
    assert np.all(data1[:, 1] <= data0[:, 1])
    summary = (out / "summary.txt").read_text()
    assert "converged=1" in summary and "PASS     F<=sigma" in summary


def test_flow_is_reproducible(tmp_path):
    cfg = _write(tmp_path, "sigma = 0.5\nnode_count = 21\nt_end = 0.2\n")
    main(["flow", "--config", cfg, "--out", str(tmp_path / "a"), "--quiet"])
    main(["flow", "--config", cfg, "--out", str(tmp_path / "b"), "--quiet"])
    assert (tmp_path / "a" / "steps.csv").read_bytes() == (tmp_path / "b" / "steps.csv").read_bytes()


def test_verify_crosscheck(capsys):
    assert main(["verify", "--suite", "crosscheck"]) == 0
    out = capsys.readouterr().out
    assert "suite crosscheck: PASS" in out
