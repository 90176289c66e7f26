import json

import numpy as np
import pytest

from stochorder.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_STALE, main


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["simulate", "--out", str(out)]) == EXIT_OK
    return out


def test_simulate_default(simulated):
    lines = (simulated / "dataset.csv").read_text().splitlines()
    assert len(lines) == 730
    meta = json.loads((simulated / "dataset.csv.meta.json").read_text())
    assert meta["num_combos"] == 81 and len(meta["config_hash"]) == 64


def test_simulate_subset(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--scenarios", "green"]) == EXIT_OK
    assert len((tmp_path / "dataset.csv").read_text().splitlines()) == 244
    assert main(["simulate", "--out", str(tmp_path), "--designs", "D1,D3",
                 "--scenarios", "MARKET"]) == EXIT_OK
    assert len((tmp_path / "dataset.csv").read_text().splitlines()) == 163


def test_simulate_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[technology]\nchp_efficiency = 0.5\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "technology.chp_efficiency" in err and "line 2" in err


def test_simulate_bad_selection(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--scenarios", "BROWN"]) == EXIT_CONFIG
    assert main(["simulate", "--out", str(tmp_path), "--designs", "D9"]) == EXIT_CONFIG


def test_analyze(simulated, tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main(["analyze", "--dataset", str(simulated / "dataset.csv"), "--out", str(out),
               "--alpha", "0.05", "--comparisons", "3"])
    assert rc == EXIT_OK
    doc = json.loads((out / "report.json").read_text())
    assert doc["significance"]["adjusted_level_display"] == "0.0167"
    assert len(doc["tables"]) == 6
    assert len(list((out / "curves").glob("*.csv"))) == len(doc["curves"]) == 54
    assert "adjusted significance level 0.0167" in capsys.readouterr().out


def test_analyze_flags_reach_report(simulated, tmp_path):
    out = tmp_path / "rep"
    rc = main(["analyze", "--dataset", str(simulated / "dataset.csv"), "--out", str(out),
               "--metric", "l2", "--bootstrap", "200", "--seed", "5", "--alpha", "0.1",
               "--comparisons", "2"])
    assert rc == EXIT_OK
    doc = json.loads((out / "report.json").read_text())
    assert doc["dispersion"] == {"metric": "L2", "k": None, "num_resamples": 200, "seed": 5,
                                 "normalize": True, "common_random_numbers": True}
    assert doc["significance"]["adjusted_level"] == pytest.approx(0.05)


def test_analyze_stale(simulated, tmp_path, capsys):
    rc = main(["analyze", "--dataset", str(simulated / "dataset.csv"), "--out", str(tmp_path),
               "--set", "levels.discount_rate.MED=0.04"])
    assert rc == EXIT_STALE
    assert "stale" in capsys.readouterr().err


def test_analyze_missing_metadata(simulated, tmp_path):
    copy = tmp_path / "dataset.csv"
    copy.write_text((simulated / "dataset.csv").read_text())
    assert main(["analyze", "--dataset", str(copy), "--out", str(tmp_path)]) == EXIT_STALE


def test_analyze_missing_dataset(tmp_path):
    assert main(["analyze", "--out", str(tmp_path / "nothing")]) == EXIT_IO


def test_analyze_bad_flag_value(simulated, tmp_path):
    rc = main(["analyze", "--dataset", str(simulated / "dataset.csv"), "--out", str(tmp_path),
               "--bootstrap", "10"])
    assert rc == EXIT_CONFIG


def _write(path, rows, header=None):
    lines = ([header] if header else []) + [",".join(str(v) for v in np.atleast_1d(r)) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_compare_identical(tmp_path, capsys):
    a = _write(tmp_path / "a.csv", [1, 2, 3], header="npc")
    assert main(["compare", a, a]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict EQUAL" in out and "\nD 0\n" in out


def test_compare_shifted(tmp_path, capsys):
    a = _write(tmp_path / "a.csv", [3, 4, 5])
    b = _write(tmp_path / "b.csv", [1, 2, 3])
    assert main(["compare", a, b]) == EXIT_OK
    out = capsys.readouterr().out
    assert "verdict LEFT_DOMINATES" in out
    assert "D 0.666667" in out and "D- 0.666667" in out


def test_compare_dispersion(tmp_path, capsys):
    rng = np.random.default_rng(4)
    a = _write(tmp_path / "a.csv", rng.normal(size=(30, 2)) * 4)
    b = _write(tmp_path / "b.csv", rng.normal(size=(30, 2)))
    assert main(["compare", a, b, "--dispersion", "simplex", "--k", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "statistic SIMPLEX(2)" in out and "verdict LEFT_DOMINATES" in out


def test_compare_errors(tmp_path):
    a = _write(tmp_path / "a.csv", [1, 2])
    assert main(["compare", a, str(tmp_path / "missing.csv")]) == EXIT_IO
    bad = tmp_path / "bad.csv"
    bad.write_text("x\n1\nabc\n")
    assert main(["compare", a, str(bad)]) == EXIT_IO
    two = _write(tmp_path / "two.csv", [[1, 2], [3, 4]])
    assert main(["compare", two, two]) == EXIT_CONFIG
