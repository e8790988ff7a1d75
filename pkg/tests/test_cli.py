import json
import math

import pytest

from conformal_lab.cli import RunConfig, list_catalog, main, run
from conformal_lab.errors import ConfigError


BASE_CONFIG = {
    "seed": 0,
    "suites": ["total-q", "spectrum"],
    "catalog": [
        {"kind": "sphere", "n": 4, "params": {"radius": 1.0},
         "basis": {"degree_max": 16}},
        {"kind": "product-S1xS3", "params": {},
         "basis": {"degree_max": 12, "fourier_max": 6}},
    ],
    "level": 1,
    "trials": 3,
}


def _write(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


# ------------------------------------------------------------- validation

def test_empty_suites_rejected():
    cfg = dict(BASE_CONFIG, suites=[])
    with pytest.raises(ConfigError, match="suites"):
        RunConfig(cfg)


def test_unknown_suite_rejected():
    cfg = dict(BASE_CONFIG, suites=["nonsense"])
    with pytest.raises(ConfigError, match="suites"):
        RunConfig(cfg)


def test_missing_catalog_rejected():
    cfg = {k: v for k, v in BASE_CONFIG.items() if k != "catalog"}
    with pytest.raises(ConfigError, match="catalog"):
        RunConfig(cfg)


def test_unknown_field_rejected():
    cfg = dict(BASE_CONFIG, bogus=1)
    with pytest.raises(ConfigError, match="bogus"):
        RunConfig(cfg)


def test_bad_tolerance_key_rejected():
    cfg = dict(BASE_CONFIG, tolerances={"nope": 1e-3})
    with pytest.raises(ConfigError, match="nope"):
        RunConfig(cfg)


def test_incompatible_suite_rejected(tmp_path):
    cfg = dict(BASE_CONFIG, suites=["mass"])  # no n in 5..7 backend present
    with pytest.raises(ConfigError, match="mass"):
        run(RunConfig(cfg), tmp_path)


# -------------------------------------------------------------------- runs

def test_run_writes_reports_and_summary(tmp_path):
    code = run(RunConfig(BASE_CONFIG), tmp_path / "out")
    assert code == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["all_passed"] is True
    suites = {(row["suite"], row["backend"]) for row in summary["results"]}
    assert len(suites) == 4  # both suites fit both n = 4 backends
    files = list((tmp_path / "out").glob("*.json"))
    assert len(files) == 5  # four reports plus the summary
    report = json.loads(next(
        p for p in files if p.name.startswith("total-q__sphere")).read_text())
    assert report["suite"] == "total-q"
    assert "runtime_s" in report


def test_run_byte_identical_summaries(tmp_path):
    run(RunConfig(BASE_CONFIG), tmp_path / "a")
    run(RunConfig(BASE_CONFIG), tmp_path / "b")
    assert (tmp_path / "a" / "summary.json").read_bytes() == \
        (tmp_path / "b" / "summary.json").read_bytes()


def test_main_run_and_exit_codes(tmp_path, capsys):
    path = _write(tmp_path, BASE_CONFIG)
    assert main(["run", "--config", str(path), "--out",
                 str(tmp_path / "out"), "--verbose"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out


def test_main_config_error_exit_code(tmp_path, capsys):
    path = _write(tmp_path, dict(BASE_CONFIG, suites=[]))
    assert main(["run", "--config", str(path)]) == 2
    assert "CONFIG_INVALID" in capsys.readouterr().err


def test_main_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2


def test_exit_one_on_assertion_failure(tmp_path, monkeypatch):
    from conformal_lab import cli as cli_mod
    from conformal_lab.verify import CheckRecord, VerificationReport

    def failing_suite(m, cfg):
        return VerificationReport(
            "spectrum", m.descriptor(),
            [CheckRecord("stub", 1.0, 0.5, False, True)], {}, {})

    monkeypatch.setitem(cli_mod.SUITES, "spectrum", failing_suite)
    cfg = dict(BASE_CONFIG, suites=["spectrum"])
    assert run(RunConfig(cfg), tmp_path) == 1


def test_exploratory_failures_do_not_break_exit(tmp_path, monkeypatch):
    from conformal_lab import cli as cli_mod
    from conformal_lab.verify import CheckRecord, VerificationReport

    def exploratory_suite(m, cfg):
        return VerificationReport(
            "spectrum", m.descriptor(),
            [CheckRecord("stub", 1.0, 0.5, True, False)], {}, {})

    monkeypatch.setitem(cli_mod.SUITES, "spectrum", exploratory_suite)
    cfg = dict(BASE_CONFIG, suites=["spectrum"])
    assert run(RunConfig(cfg), tmp_path) == 0


def test_backend_build_failure_exit_code(tmp_path, capsys):
    cfg = dict(BASE_CONFIG, catalog=[{"kind": "sphere", "n": 2,
                                      "params": {}, "basis": {}}])
    path = _write(tmp_path, cfg)
    assert main(["run", "--config", str(path)]) == 3
    assert "BACKEND_BUILD_FAIL" in capsys.readouterr().err


def test_thread_cap_does_not_change_results(tmp_path, monkeypatch):
    monkeypatch.setenv("CONFORMAL_LAB_THREADS", "1")
    run(RunConfig(BASE_CONFIG), tmp_path / "one")
    monkeypatch.setenv("CONFORMAL_LAB_THREADS", "3")
    run(RunConfig(BASE_CONFIG), tmp_path / "three")
    assert (tmp_path / "one" / "summary.json").read_bytes() == \
        (tmp_path / "three" / "summary.json").read_bytes()


# ----------------------------------------------------------------- catalog

def test_catalog_listing(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "sphere" in out and "product-S1xS2" in out
    rows = {tuple(line.split()[:2]) for line in out.splitlines()[1:]}
    assert ("sphere", "4") in rows
    assert ("sphere", "3") in rows


def test_catalog_constants():
    text = list_catalog()
    line4 = next(l for l in text.splitlines()
                 if l.startswith("sphere") and " 4 " in f" {l.split()[1]} ")
    assert "6" in line4.split()[-2]
    line_s1xs2 = next(l for l in text.splitlines()
                      if l.startswith("product-S1xS2"))
    assert math.isclose(float(line_s1xs2.split()[-2]), -1.125)
    line3 = next(l for l in text.splitlines()
                 if l.startswith("sphere") and l.split()[1] == "3")
    assert math.isclose(float(line3.split()[-2]), 1.875)
