"""Command-line interface: configs, reports, exit codes."""

import json
from pathlib import Path

import jsonschema
import pytest

from bcgeo.cli import main
from bcgeo.scenarios import (
    SCENARIO_KINDS,
    ConfigError,
    build_config,
    default_config,
    load_config,
    run_scenario,
)

PKG_ROOT = Path(__file__).resolve().parents[1]
SCHEMA = json.loads(
    (PKG_ROOT / "src" / "bcgeo" / "schemas" / "report.schema.json").read_text()
)


def _run(args, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main(list(args) + ["--report", str(out)])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


def test_every_kind_has_a_builtin_default(tmp_path):
    for kind in SCENARIO_KINDS:
        code, report = _run([kind, "--points", "2"], tmp_path, f"{kind}.json")
        assert code == 0, (kind, report)
        assert report["passed"]
        jsonschema.validate(report, SCHEMA)


def test_report_written_to_stdout_without_flag(capsys):
    code = main(["mc-residuals", "--points", "1"])
    captured = capsys.readouterr()
    assert code == 0
    report = json.loads(captured.out)
    assert report["scenario"]["kind"] == "mc-residuals"


def test_reports_deterministic_modulo_timing(tmp_path):
    _, a = _run(["theorem11", "--seed", "9"], tmp_path, "a.json")
    _, b = _run(["theorem11", "--seed", "9"], tmp_path, "b.json")
    a.pop("timing_seconds")
    b.pop("timing_seconds")
    assert a == b


def test_seed_changes_sampled_points(tmp_path):
    _, a = _run(["courant-axioms", "--seed", "1", "--points", "2"], tmp_path, "a.json")
    _, b = _run(["courant-axioms", "--seed", "2", "--points", "2"], tmp_path, "b.json")
    assert a["points"] != b["points"]


def test_points_flag_controls_count(tmp_path):
    _, rep = _run(["complex-checks", "--points", "3"], tmp_path)
    assert rep["scenario"]["point_count"] == 3
    assert len(rep["points"]) == 3


def test_run_subcommand_on_checked_in_configs(tmp_path):
    for cfg in sorted((PKG_ROOT / "configs").glob("*.toml")):
        code, report = _run(["run", str(cfg)], tmp_path, cfg.stem + ".json")
        assert code == 0, (cfg.name, report)
        jsonschema.validate(report, SCHEMA)
        assert report["scenario"]["config_path"] == str(cfg)


def test_failing_check_exits_one(tmp_path):
    cfg = tmp_path / "fail.toml"
    cfg.write_text(
        'kind = "mc-residuals"\n'
        'field = "g"\n'
        "[chart]\n"
        "dim = 2\n"
        'volume_exponent = "-0.6*(z1 + zb1)"\n'
        "[fields.g]\n"
        'kind = "bivector"\n'
        'components = [["1", "0"], ["0", "1"]]\n'
        "[points]\n"
        "count = 2\n"
    )
    code, report = _run(["run", str(cfg)], tmp_path)
    assert code == 1
    assert not report["passed"]
    failing = [c for c in report["checks"] if not c["passed"]]
    assert [c["name"] for c in failing] == ["double-divergence"]
    assert failing[0]["max_residual"] == pytest.approx(0.72, rel=1e-9)


def test_missing_config_exits_two(tmp_path, capsys):
    code = main(["run", str(tmp_path / "nope.toml")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_undefined_field_reference_named_in_error(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(
        'kind = "mc-residuals"\n'
        'field = "g2"\n'
        "[chart]\n"
        "dim = 2\n"
        "[fields.g]\n"
        'kind = "bivector"\n'
        'components = [["1", "0"], ["0", "1"]]\n'
    )
    code = main(["run", str(cfg)])
    assert code == 2
    assert "g2" in capsys.readouterr().err


def test_bad_toml_exits_two(tmp_path, capsys):
    cfg = tmp_path / "syntax.toml"
    cfg.write_text('kind = "courant-axioms\n')
    assert main(["run", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_bad_flag_values_exit_two(capsys):
    assert main(["courant-axioms", "--order", "1"]) == 2
    assert main(["courant-axioms", "--tol", "-1"]) == 2
    capsys.readouterr()


def test_config_validation_messages():
    with pytest.raises(ConfigError, match="kind"):
        build_config({"kind": "nope"})
    with pytest.raises(ConfigError, match="bivector"):
        build_config({"kind": "mc-residuals"})
    with pytest.raises(ConfigError, match="dim"):
        build_config({"kind": "courant-axioms", "chart": {"dim": "two"}})
    with pytest.raises(ConfigError, match="order"):
        build_config({"kind": "courant-axioms", "order": 1})


def test_explicit_points_round_trip(tmp_path):
    cfg = tmp_path / "explicit.toml"
    cfg.write_text(
        'kind = "kahler-identity"\n'
        'field = "g"\n'
        "[chart]\n"
        "dim = 1\n"
        "[fields.g]\n"
        'kind = "bivector"\n'
        'components = [["(1 + z1*zb1)^2"]]\n'
        "[points]\n"
        "explicit = [[[0.25, 0.1], [0.25, -0.1]]]\n"
    )
    code, report = _run(["run", str(cfg)], tmp_path)
    assert code == 0
    assert report["points"] == [[[0.25, 0.1], [0.25, -0.1]]]


def test_conventions_are_recorded(tmp_path):
    _, rep = _run(["einstein-residuals", "--points", "1"], tmp_path)
    conv = rep["conventions"]
    assert conv["two_form_shift_factor"] == 2
    assert "pairing" in conv and "dilaton" in conv


def test_default_config_roundtrips_through_runner():
    cfg = default_config("complex-checks")
    cfg.count = 1
    report = run_scenario(cfg)
    assert report["scenario"]["kind"] == "complex-checks"
    assert report["passed"]


def test_load_config_matches_build_config(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('kind = "courant-axioms"\nseed = 4\n')
    cfg = load_config(path)
    assert cfg.kind == "courant-axioms"
    assert cfg.seed == 4
    assert cfg.source == str(path)
