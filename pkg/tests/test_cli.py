import json

import pytest

from fslab.cli import ConfigError, dumps_report, eval_scale, main, parse_scales, resolve_workers

MASSOPUST = {"construction": "massopust", "N": 3, "s": 0.75, "data": [{"r": 1, "c": 1, "value": 1.0}]}
GH = {"construction": "geronimo-hardin", "s": 0.82, "a": 1.0}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, *argv, out="out"):
    code = main([*argv, "--out", str(tmp_path / out)])
    report = tmp_path / out / "report.json"
    return code, (json.loads(report.read_text()) if report.exists() else None)


def test_surface_depth_zero(tmp_path):
    code, rep = run(tmp_path, "surface", "--config", write_config(tmp_path, MASSOPUST), "--depth", "0")
    assert code == 0 and rep["faces"] == 1
    assert (tmp_path / "out" / "surface.obj").exists()
    assert (tmp_path / "out" / "report.meta.json").exists()


def test_surface_depth_from_options(tmp_path):
    cfg = dict(GH, options={"depth": 2, "pgm_size": 16})
    code, rep = run(tmp_path, "surface", "--config", write_config(tmp_path, cfg))
    assert code == 0 and rep["faces"] == 16 and rep["depth"] == 2


def test_dimension_report(tmp_path):
    cfg = write_config(tmp_path, MASSOPUST)
    code, rep = run(tmp_path, "dimension", "--config", cfg, "--samples", "20000", "--scales", "3^-2,3^-3,3^-4",
                    "--workers", "1")
    assert code == 0
    assert abs(rep["solver_minus_formula"]) < 1e-10
    assert [r["delta"] for r in rep["occupancy"]] == pytest.approx([1 / 9, 1 / 27, 1 / 81])
    assert (tmp_path / "out" / "occupancy.csv").read_text().startswith("delta,count")


def test_certify_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, GH)
    assert run(tmp_path, "certify", "--config", cfg, out="a")[0] == 0
    assert run(tmp_path, "certify", "--config", cfg, out="b")[0] == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    assert json.loads(a)["verdict"] == "Certified"


def test_certify_non_certified_verdicts_exit_zero(tmp_path):
    low = write_config(tmp_path, dict(GH, s=0.7), "low.json")
    code, rep = run(tmp_path, "certify", "--config", low, out="low")
    assert code == 0 and rep["verdict"] == "Hypotheses-unmet"
    bad = dict(MASSOPUST, s=[0.75] * 8 + [0.7])
    code, rep = run(tmp_path, "certify", "--config", write_config(tmp_path, bad, "bad.json"), out="bad")
    assert code == 0 and rep["verdict"] == "Hypotheses-unmet"


def test_markov(tmp_path):
    code, rep = run(tmp_path, "markov", "--n-max", "5")
    assert code == 0
    assert rep["group_order"] == 12 and rep["period"] == 2
    assert rep["brute_force_agreement"] == "ok" and rep["return_counts"][0] == 4
    assert rep["R"][0] == ["1/4", "1/8", "1/8", "3/16", "3/16", "1/8"]
    lines = (tmp_path / "out" / "return_counts.csv").read_text().splitlines()
    assert lines[0] == "n,N_n,bound_16n_over_12,holds" and len(lines) == 6


def test_esc(tmp_path, capsys):
    cfg = dict(MASSOPUST, s=[0.7, 0.72, 0.74, 0.76, 0.78, 0.8, 0.82, 0.84, 0.86])
    code, rep = run(tmp_path, "esc", "--config", write_config(tmp_path, cfg), "--depth", "2")
    assert code == 0 and rep["exhaustive"] and rep["violations"] == []
    assert rep["classes"]["I0"] == [1, 2, 3, 6, 9]
    assert json.loads(capsys.readouterr().out)["violation_count"] == 0


def test_esc_word_length_option(tmp_path):
    cfg = dict(MASSOPUST, options={"word_length": 1})
    code, rep = run(tmp_path, "esc", "--config", write_config(tmp_path, cfg))
    assert code == 0 and rep["depth"] == 1


def test_schema_violation_exits_two(tmp_path, capsys):
    cfg = write_config(tmp_path, {"construction": "massopust", "s": 0.75})
    code, _ = run(tmp_path, "certify", "--config", cfg)
    assert code == 2
    assert "fslab:" in capsys.readouterr().err


def test_invalid_json_exits_two(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run(tmp_path, "certify", "--config", str(path))[0] == 2


def test_missing_config_exits_two(tmp_path):
    assert run(tmp_path, "surface")[0] == 2


def test_unwritable_output_exits_three(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = main(["surface", "--config", write_config(tmp_path, MASSOPUST), "--depth", "0", "--out", str(blocker / "sub")])
    assert code == 3


def test_missing_config_file_exits_three(tmp_path):
    assert run(tmp_path, "certify", "--config", str(tmp_path / "nope.json"))[0] == 3


def test_workers_resolution(monkeypatch):
    assert resolve_workers(3) == 3
    monkeypatch.setenv("FSL_WORKERS", "2")
    assert resolve_workers(None) == 2
    monkeypatch.setenv("FSL_WORKERS", "many")
    with pytest.raises(ConfigError):
        resolve_workers(None)


def test_scale_parsing():
    assert eval_scale("3^-2") == pytest.approx(1 / 9)
    assert eval_scale("0.25") == 0.25
    assert parse_scales("2^-1, 2^-2") == pytest.approx([0.5, 0.25])
    assert parse_scales(None) is None


def test_report_floats_round_trip():
    report = {"b": 0.1, "a": [1, 2.5, 2 / 3]}
    text = dumps_report(report)
    assert text == dumps_report(dict(report))
    assert json.loads(text) == report
