import json

import jsonschema
import pytest

from tetrapurify.cli import main
from tetrapurify.pipeline import data_path

FIG3 = str(data_path("fig3_schedule.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _schema(name):
    return json.loads(data_path(name).read_text())


def test_eval_table(capsys):
    code, out, _ = run(capsys, "eval", FIG3, "--backend", "extended")
    assert code == 0
    rows = [l for l in out.splitlines() if l[:2].strip().isdigit()]
    assert len(rows) == 10
    assert "3.0e-3" in rows[6] and "1.6e-2" in rows[6]


def test_eval_json_validates(capsys):
    code, out, _ = run(capsys, "eval", FIG3, "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), _schema("report.schema.json"))


def test_committed_schedule_validates():
    jsonschema.validate(json.loads(data_path("fig3_schedule.json").read_text()),
                        _schema("schedule.schema.json"))


def test_eval_zero_noise(tmp_path, capsys):
    p = tmp_path / "zero.json"
    p.write_text(json.dumps({"input": {"odds": [1, 0, 0, 0]},
                             "stages": [{"type": "distill", "basis": "X"},
                                        {"type": "boost", "pattern": ["Y"], "reps": 3}]}))
    code, out, _ = run(capsys, "eval", str(p), "--format", "json")
    assert code == 0
    assert json.loads(out)["final_infidelity"] == "0"


def test_schema_violation_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"input": {"infidelity": "1/3"},
                             "stages": [{"type": "distill", "basis": "W"}]}))
    code, _, err = run(capsys, "eval", str(p))
    assert code == 2
    assert "stages/0" in err


def test_invalid_json_reports_line(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{\n  "input": {\n}')
    code, _, err = run(capsys, "eval", str(p))
    assert code == 2
    assert "broken.json:3:" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "eval", "/nonexistent/schedule.json")
    assert code == 2


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_search(capsys):
    code, out, _ = run(capsys, "search-bootstrap", "--infidelity", "1/3", "--threshold", "1e-3",
                       "--max-depth", "8", "--format", "json")
    assert code == 0
    js = json.loads(out)
    assert len(js["sequence"]) == 6
    jsonschema.validate(js["report"], _schema("report.schema.json"))


def test_search_not_found(capsys):
    code, out, _ = run(capsys, "search-bootstrap", "--max-depth", "4")
    assert code == 1
    assert "no sequence" in out


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--cases", "60", "--seed", "7")
    assert code == 0
    again = run(capsys, "verify", "--cases", "60", "--seed", "7")[1]
    assert out == again


def test_verify_detects_perturbation(monkeypatch, capsys):
    from tetrapurify import distill

    real = distill.oplus

    def broken(u, v, b):
        out = real(u, v, b)
        return type(out)(out.w, out.x * 2, out.y, out.z)

    monkeypatch.setattr(distill, "oplus", broken)
    code, out, _ = run(capsys, "verify", "--cases", "20")
    assert code == 1
    assert "oplus component(s) x" in out


def test_simulate(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"input": {"infidelity": "1/3"},
                             "stages": [{"type": "distill", "basis": b} for b in "XYXYZX"]}))
    code, out, _ = run(capsys, "simulate", "--schedule", str(p), "--budget", "200000",
                       "--seed", "4", "--format", "json")
    assert code == 0
    js = json.loads(out)
    assert js["raw_pairs_consumed"] == 200000
    code2, out2, _ = run(capsys, "simulate", "--schedule", str(p), "--budget", "200000",
                         "--seed", "4", "--format", "json")
    assert out2 == out


def test_simulate_rejects_bound(capsys):
    code, _, err = run(capsys, "simulate", "--schedule", FIG3, "--budget", "10")
    assert code == 2


def test_repro(capsys):
    code, out, _ = run(capsys, "repro-paper")
    assert code == 0
    lines = [l for l in out.splitlines() if l[:2].strip().isdigit()]
    assert len(lines) == 10
    assert all(l.rstrip().endswith("yes") for l in lines[:8])


def test_repro_single_stage(capsys):
    code, out, _ = run(capsys, "repro-paper", "--stage", "1")
    rows = [l for l in out.splitlines() if l[:2].strip().isdigit()]
    assert code == 0 and len(rows) == 1


def test_repro_json(capsys):
    code, out, _ = run(capsys, "repro-paper", "--format", "json")
    js = json.loads(out)
    assert js["match"] and len(js["rows"]) == 8 and len(js["tail"]) == 2
