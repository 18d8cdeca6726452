import csv
import io
import json

import pytest

from ceqts.cli import main
from ceqts.errors import BadParameters
from ceqts.reports import DEMOS, SCHEMA, ReportDocument, demo_spec, load_config


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def without_clock(text):
    doc = json.loads(text)
    doc.pop("wall_clock", None)
    return doc


def test_derive_examples(capsys):
    code, out = run(capsys, "derive", "universal-staircase", "-k", "3", "-n", "5")
    assert code == 0
    assert "q = 7" in out.out and "m = 6" in out.out
    rows = [line.split() for line in out.out.splitlines() if line.split()[:1] in (["3"], ["4"], ["5"])]
    assert [(r[0], r[2]) for r in rows] == [("3", "18"), ("4", "12"), ("5", "10")]
    code, out = run(capsys, "derive", "concat-fixed", "-k", "3", "-n", "5", "-d", "5")
    assert code == 0 and "q = 11" in out.out
    code, out = run(capsys, "derive", "qts", "-k", "2", "-n", "3")
    assert code == 0 and "q = 3" in out.out and "m = 1" in out.out
    assert "reference parameters: match" in out.out


def test_derive_rejects_cloning(capsys):
    code, out = run(capsys, "derive", "qts", "-k", "2", "-n", "4")
    assert code == 2 and "NoCloningViolation" in out.err


def test_roundtrip_full_access(capsys):
    code, out = run(capsys, "roundtrip", "--demo", "3-5-fixed", "--D", "1,2,3,4,5", "--format", "json")
    payload = json.loads(out.out)["payload"]
    assert code == 0
    assert payload["cost"] == 5 and payload["fidelity"] == pytest.approx(1.0, abs=1e-9)


def test_roundtrip_explain_lists_the_schedule(capsys):
    code, out = run(capsys, "roundtrip", "--demo", "3-5-basic", "--D", "1,2,3", "--explain", "--format", "text")
    assert code == 0
    assert [line.split()[0] for line in out.out.splitlines() if line.startswith("K")] == ["K1", "K2", "K3", "K4", "K5", "K6"]


@pytest.mark.parametrize("secret", ["random", "entangled"])
def test_roundtrip_secret_sources(capsys, secret):
    code, out = run(capsys, "roundtrip", "--demo", "2-3-cleve", "--secret", secret, "--format", "json")
    assert code == 0 and json.loads(out.out)["verdict"] == "pass"


def test_roundtrip_below_threshold(capsys):
    code, out = run(capsys, "roundtrip", "--demo", "3-5-fixed", "--D", "1,2")
    assert code == 2 and "AccessStructureViolation" in out.err


def test_roundtrip_engine_error_is_structured(capsys):
    code, out = run(capsys, "roundtrip", "--demo", "3-5-universal", "--D", "2,3,4,5", "--format", "json")
    doc = json.loads(out.out)
    assert code == 1 and doc["verdict"] == "error"
    assert doc["payload"]["error"]["type"] == "ScheduleError"
    assert doc["payload"]["rank_audit"]["determined"] == 4


def test_verify_exit_codes(capsys):
    code, out = run(capsys, "verify", "--demo", "2-3-cleve", "--format", "text")
    assert code == 0 and "verdict: PASS" in out.out
    code, out = run(capsys, "verify", "--demo", "3-5-universal", "--mutate", "zero-y:3,2", "--format", "text")
    assert code == 1 and "recoverability" in out.out and "FAIL" in out.out
    code, out = run(capsys, "verify", "--demo", "2-3-cleve", "--mutate", "swap-d")
    assert code == 2


def test_verify_json_is_deterministic(capsys):
    args = ("verify", "--variant", "universal-staircase", "-k", "2", "-n", "3", "--seed", "5", "--format", "json")
    _, first = run(capsys, *args)
    _, second = run(capsys, *args)
    assert without_clock(first.out) == without_clock(second.out)
    doc = ReportDocument.from_json(first.out)
    assert doc.schema == SCHEMA and doc.config["seed"] == 5
    assert ReportDocument.from_json(doc.to_json()).to_dict() == doc.to_dict()


def test_from_json_rejects_foreign_documents():
    with pytest.raises(ValueError):
        ReportDocument.from_json(json.dumps({"schema": "other/9"}))


def test_config_file(tmp_path, capsys):
    path = tmp_path / "run.toml"
    path.write_text('[scheme]\nvariant = "fixed-staircase"\nk = 2\nn = 3\nd = 3\n\n[run]\nseed = 11\nformat = "json"\n')
    code, out = run(capsys, "verify", "--config", str(path))
    doc = json.loads(out.out)
    assert code == 0 and doc["config"]["seed"] == 11 and doc["config"]["scheme"]["variant"] == "StaircaseFixed"
    bad = tmp_path / "bad.toml"
    bad.write_text("[scheme]\ncolour = 3\n")
    with pytest.raises(BadParameters):
        load_config(str(bad))


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, _ = run(capsys, "derive", "--demo", "2-3-cleve", "--format", "json", "-o", str(target))
    assert code == 0 and json.loads(target.read_text())["command"] == "derive"


def test_plot_data_csv(capsys):
    code, out = run(capsys, "plot-data", "--k-max", "3")
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert code == 0
    assert list(rows[0]) == ["variant", "k", "n", "d", "q", "m", "cc_measured", "cc_bound", "verdict"]
    universal = [(int(r["d"]), int(r["cc_measured"])) for r in rows if r["variant"] == "StaircaseUniversal" and r["k"] == "3"]
    assert universal == [(3, 18), (4, 12), (5, 10)]
    assert all(r["verdict"] == "pass" for r in rows)


def test_demo_registry():
    assert set(DEMOS) == {
        "2-3-cleve",
        "3-4-1-ramp",
        "3-5-fixed",
        "3-5-basic",
        "3-5-universal",
        "concat-fixed-2-3-3",
        "concat-universal-2-3",
    }
    assert demo_spec("3-4-1-ramp").m == 2
    with pytest.raises(BadParameters):
        demo_spec("4-7-nothing")
