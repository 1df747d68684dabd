import json

import pytest

from amcost.cli import build_parser, main
from amcost.scenario import CSV_COLUMNS, read_fixture

SCENARIO = "blower.scenario"


def values(text):
    out = {}
    for line in text.splitlines():
        if " = " in line:
            key, val = line.split(" = ", 1)
            out[key.strip()] = val.strip()
    return out


def test_sweep_fixture_to_csv(tmp_path, published):
    out = tmp_path / "blower_sweep.csv"
    assert main(["sweep", "--scenario", SCENARIO, "--mode", "fixture", "--out", str(out)]) == 0
    rows = read_fixture(out)
    published = {(r.mode, r.count): r for r in published}
    assert len(rows) == 33
    for r in rows:
        assert r.C_Total == pytest.approx(published[(r.mode, r.count)].C_Total, abs=0.15)


def test_sweep_is_idempotent(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", "--scenario", SCENARIO, "--out", str(a)])
    main(["sweep", "--scenario", SCENARIO, "--out", str(b), "--jobs", "4"])
    assert a.read_bytes() == b.read_bytes()


def test_lifecycle(capsys):
    assert main(["lifecycle", "--scenario", SCENARIO]) == 0
    out = values(capsys.readouterr().out)
    assert float(out["S_Energy"]) == pytest.approx(287.76, abs=0.02)
    assert float(out["DS_Energy"]) == pytest.approx(1980.62, abs=0.05)
    assert float(out["theta"].rstrip("%")) == pytest.approx(1.69, abs=0.02)


def test_cost_setup_only(capsys):
    assert main(["cost", "--scenario", SCENARIO, "--v", "1.0", "--vbuild", "0", "--tbuild", "0"]) == 0
    assert values(capsys.readouterr().out)["C_Build"] == "72.04"


def test_breakdown(capsys):
    assert main(["breakdown", "--scenario", SCENARIO]) == 0
    out = capsys.readouterr().out
    assert "indirect" in out and "failure_premium" in out


def test_pack_manifest(tmp_path):
    out = tmp_path / "m.json"
    assert main(["pack", "--scenario", SCENARIO, "--mode", "single", "--count", "30", "--out", str(out)]) == 0
    manifest = json.loads(out.read_text())
    assert manifest["totals"]["instances"] == 20
    assert manifest["totals"]["truncated"] is True


def test_compare_outputs(tmp_path):
    text = tmp_path / "cmp.txt"
    csv = tmp_path / "cmp.csv"
    assert main(["compare", "--scenario", SCENARIO, "--out", str(text)]) == 0
    assert main(["compare", "--scenario", SCENARIO, "--format", "csv", "--out", str(csv)]) == 0
    assert "mean_overstatement_pct = 156.9" in text.read_text()
    assert csv.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_output_dir_override(tmp_path, monkeypatch):
    monkeypatch.setenv("AMCOST_OUTPUT_DIR", str(tmp_path))
    assert main(["sweep", "--scenario", SCENARIO, "--out", "rel.csv"]) == 0
    assert (tmp_path / "rel.csv").exists()


def test_errors_exit_nonzero(capsys):
    assert main(["sweep", "--scenario", "no/such/file.scenario"]) == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "not found" in err
    assert main(["sweep", "--scenario", SCENARIO, "--mode", "single", "--section", "mixed"]) == 1
    assert main(["breakdown", "--scenario", SCENARIO, "--v", "0.5"]) == 1


def test_unknown_command_and_help(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    assert set(sub) == {"pack", "sweep", "cost", "compare", "lifecycle", "breakdown"}
    help_text = sub["sweep"].format_help()
    for flag in ("--scenario", "--mode", "--counts", "--jobs", "--out", "--section"):
        assert flag in help_text
