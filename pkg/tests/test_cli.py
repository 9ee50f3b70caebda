import json
import subprocess
import sys

import pytest

from ghostwalk.cli import main, parse_state
from ghostwalk.errors import InvalidArgument
from ghostwalk.ghostdet import FinalState


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_state():
    assert parse_state("k=0,survivors=0,2") == FinalState((0, 2), ())
    assert parse_state("k=1,survivors=3,ghosts=(1,5)") == FinalState((3,), ((1, 5),))
    assert parse_state("ghosts=(1,5);(2,2)") == FinalState((), ((1, 5), (2, 2)))


@pytest.mark.parametrize("bad", ["", "survivors=a", "k=2,ghosts=(1,2)", "ghosts=1,2", "k=0,k=0", "foo=1"])
def test_parse_state_rejects(bad):
    with pytest.raises(InvalidArgument):
        parse_state(bad)


def test_weight_example(capsys):
    code, out, err = run(capsys, "weight", "--lattice", "0,2", "--t", "2", "--state", "k=0,survivors=0,2")
    assert code == 0
    assert err.strip() == "3/16"
    assert json.loads(out)["weights"][0]["weight"] == "3/16"


def test_weight_single_walker(capsys):
    code, _, err = run(capsys, "weight", "--lattice", "0", "--t", "1", "--state", "k=0,survivors=1")
    assert code == 0 and err.strip() == "1/2"


def test_weight_malformed_state(capsys):
    code, _, err = run(capsys, "weight", "--lattice", "0,2", "--t", "2", "--state", "k=0,survivors=x")
    assert code == 2 and "cannot parse" in err


def test_weight_csv_to_file(capsys, tmp_path):
    out_file = tmp_path / "w.csv"
    code, out, _ = run(capsys, "weight", "--lattice", "0,2", "--t", "1", "--all-states", "--format", "csv", "--out", str(out_file))
    assert code == 0 and out == ""
    lines = out_file.read_text().splitlines()
    assert lines[0] == "state,weight" and len(lines) == 5


def test_weight_graph_file(capsys, tmp_path):
    spec = {
        "vertices": [{"id": v} for v in ("x1", "x2", "y1", "y2")],
        "edges": [
            {"from": "x1", "to": "y1", "w": "1/1"},
            {"from": "x2", "to": "y2", "w": "1/1"},
            {"from": "x1", "to": "y2", "w": "1/2"},
        ],
        "sources": ["x1", "x2"],
    }
    path = tmp_path / "g.json"
    path.write_text(json.dumps(spec))
    code, _, err = run(capsys, "weight", "--graph", str(path), "--state", "survivors=y1,y2")
    assert code == 0 and err.strip() == "1/1"


def test_weight_lattice_graph_file(capsys, tmp_path):
    path = tmp_path / "lat.json"
    path.write_text(json.dumps({"lattice": {"min": -4, "max": 6, "horizon": 2, "step_w": "1/2"}, "sources": [0, 2]}))
    code, _, err = run(capsys, "weight", "--graph", str(path), "--state", "k=0,survivors=0,2")
    assert code == 0 and err.strip() == "3/16"


def test_compare_pair(capsys):
    code, out, err = run(capsys, "compare", "--lattice", "0,2", "--t", "2")
    assert code == 0
    assert err.strip() == "states: 10, mismatches: 0, total: 1/1"
    assert json.loads(out)["mismatches"] == []


def test_compare_pfaffian(capsys):
    code, out, err = run(capsys, "compare", "--lattice", "0,2,4,6", "--t", "2", "--pfaffian")
    assert code == 0
    pf = json.loads(out)["pfaffian"]
    assert pf["pfaffian"] == pf["complete_annihilation"] == pf["pairwise_coalescence"] == "35/256"


def test_compare_corrupted_formula_fails(capsys):
    code, _, err = run(capsys, "compare", "--lattice", "0,2", "--t", "2", "--corrupt-formula")
    assert code == 1 and "mismatches: 0" not in err


def test_compare_cap(capsys):
    code, _, err = run(capsys, "compare", "--lattice", "0,2,4", "--t", "9")
    assert code == 3 and "cap" in err


def test_compare_byte_stable(capsys):
    first = run(capsys, "compare", "--lattice", "0,2,4", "--t", "2")
    second = run(capsys, "compare", "--lattice", "0,2,4", "--t", "2", "--workers", "2")
    assert first == second


def test_audit_pair(capsys):
    code, out, _ = run(capsys, "audit", "--lattice", "0,2", "--t", "2", "--all-states")
    report = json.loads(out)
    assert code == 0 and report["violations"] == [] and report["checked"] > 0


def test_audit_single_walker_vacuous(capsys):
    code, out, _ = run(capsys, "audit", "--lattice", "0", "--t", "1", "--all-states")
    assert code == 0 and json.loads(out)["violations"] == []


def test_audit_refuses_mixed_parity(capsys):
    code, out, err = run(capsys, "audit", "--lattice", "0,1", "--t", "1", "--all-states")
    assert code == 1 and "refused" in err
    assert json.loads(out)["planarity"]["crossing"] is False


def test_audit_needs_states(capsys):
    code, _, _ = run(capsys, "audit", "--lattice", "0,2", "--t", "1")
    assert code == 2


def test_prescribed_default_exit_tracks_report(capsys):
    code, out, err = run(capsys, "prescribed", "--no-pooled")
    report = json.loads(out)
    assert err.startswith("inconsistent: ")
    assert code == (0 if report["inconsistent"] and report["minimal"] else 1)


def test_prescribed_three_tuples_consistent(capsys):
    code, _, err = run(capsys, "prescribed", "--no-pooled", "--tuples=-2,0,2;-2,0,4;-2,2,4")
    assert code == 0 and err.strip() == "consistent"


def test_prescribed_unreachable_tuple_row(capsys):
    code, out, _ = run(capsys, "prescribed", "--no-pooled", "--tuples=-2,0,2;-1,0,3")
    assert code == 0 and json.loads(out)["rhs"][1] == "0/1"


def test_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "ghostwalk.cli", "weight"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_help_documents_state_language():
    proc = subprocess.run([sys.executable, "-m", "ghostwalk.cli", "weight", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "ghosts=(A1,B1);(A2,B2)" in proc.stdout
