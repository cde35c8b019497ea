import io
import json
import subprocess
import sys

import pytest

from creaturekit.audit import gen_edrf_sourness
from creaturekit.cli import canonical, dispatch
from creaturekit.core import HSpec

SINGLETON_3 = {"sizes": [2, 2, 2, 2], "delta": [{"f": [[0, 1], [1, 0], [2, 1]]}]}


def run(argv, payload=None, tmp_path=None):
    if payload is not None:
        path = tmp_path / "in.json"
        path.write_text(json.dumps(payload))
        argv = list(argv) + ["--in", str(path)]
    buf = io.StringIO()
    code = dispatch(argv, out=buf)
    return code, json.loads(buf.getvalue())


def test_hall_singleton(tmp_path):
    code, rep = run(["hall"], SINGLETON_3, tmp_path)
    assert code == 0 and rep["exit"] == 0
    assert {k: rep["result"][k] for k in ("hn", "hn_plus", "HN")} == {"hn": 4, "hn_plus": 4, "HN": 4}
    assert rep["checks"]["chain"] is True


def test_hall_with_oracle(tmp_path):
    code, rep = run(["hall", "--oracle"], SINGLETON_3, tmp_path)
    assert code == 0 and rep["checks"]["oracle_agrees"] is True


def test_mixcos_disjoint_equality(tmp_path):
    half = [[1, 2], [1, 2]]

    def branch(a, b):
        return {"sizes": [2, 2], "depth": 2, "weights": [half, half],
                "tree": {"children": {str(a): {"children": {str(b): {"children": {}}}}}}}

    code, rep = run(["mt-check", "--lemma", "mixcos"], {"trees": [branch(0, 0), branch(1, 1)]}, tmp_path)
    assert code == 0
    assert rep["result"]["equality"] is True and rep["result"]["union"] == [1, 2]


def test_sourness_overlap_exits_1(tmp_path):
    bad = gen_edrf_sourness(1, HSpec((4, 4))).to_json()
    bad["g"]["1"] = bad["g"]["0"]
    code, rep = run(["audit", "sourness"], bad, tmp_path)
    assert code == 1
    assert rep["result"]["first_failure"]["clause"] == "gamma"
    assert rep["result"]["first_failure"]["witness"]


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        dispatch(["frobnicate"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_invalid_input_exits_2(tmp_path):
    code, rep = run(["hn"], {"sizes": [2, 2], "delta": [{"f": [[0, 5]]}]}, tmp_path)
    assert code == 2 and rep["error"]["type"] == "InvalidInput"


def test_cap_exceeded_exits_3(tmp_path, raise_caps):
    raise_caps("HN_total_dom=2")
    code, rep = run(["hall"], SINGLETON_3, tmp_path)
    assert code == 3 and rep["error"]["type"] == "CapExceeded"


def test_echo_input_is_canonical(tmp_path):
    path = tmp_path / "messy.json"
    path.write_text('{ "delta": [ {"f": [[0,1],[1,0],[2,1]]} ],\n  "sizes": [2,2,2,2] }')
    buf = io.StringIO()
    dispatch(["hall", "--echo-input", "--in", str(path)], out=buf)
    rep = json.loads(buf.getvalue())
    assert canonical(rep["input"]) == canonical(json.loads(path.read_text()))
    # the echoed input runs again to the same result
    code, again = run(["hall"], rep["input"], tmp_path)
    assert again["result"] == rep["result"]


def test_seed_is_reported_and_output_deterministic(tmp_path):
    a = run(["hall", "--seed", "7"], SINGLETON_3, tmp_path)
    b = run(["hall", "--seed", "7"], SINGLETON_3, tmp_path)
    assert a == b and a[1]["seed"] == 7


def test_timing_only_on_request(tmp_path):
    _, rep = run(["hall"], SINGLETON_3, tmp_path)
    assert "timing" not in rep
    _, rep = run(["hall", "--timing"], SINGLETON_3, tmp_path)
    assert rep["timing"] >= 0


def test_gen_then_audit_round_trip(tmp_path):
    code, rep = run(["gen", "sourness", "--kmax", "2"])
    assert code == 0
    code, rep2 = run(["audit", "sourness"], rep["result"], tmp_path)
    assert code == 0 and rep2["result"]["status"] == "prefix-valid"


@pytest.mark.parametrize("r,expected", [({"1": 0, "2": 0}, True), ({"2": 0}, False)])
def test_gcheck_answers_membership(tmp_path, r, expected):
    obj = {"sizes": [2, 2, 2], "lev": 3, "nodes": [[], [0], [1], [0, 0], [1, 1], [0, 0, 0], [1, 1, 1]],
           "n_dn": 0, "n_up": 3, "r": r}
    code, rep = run(["gcheck", "--kind", "cmz"], obj, tmp_path)
    # non-membership is an answer, not a failed check
    assert code == 0 and rep["result"]["member"] is expected


def test_edrf_hlinked_audit():
    code, rep = run(["audit", "edrf-hlinked", "--N", "8"])
    assert code == 0 and rep["checks"]["ok"] is True


def test_console_entry_point(tmp_path):
    path = tmp_path / "in.json"
    path.write_text(json.dumps(SINGLETON_3))
    proc = subprocess.run([sys.executable, "-m", "creaturekit.cli", "hn", "--in", str(path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"] == {"hn": 4}
