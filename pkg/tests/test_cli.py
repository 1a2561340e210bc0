import json

from carnotpoly import io as cio
from carnotpoly.cli import main
from carnotpoly.freelie import build_free


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_free_emit_and_roundtrip(tmp_path, capsys):
    path = tmp_path / "free24.json"
    code, out, _ = run(capsys, "free", "--rank", "2", "--step", "4",
                       "--emit", str(path), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["dim"] == 8
    assert doc["stratum_dims"] == [2, 1, 2, 3]
    loaded, overrides = cio.load_algebra(path)
    reference, _ = build_free(2, 4)
    assert loaded.degrees == reference.degrees
    assert loaded.table == reference.table
    assert overrides == {}


def test_free_respects_dimension_cap(monkeypatch, capsys):
    monkeypatch.setenv("CARNOT_MAX_DIM", "10")
    code, _, err = run(capsys, "free", "--rank", "3", "--step", "4")
    assert code == 2
    assert "cap" in err


def test_prolong_report(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(path))
    code, out, _ = run(capsys, "prolong", str(path), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["stratum_dims"] == [4, 0]
    assert doc["terminated"] is True


def test_verify_ok_and_exit_codes(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "3", "--emit", str(path))
    code, out, _ = run(capsys, "verify", str(path), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["residual_count"] == 0
    assert doc["status"] == "ok"


def test_verify_corrupted_table(tmp_path, capsys):
    path = tmp_path / "bad.json"
    doc = {
        "dim": 3, "rank": 2, "step": 2, "degrees": [1, 1, 2],
        "brackets": [
            {"i": 2, "j": 1, "terms": [{"k": 3, "c": "1"}]},
            {"i": 1, "j": 2, "terms": [{"k": 3, "c": "1"}]},
        ],
    }
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(path), "--json")
    assert code == 1
    rep = json.loads(out)
    assert any("antisymmetry" in line and "(1, 2)" in line
               for line in rep["table_validation"])


def test_minors_report(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(path))
    code, out, _ = run(capsys, "minors", str(path), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["minor_count"] == 21
    assert doc["nonzero_minors"] == 21
    assert doc["rows"] == [-3, -2, -1, 0, 1, 2, 3]
    joined = "\n".join(doc["certificates"])
    assert "rows(-1,0,1,2,3): degree 14" in joined


def test_detect_from_csv(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(path))
    curve = tmp_path / "line.csv"
    lines = ["t,x1,x2,x3,x4,x5,x6,x7,x8"]
    for t in ("0", "1/2", "1", "2"):
        lines.append(",".join([t, "0", t] + ["0"] * 6))
    curve.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "detect", str(path), str(curve), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["exact"] is True
    assert doc["corank_lower_bound"] == 3
    assert doc["basis"] == [
        ["0", "0", "0", "1", "0", "0", "0", "0"],
        ["0", "0", "0", "0", "0", "1", "0", "0"],
        ["0", "0", "0", "0", "0", "0", "1", "0"]]


def test_detect_rejects_bad_header(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "2", "--emit", str(path))
    curve = tmp_path / "bad.csv"
    curve.write_text("time,x1,x2,x3\n0,0,0,0\n")
    code, _, err = run(capsys, "detect", str(path), str(curve))
    assert code == 2
    assert "header" in err


def test_integrate_normal_and_emit(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(path))
    out_csv = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "integrate", str(path), "--mode", "normal",
                       "--lambda0=-1,0,1,0,0,0,0,0", "--step", "0.01",
                       "--emit", str(out_csv), "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["prime_integral_drift"] <= 1e-8
    times, points, lams = cio.load_samples(out_csv, 8)
    assert len(times) == 101
    assert lams is not None


def test_integrate_horizontal_with_expressions(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "3", "--emit", str(path))
    code, out, _ = run(capsys, "integrate", str(path), "--mode", "horizontal",
                       "--controls", "cos(t);sin(t)", "--step", "0.01",
                       "--json")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["endpoint"][0] - 0.8414709848) < 1e-8


def test_reports_are_deterministic(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(path))
    _, out1, _ = run(capsys, "minors", str(path), "--json")
    _, out2, _ = run(capsys, "minors", str(path), "--json")
    assert out1 == out2


def test_polys_prints_family(tmp_path, capsys):
    path = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(path))
    code, out, _ = run(capsys, "polys", str(path), "--max-depth", "3",
                       "--json")
    assert code == 0
    doc = json.loads(out)
    rows = {line.split(" = ")[0]: line for line in doc["rows"]}
    assert rows["P_3"].endswith(
        "v3*(1) + v4*(-x1) + v5*(-x2) + v6*(1/2*x1^2) + v7*(x1*x2) + "
        "v8*(1/2*x2^2)")
    assert "P_-3" in rows


def test_unreadable_file_is_input_error(capsys):
    code, _, err = run(capsys, "verify", "/nonexistent/algebra.json")
    assert code == 2
    assert "cannot read" in err


def test_prolong_emit_basis_roundtrip(tmp_path, capsys):
    src = tmp_path / "a.json"
    run(capsys, "free", "--rank", "2", "--step", "4", "--emit", str(src))
    exported = tmp_path / "with_basis.json"
    code, out, _ = run(capsys, "prolong", str(src), "--emit-basis",
                       str(exported), "--json")
    assert code == 0
    algebra, overrides = cio.load_algebra(exported)
    assert 0 in overrides and len(overrides[0]) == 4
    # reloading the exported basis reproduces the same extension
    from carnotpoly.prolongation import prolong
    P1 = prolong(algebra, 3)
    P2 = prolong(algebra, 3, basis_overrides=overrides)
    assert P1.algebra.table == P2.algebra.table


def test_spiral_cli_small(capsys):
    code, out, _ = run(capsys, "spiral", "--samples", "60",
                       "--puncture", "1e-4", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["goh_ok"] and doc["dimension"] == 64
