import json
import subprocess
import sys

import pytest

from normsched.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path, capsys):
    paths = {}
    for name, args in {"j0": ["--family", "jp", "--p", "0"], "j1": ["--family", "jp", "--p", "1"],
                       "p0": ["--family", "pp", "--p", "0"]}.items():
        paths[name] = str(tmp_path / f"{name}.json")
        assert main(["gen", *args, "-o", paths[name]]) == 0
    capsys.readouterr()
    return paths


def test_gen_family_sizes(capsys):
    code, out, _ = run(capsys, "gen", "--family", "jp", "--p", "1")
    assert code == 0 and len(json.loads(out)["jobs"]) == 8
    code, out, _ = run(capsys, "gen", "--family", "theorem", "--p", "1", "--chain-length", "3")
    assert len(json.loads(out)["instance"]["jobs"]) == 12


def test_solve_grid_total(capsys, files):
    code, out, _ = run(capsys, "solve", "--input", files["j0"], "--method", "grid", "--grid-k", "1")
    assert code == 0
    assert json.loads(out)["total"] == "13/2"


def test_solve_exact_is_byte_deterministic(capsys, files):
    first = run(capsys, "solve", "--input", files["j0"])
    second = run(capsys, "solve", "--input", files["j0"])
    assert first[0] == 0 and first[1] == second[1]
    assert json.loads(first[1])["certified"] is True


def test_solve_pipeline_into_verify(capsys, files, tmp_path):
    out = str(tmp_path / "sol.json")
    assert main(["solve", "--input", files["j0"], "-o", out]) == 0
    code, text, _ = run(capsys, "verify", "--schedule", out)
    report = json.loads(text)
    assert code == 0 and report["feasible"] and report["metrics"]["total"] == "13/2"


def test_verify_constructed_schedule(capsys, files):
    code, out, _ = run(capsys, "verify", "--schedule", files["p0"])
    report = json.loads(out)
    assert code == 0
    assert report["feasible"] is True and report["normal"] is True
    assert report["resolution"] == "1/2"
    assert report["events"] == ["0", "1/2", "1", "3/2", "5/2"]


def test_verify_rejects_infeasible_schedules(capsys, tmp_path, files):
    bad = json.loads(open(files["p0"]).read())
    bad["schedule"]["machines"][0][0]["end"] = "1/2"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out, _ = run(capsys, "verify", "--schedule", str(path))
    assert code == 1 and json.loads(out)["feasible"] is False


def test_lint_and_fix(capsys, tmp_path):
    bundle = {
        "instance": {"jobs": [{"id": j, "release": 0} for j in range(3)]},
        "partition": {"events": ["0", "1", "3/2", "2"],
                      "xi": [{"0": "1/2", "1": "1/2", "2": "1/2"}, {"0": "1/2", "1": "1/2"}, {"2": "1/2"}]},
    }
    path = tmp_path / "ccd.json"
    path.write_text(json.dumps(bundle))
    code, out, _ = run(capsys, "lint", "--schedule", str(path))
    kinds = {d["kind"] for d in json.loads(out)["diagnostics"]}
    assert code == 1 and "CcdConfiguration" in kinds
    code, out, _ = run(capsys, "lint", "--schedule", str(path), "--fix")
    trace = json.loads(out)["trace"]
    assert trace[0]["kind"] == "swap" and trace[0]["cost_after"] == "9/2"


def test_gantt_formats(capsys, files):
    code, out, _ = run(capsys, "gantt", "--schedule", files["p0"])
    assert code == 0 and out.startswith("M1 |a1^0")
    code, out, _ = run(capsys, "gantt", "--schedule", files["p0"], "--format", "svg", "--labels", "id")
    assert out.startswith("<svg")


def test_error_exit_codes(capsys, files, tmp_path):
    assert run(capsys, "verify", "--schedule", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "verify", "--schedule", files["j0"])[0] == 2
    with pytest.raises(SystemExit) as err:
        main(["solve", "--input", files["j0"], "--bogus"])
    assert err.value.code == 2
    assert run(capsys, "solve", "--input", files["j1"], "--time-limit", "0.01")[0] == 3
    cyclic = tmp_path / "cyc.json"
    cyclic.write_text(json.dumps({"jobs": [{"id": 0, "parent": 1}, {"id": 1, "parent": 0}]}))
    assert run(capsys, "solve", "--input", str(cyclic))[0] == 1


def test_bench_writes_tables(capsys, tmp_path):
    code, out, _ = run(capsys, "bench", "--out-dir", str(tmp_path), "--only", "1,2", "--no-figures")
    assert code == 0
    assert "[PASS]  1 family size" in out and "[PASS]  2" in out
    data = json.loads((tmp_path / "results.json").read_text())
    assert [r["criterion"] for r in data["results"]] == [1, 2]
    assert (tmp_path / "results.txt").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "normsched", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "normsched" in proc.stdout
