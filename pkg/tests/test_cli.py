import csv
import json

import pytest

from polyharm.builder import Construction
from polyharm.cli import run


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def report(path):
    return json.loads(open(path).read())


SINGLE = {"N": 5, "m": 1, "sign": "plus", "kernel": {"variant": "riesz", "alpha": 2.0}, "p": 2.0, "q": 2.0}


def test_classify_envelope_and_determinism(tmp_path):
    inp = write(tmp_path, "in.json", SINGLE)
    out = str(tmp_path / "out.json")
    assert run(["classify", "-i", inp, "-o", out]) == 0
    a = report(out)
    assert run(["classify", "-i", inp, "-o", out]) == 0
    b = report(out)
    assert set(a) == {"schema_version", "command", "config", "result", "timestamp"}
    assert a["result"]["status"] == "ExistsNontrivial" and a["command"] == "classify"
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_classify_exit_codes(tmp_path, capsys):
    minus = write(tmp_path, "minus.json", dict(SINGLE, sign="minus"))
    assert run(["classify", "-i", minus]) == 0
    assert json.loads(capsys.readouterr().out)["result"]["status"] == "NoNontrivialSolution"
    log = write(tmp_path, "log.json", dict(SINGLE, kernel={"variant": "log", "beta": 2.0}, p=1.5, q=1.5))
    assert run(["classify", "-i", log]) == 2
    bad = write(tmp_path, "bad.json", dict(SINGLE, N=3, kernel={"variant": "riesz", "alpha": 3.0}))
    assert run(["classify", "-i", bad]) == 1
    assert "error" in capsys.readouterr().err


def test_input_errors(tmp_path, capsys, monkeypatch):
    assert run(["classify", "-i", write(tmp_path, "x.json", "{not json")]) == 1
    assert run(["classify", "-i", write(tmp_path, "v.json", dict(SINGLE, schema_version=7))]) == 1
    assert run(["classify"]) == 1
    monkeypatch.setenv("POLYHARM_THREADS", "zero")
    assert run(["classify", "-i", write(tmp_path, "ok.json", SINGLE)]) == 1
    err = capsys.readouterr().err
    assert "invalid JSON" in err and "schema_version" in err and "POLYHARM_THREADS" in err


def test_threads_echoed(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("POLYHARM_THREADS", "4")
    assert run(["classify", "-i", write(tmp_path, "ok.json", SINGLE)]) == 0
    assert json.loads(capsys.readouterr().out)["config"]["threads"] == 4


def test_classify_system(tmp_path, capsys):
    spec = {"N": 5, "m": 2, "adjacency": [[0, 1], [1, 0]], "p": 2.0, "q": 2.0,
            "kernels": {"variant": "riesz", "alpha": 1.0}, "form": "cross"}
    assert run(["classify-system", "-i", write(tmp_path, "s.json", spec)]) == 0
    res = json.loads(capsys.readouterr().out)["result"]
    assert res["nodes"] == ["MustVanish", "MustVanish"]
    spec["adjacency"] = [[0, 0], [0, 0]]
    assert run(["classify-system", "-i", write(tmp_path, "s0.json", spec)]) == 2


def test_construct_verify_and_mutation(tmp_path):
    inp = write(tmp_path, "in.json", {"N": 5, "m": 1, "alpha": 2.0, "p": 2.0, "q": 2.0})
    out = tmp_path / "cons"
    assert run(["construct", "-i", inp, "-o", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"construction.json", "u_profile.csv", "report.json"}
    assert report(out / "report.json")["result"]["kappa"] == pytest.approx(7 / 3)
    rows = list(csv.reader(open(out / "u_profile.csv")))
    assert len(rows) == 201
    cons_path = str(out / "construction.json")
    assert run(["verify", "-i", cons_path, "-o", str(tmp_path / "v.json")]) == 0
    assert report(tmp_path / "v.json")["result"]["status"] == "PASS"

    cons = Construction.loads(open(cons_path).read())
    cons.scale *= 10
    bad = write(tmp_path, "bad.json", cons.dumps())
    assert run(["verify", "-i", bad, "-o", str(tmp_path / "vb.json")]) == 1
    res = report(tmp_path / "vb.json")["result"]
    assert res["status"] == "FAIL" and res["min_normalized_margin"] < 0
    assert run(["construct", "-i", inp]) == 1


def test_construct_outside_region_fails(tmp_path):
    inp = write(tmp_path, "in.json", {"N": 5, "m": 1, "alpha": 2.0, "p": 1.0, "q": 1.5})
    assert run(["construct", "-i", inp, "-o", str(tmp_path / "c")]) == 1


def test_decay_fit(tmp_path, capsys):
    assert run(["decay-fit", "-i", write(tmp_path, "d.json", {"N": 3, "alpha": 1.0, "beta": 4.0})]) == 0
    res = json.loads(capsys.readouterr().out)["result"]
    assert res["label"] == "supercritical" and abs(res["slope"] + 1) < 0.05


def test_region_csv(tmp_path):
    spec = {"N": 5, "m": 1, "alpha": 2.0, "p_min": 1.0, "p_max": 3.0, "samples": 5}
    out = tmp_path / "r.csv"
    assert run(["region-csv", "-i", write(tmp_path, "r.json", spec), "-o", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 25 and set(rows[0]) == {"p", "q", "q_min_bound", "q_sum_bound", "verdict"}
    assert run(["region-csv", "-i", write(tmp_path, "r0.json", dict(spec, samples=0))]) == 1


def test_potential(tmp_path):
    spec = {"N": 4, "m": 2, "source": {"variant": "plateau", "R": 1.0}}
    out = tmp_path / "pot"
    assert run(["potential", "-i", write(tmp_path, "p.json", spec), "-o", str(out)]) == 1  # N <= 2m
    spec["N"] = 9
    assert run(["potential", "-i", write(tmp_path, "p.json", spec), "-o", str(out)]) == 0
    res = report(out / "report.json")["result"]
    assert res["files"] == ["W1.csv", "W2.csv"]
    assert abs(res["tails"][1]["slope"] - (4 - 9)) < 0.05


def test_barrier_report(tmp_path, cons5):
    inp = write(tmp_path, "c.json", cons5.dumps())
    out = tmp_path / "bar"
    assert run(["barrier-report", "-i", inp, "-o", str(out)]) == 0
    res = report(out / "report.json")["result"]
    assert res["polysuperharmonic"]["passed"]
    assert res["cutoff_ladder"]["status"] == "Bounded"
    assert (out / "cutoff_ladder.csv").read_text().startswith("R,ratio\n")


def test_grid_flag_validation(tmp_path):
    inp = write(tmp_path, "c.json", SINGLE)
    assert run(["verify", "-i", inp, "--grid-min", "10", "--grid-max", "1"]) == 1
    assert run(["classify", "-i", inp, "--tol", "-1"]) == 1
