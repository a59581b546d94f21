import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from lsqmm.cli import main
from lsqmm.model_io import load_model

SYNTH = ["--synth", "--n-per-class", "6", "--synth-size", "6x6", "--rank", "2"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    lines = [l for l in out.splitlines() if l.strip()]
    payload = json.loads(lines[-1]) if lines else None
    if payload is not None:
        assert len(lines) == 1
    return code, payload, err


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def manifest(tmp_path, capsys):
    code, payload, _ = run(capsys, "synth", *SYNTH, "--n-per-class", "2", "--sigma", "0",
                           "--out-dir", tmp_path / "data", "--name", "four")
    assert code == 0 and payload["count"] == 4
    return tmp_path / "data" / "four.csv"


def test_train_predict_on_manifest(tmp_path, capsys, manifest):
    model_path = tmp_path / "m.bin"
    code, payload, _ = run(capsys, "train", "--manifest", manifest, "--target-size", "6x6",
                           "--soft-margin-c", "10", "--out", model_path)
    assert code == 0 and payload["converged"]
    assert {"iterations", "final_residual", "seconds"} <= payload.keys()
    model = load_model(model_path)
    assert model.shape == (6, 6)

    out1, out2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
    assert run(capsys, "predict", "--model", model_path, "--manifest", manifest, "--out", out1)[0] == 0
    assert run(capsys, "predict", "--model", model_path, "--manifest", manifest, "--out", out2)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = read_csv(out1)
    truth = [int(r["label"]) for r in read_csv(manifest)]
    assert [int(r["predicted_label"]) for r in rows] == truth
    assert list(rows[0].keys()) == ["path", "decision_value", "predicted_label"]


def test_train_max_iter_one(tmp_path, capsys):
    code, payload, _ = run(capsys, "train", *SYNTH, "--sigma", "0.3", "--lambda", "0.5",
                           "--max-iter", "1", "--out", tmp_path / "m.bin")
    assert code == 0 and payload["iterations"] == 1


def test_exit_codes(tmp_path, capsys, manifest):
    code, _, err = run(capsys, "train", "--manifest", tmp_path / "nope.csv", "--target-size", "4x4",
                       "--out", tmp_path / "m.bin")
    assert code == 2 and "nope.csv" in err
    assert run(capsys, "train", "--bogus")[0] == 64
    assert run(capsys, "train", "--out", tmp_path / "m.bin")[0] == 64
    assert run(capsys, "train", *SYNTH, "--tau", "2", "--out", tmp_path / "m.bin")[0] == 3

    empty = tmp_path / "empty.csv"
    empty.write_text("path,label\n")
    model_path = tmp_path / "m.bin"
    assert run(capsys, "train", *SYNTH, "--out", model_path)[0] == 0
    assert run(capsys, "predict", "--model", model_path, "--manifest", empty, "--out",
               tmp_path / "p.csv")[0] == 3

    code, payload, _ = run(capsys, "predict", "--model", model_path, "--manifest", manifest,
                           "--target-size", "5x5", "--out", tmp_path / "p.csv")
    assert code == 3 and payload["model_shape"] == [6, 6] and payload["target_size"] == [5, 5]


def test_cv_separable(tmp_path, capsys):
    code, payload, _ = run(capsys, "cv", *SYNTH, "--sigma", "0", "--soft-margin-c", "10",
                           "--repeats", "2", "--out-prefix", tmp_path / "cv")
    assert code == 0 and payload["accuracy_mean"] == 1.0
    assert len(read_csv(tmp_path / "cv.csv")) == 10
    assert json.loads((tmp_path / "cv.json").read_text())["summary"]["accuracy_mean"] == 1.0


def test_sweep_and_noise(tmp_path, capsys):
    code, payload, _ = run(capsys, "sweep", *SYNTH, "--sigma", "0.3", "--repeats", "1", "--folds", "3",
                           "--c-grid", "1,10", "--lambda-grid", "0.01,1", "--out-prefix", tmp_path / "s")
    assert code == 0 and payload["cells"] == 4
    assert len(json.loads((tmp_path / "s.json").read_text())["cells"]) == 4

    code, payload, _ = run(capsys, "noise-sweep", *SYNTH, "--sigma", "0.1", "--repeats", "1",
                           "--folds", "3", "--ratios", "0,0.5,1.0", "--out-prefix", tmp_path / "n")
    assert code == 0 and [e["R"] for e in payload["entries"]] == [0.0, 0.5, 1.0]
    assert run(capsys, "sweep", *SYNTH, "--c-grid", "x", "--lambda-grid", "1",
               "--out-prefix", tmp_path / "s")[0] == 64


def test_trace(tmp_path, capsys):
    model_path = tmp_path / "m.bin"
    assert run(capsys, "train", *SYNTH, "--sigma", "0.05", "--soft-margin-c", "10",
               "--out", model_path)[0] == 0
    code, payload, _ = run(capsys, "trace", "--model", model_path, "--out", tmp_path / "t.csv")
    assert code == 0
    rows = read_csv(tmp_path / "t.csv")
    assert list(rows[0].keys()) == ["iter", "objective", "residual", "seconds"]
    assert [int(r["iter"]) for r in rows] == list(range(1, len(rows) + 1))
    assert float(rows[-1]["residual"]) < 1e-3
    if len(rows) >= 2:
        a, b = float(rows[-1]["objective"]), float(rows[-2]["objective"])
        assert abs(a - b) / max(1.0, abs(a)) < 1e-2


def test_trace_missing(tmp_path, capsys):
    from lsqmm.model_io import save_model

    model_path = tmp_path / "m.bin"
    run(capsys, "train", *SYNTH, "--out", model_path)
    model = load_model(model_path)
    model.trace = []
    save_model(model, model_path)
    assert run(capsys, "trace", "--model", model_path, "--out", tmp_path / "t.csv")[0] == 3


def test_repeat_invocations_identical(tmp_path, capsys):
    outs = []
    for tag in ("a", "b"):
        d = tmp_path / tag
        run(capsys, "synth", *SYNTH, "--sigma", "0.2", "--data-seed", "4", "--out-dir", d, "--name", "s")
        run(capsys, "train", "--manifest", d / "s.csv", "--target-size", "6x6", "--out", d / "m.bin")
        run(capsys, "predict", "--model", d / "m.bin", "--manifest", d / "s.csv", "--out", d / "p.csv")
        outs.append(d)
    a, b = outs
    assert (a / "s.csv").read_bytes() == (b / "s.csv").read_bytes()
    for png in sorted(a.glob("*.png")):
        assert png.read_bytes() == (b / png.name).read_bytes()
    assert (a / "p.csv").read_bytes() == (b / "p.csv").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lsqmm", "synth", *SYNTH, "--out-dir",
                           str(tmp_path), "--name", "x"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 12
