import csv
import json

import numpy as np
import pytest

from rejfilter.classification import make_blobs, write_idx
from rejfilter.cli import main


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_minimal_freq_track(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["freq-track", "--updates", "1", "--attempts", "1", "--seed", "0", "--out", str(out)]) == 0
    assert len(read_rows(out)) == 1


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["freq-track", "--updates", "20", "--trials", "2", "--seed", "9", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_manifest_contents(tmp_path):
    out = tmp_path / "x.csv"
    main(["freq-track", "--updates", "3", "--seed", "5", "--out", str(out)])
    manifest = json.loads((tmp_path / "x.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "freq-track" and manifest["seed"] == 5
    assert manifest["parameters"]["updates"] == 3
    assert manifest["outputs"] == [str(out)]
    assert {"version", "duration_seconds", "created"} <= manifest.keys()


@pytest.mark.parametrize("argv", [
    ["kappa-sweep", "--kappas", "0"],
    ["kappa-sweep", "--kappas", "1.5"],
    ["freq-track", "--updates", "0", "--out", "x.csv"],
    ["model-select", "--truth-bias", "2", "--out", "x.csv"],
    ["model-select", "--beta", "0", "--out", "x.csv"],
    ["no-such-command"],
    [],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2


def test_runtime_error_exits_1(tmp_path):
    out = tmp_path / "c.csv"
    missing = str(tmp_path / "nope")
    assert main(["classify", "--train", f"{missing},{missing}", "--test", f"{missing},{missing}",
                 "--out", str(out)]) == 1


def test_kappa_sweep_small(tmp_path, capsys):
    out = tmp_path / "k.csv"
    assert main(["kappa-sweep", "--kappas", "1,0.1", "--trials", "4", "--measurements", "10",
                 "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [float(r["kappa"]) for r in rows] == [1.0, 0.1]
    assert "normalized median loss" in capsys.readouterr().out


def write_synthetic_idx(tmp_path):
    # blobs mapped to uint8 "images"; digit labels 0/1 so the zero-one task applies
    rng = np.random.default_rng(0)
    paths = {}
    for split, n in (("train", 100), ("test", 10)):
        corpus = make_blobs(n, n_features=16, rng=rng)
        pixels = np.clip(corpus.vectors * 20 + 100, 0, 255).astype(np.uint8).reshape(-1, 4, 4)
        paths[split] = (tmp_path / f"{split}-i", tmp_path / f"{split}-l")
        write_idx(paths[split][0], pixels)
        write_idx(paths[split][1], corpus.labels.astype(np.uint8))
    return {k: f"{a},{b}" for k, (a, b) in paths.items()}


def test_classify_and_feature_select(tmp_path):
    idx = write_synthetic_idx(tmp_path)
    out, hist, heat = tmp_path / "c.csv", tmp_path / "h.csv", tmp_path / "m.csv"
    argv = ["classify", "--train", idx["train"], "--test", idx["test"], "--capacity", "100",
            "--budget", "30", "--knn", "5", "--out", str(out), "--histogram", str(hist),
            "--heatmap", str(heat)]
    assert main(argv) == 0
    rows = read_rows(out)
    assert len(rows) == 20
    assert all(int(r["queries"]) <= 30 for r in rows)
    assert np.mean([r["label"] == r["predicted"] for r in rows]) >= 0.95
    counts = [int(r["count"]) for r in read_rows(hist)]
    assert sum(counts) == sum(int(r["queries"]) for r in rows)
    assert len(read_rows(heat)) == 4

    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first

    sel = tmp_path / "f.csv"
    assert main(["feature-select", "--histogram", str(hist), "--percentile", "50", "--out", str(sel)]) == 0
    kept = [int(r["feature"]) for r in read_rows(sel)]
    assert 0 < len(kept) <= 16
    out2 = tmp_path / "c2.csv"
    assert main(["classify", "--train", idx["train"], "--test", idx["test"], "--capacity", "100",
                 "--features", str(sel), "--out", str(out2)]) == 0
    assert len(read_rows(out2)) == 20


def test_model_select(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["model-select", "--updates", "10", "--attempts", "20", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [int(r["k"]) for r in rows] == list(range(1, 11))
    assert all(np.isfinite(float(r["ell_a"])) for r in rows)


def test_batch_bench(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["batch-bench", "--attempts", "5000", "--batches", "1,2,8", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert float(rows[0]["moment_delta"]) == 0.0
    assert all(float(r["moment_delta"]) <= 1e-9 for r in rows)
    sizes = [int(r["accumulator_bytes"]) for r in rows]
    assert sizes[1] == 2 * sizes[0] and sizes[2] == 8 * sizes[0]
