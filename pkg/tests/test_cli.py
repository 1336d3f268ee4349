"""End-to-end CLI tests on a small synthetic dataset."""
import hashlib
import json

import pytest

from qeeg.cli import main
from qeeg.dataset import SynthSpec

MONTAGE = ("F7", "F8", "T7", "T8", "P4")
AFFECTED = ("F8", "T7", "T8")


@pytest.fixture(scope="module")
def spec_path(tmp_path_factory):
    root = tmp_path_factory.mktemp("spec")
    spec = SynthSpec.default(channel_labels=MONTAGE, alpha_affected=AFFECTED,
                             subjects={"AD": 2, "NonAD": 2})
    spec = SynthSpec(subjects=spec.subjects, sessions_per_subject=6,
                     channel_labels=MONTAGE, duration_seconds=10.0,
                     sampling_rate_hz=200.0, profiles=spec.profiles)
    path = root / "spec.json"
    path.write_text(json.dumps(spec.to_json()))
    return path


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory, spec_path):
    out = tmp_path_factory.mktemp("data")
    rc = main(["synth", "--spec", str(spec_path), "--seed", "5", "--out", str(out)])
    assert rc == 0
    return out


def read_output_json(path):
    doc = json.loads(path.read_text())
    assert "config" in doc and "checksum" in doc and "data" in doc
    payload = json.dumps(doc["data"], sort_keys=True)
    assert hashlib.sha256(payload.encode()).hexdigest() == doc["checksum"]
    return doc


def test_synth_writes_recordings_and_manifest(data_dir):
    csvs = sorted(data_dir.glob("*.csv"))
    manifests = [p for p in data_dir.glob("*.json")
                 if not p.name.endswith("_manifest.json")]
    assert len(csvs) == 24 and len(manifests) == 24
    run = json.loads((data_dir / "synth_manifest.json").read_text())
    assert run["command"] == "synth"
    assert len(run["outputs"]) == 48
    for name, digest in run["outputs"].items():
        assert hashlib.sha256((data_dir / name).read_bytes()).hexdigest() == digest


def test_features_idempotent(data_dir, tmp_path):
    out1 = tmp_path / "f1"
    out2 = tmp_path / "f2"
    assert main(["features", "--data", str(data_dir), "--out", str(out1)]) == 0
    assert main(["features", "--data", str(data_dir), "--out", str(out2)]) == 0
    b1 = (out1 / "features.csv").read_bytes()
    b2 = (out2 / "features.csv").read_bytes()
    assert b1 == b2
    text = (out1 / "features.csv").read_text()
    assert text.startswith("# config: ")
    payload = text.split("\n", 2)[2]
    checksum = text.split("\n")[1].split(": ")[1]
    assert hashlib.sha256(payload.encode()).hexdigest() == checksum
    # 24 recordings x 5 channels x 4 bands x 10 segments data rows
    assert sum(1 for ln in payload.splitlines() if ln) - 1 == 24 * 5 * 4 * 10


def test_train_eval_cycle(data_dir, tmp_path):
    model_dir = tmp_path / "model"
    rc = main(["train", "--data", str(data_dir), "--band", "alpha",
               "--channels", "F8,T7,T8,P4", "--pcs", "3", "--out", str(model_dir)])
    assert rc == 0
    doc = read_output_json(model_dir / "model.json")
    assert doc["data"]["qpca"]["p"] == 3
    assert doc["config"]["command"] == "train"

    eval_dir = tmp_path / "eval"
    rc = main(["eval", "--model", str(model_dir / "model.json"),
               "--data", str(data_dir), "--out", str(eval_dir)])
    assert rc == 0
    mdoc = read_output_json(eval_dir / "metrics.json")
    counts = mdoc["data"]
    assert counts["tp"] + counts["tn"] + counts["fp"] + counts["fn"] == 4

    # metrics are deterministic across re-runs
    eval_dir2 = tmp_path / "eval2"
    main(["eval", "--model", str(model_dir / "model.json"),
          "--data", str(data_dir), "--out", str(eval_dir2)])
    assert (eval_dir / "metrics.json").read_bytes() == \
        (eval_dir2 / "metrics.json").read_bytes()


def test_eval_band_mismatch_is_config_error(data_dir, tmp_path, capsys):
    model_dir = tmp_path / "model"
    main(["train", "--data", str(data_dir), "--band", "alpha",
          "--channels", "F8,T7,T8,P4", "--pcs", "2", "--out", str(model_dir)])
    rc = main(["eval", "--model", str(model_dir / "model.json"),
               "--data", str(data_dir), "--band", "beta", "--out", str(tmp_path / "x")])
    assert rc == 1
    assert "does not match model band" in capsys.readouterr().err


def test_search_parallelism_byte_identical(data_dir, tmp_path):
    out1 = tmp_path / "s1"
    out8 = tmp_path / "s8"
    base = ["search", "--data", str(data_dir), "--band", "alpha",
            "--p-sweep-limit", "5"]
    assert main(base + ["--parallelism", "1", "--out", str(out1)]) == 0
    assert main(base + ["--parallelism", "8", "--out", str(out8)]) == 0
    for name in ("search_results.csv", "search_summary.csv", "search_ranked.json"):
        assert (out1 / name).read_bytes() == (out8 / name).read_bytes()
    results = (out1 / "search_results.csv").read_text().splitlines()
    data_rows = [r for r in results if r and not r.startswith("#")][1:]
    assert len(data_rows) == 120  # C(5,4) * 24


def test_crossval_deterministic(data_dir, tmp_path):
    out1 = tmp_path / "cv1"
    out2 = tmp_path / "cv2"
    base = ["crossval", "--data", str(data_dir), "--band", "alpha",
            "--channels", "F8,T7,T8,P4", "--pcs", "3", "--k", "4",
            "--repeats", "3", "--seed", "9"]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2)]) == 0
    assert (out1 / "crossval.json").read_bytes() == (out2 / "crossval.json").read_bytes()
    doc = read_output_json(out1 / "crossval.json")
    assert doc["data"]["k"] == 4 and doc["data"]["repeats"] == 3
    assert 0.0 <= doc["data"]["mean_score"] <= 1.0


def test_sweep_command(data_dir, tmp_path):
    out = tmp_path / "sweep"
    rc = main(["sweep", "--data", str(data_dir), "--band", "alpha",
               "--channels", "F8,T7,T8,P4", "--axis", "pcs",
               "--values", "1,2,3", "--out", str(out)])
    assert rc == 0
    rows = [r for r in (out / "sweep.csv").read_text().splitlines()
            if r and not r.startswith("#")]
    assert rows[0] == "axis,value,acc,sen,spe,p_used,error"
    assert len(rows) == 4


def test_connectivity_command(data_dir, tmp_path):
    out = tmp_path / "conn"
    rc = main(["connectivity", "--data", str(data_dir), "--mode", "quadruple",
               "--band", "alpha", "--out", str(out)])
    assert rc == 0
    tensor = read_output_json(out / "tensor_alpha_AD.json")
    assert tensor["data"]["mode"] == "quadruple"
    assert len(tensor["data"]["entries"]) == 120  # 5*4*3*2 ordered quadruples
    report = read_output_json(out / "distance_report.json")
    assert "alpha" in report["data"]["mean_dist"]


def test_baseline_command(data_dir, tmp_path):
    out = tmp_path / "base"
    rc = main(["baseline", "--data", str(data_dir), "--band", "alpha",
               "--channels", "F8,T7,T8,P4", "--p-sweep-limit", "5",
               "--out", str(out)])
    assert rc == 0
    doc = read_output_json(out / "comparison.json")
    assert doc["data"]["qpca"]["acc"] is not None
    assert doc["data"]["real_pca"]["acc"] is not None


def test_features_cache_reuse_matches_direct(data_dir, tmp_path):
    fdir = tmp_path / "feat"
    main(["features", "--data", str(data_dir), "--out", str(fdir)])
    out_direct = tmp_path / "direct"
    out_cached = tmp_path / "cached"
    base = ["train", "--data", str(data_dir), "--band", "alpha",
            "--channels", "F8,T7,T8,P4", "--pcs", "2"]
    main(base + ["--out", str(out_direct)])
    main(base + ["--cache", str(fdir / "features.csv"), "--out", str(out_cached)])
    direct = json.loads((out_direct / "model.json").read_text())["data"]
    cached = json.loads((out_cached / "model.json").read_text())["data"]
    assert direct == cached


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["search", "--data", str(tmp_path), "--out", str(tmp_path / "o")])
    rc = main(["features", "--data", str(tmp_path / "missing"),
               "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "not found" in capsys.readouterr().err
    empty = tmp_path / "empty"
    empty.mkdir()
    rc = main(["features", "--data", str(empty), "--out", str(tmp_path / "o2")])
    assert rc == 1
    assert "no recording manifests" in capsys.readouterr().err
