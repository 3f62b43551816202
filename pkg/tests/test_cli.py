import csv
import json
import subprocess
import sys

import pytest

from mfccsweep.cli import main


def run(args, capsys):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def fast_config(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "fast.yaml"
    p.write_text("eval:\n  k: 5\n")
    return p


def test_sweep_hop_axis(small_manifest, fast_config, tmp_path, capsys):
    code, _, err = run(["sweep", "--axis", "hop", "--manifest", small_manifest,
                        "--config", fast_config, "--out", tmp_path], capsys)
    assert code == 0, err
    table = rows(tmp_path / "sweep.csv")
    values = list(dict.fromkeys(r["value"] for r in table))
    assert values == ["5.0", "25.0", "50.0", "100.0", "200.0", "300.0", "400.0", "500.0"]
    assert len(table) == 8 * 5
    assert {r["axis"] for r in table} == {"hop_length_ms"}
    (series_path,) = tmp_path.glob("series_*_hop_length_ms.csv")
    assert small_manifest.parent.name in series_path.name
    series = rows(series_path)
    assert len(series) == 8 and [float(r["x"]) for r in series][0] == 5.0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert doc["seed"] == 0 and len(doc["results"]) == 8
    assert all(r["config"]["frame_length_ms"] == 25.0 for r in doc["results"])


def test_combos_summary(small_manifest, fast_config, tmp_path, capsys):
    code, out, err = run(["combos", "--manifest", small_manifest, "--config", fast_config,
                          "--out", tmp_path], capsys)
    assert code == 0, err
    body = [line.split()[0] for line in out.splitlines()[4:] if line and line[0].isalpha()]
    assert body[:3] == ["optimized", "default", "worst"]
    assert "optimized vs worst" in out and "relative" in out
    assert len(rows(tmp_path / "combos.csv")) == 3 * 5


def test_evaluate_group(small_manifest, fast_config, tmp_path, capsys):
    code, _, err = run(["evaluate", "--group", "F", "--manifest", small_manifest,
                        "--config", fast_config, "--out", tmp_path], capsys)
    assert code == 0, err
    doc = json.loads((tmp_path / "evaluate.json").read_text())
    assert doc["group"] == "F"
    assert doc["results"][0]["value"] == "F"
    # 20 of the 40 clips are F; k=5 folds of 4 test segments each
    folds = doc["results"][0]["metrics"]["metrics"]["accuracy"]["folds"]
    assert len(folds) == 5 and all(f * 4 == round(f * 4) for f in folds)


def test_extract_and_preprocess(small_manifest, tmp_path, capsys):
    assert run(["extract", "--manifest", small_manifest, "--out", tmp_path], capsys)[0] == 0
    feats = rows(tmp_path / "features.csv")
    assert len(feats) == 40 and "c12" in feats[0] and "c13" not in feats[0]
    assert run(["preprocess", "--manifest", small_manifest, "--out", tmp_path], capsys)[0] == 0
    segs = rows(tmp_path / "segments.csv")
    assert len(segs) == 40 and (tmp_path / segs[0]["path"]).is_file()


def test_harness_jobs_env(small_manifest, fast_config, tmp_path, capsys, monkeypatch):
    args = ["combos", "--manifest", small_manifest, "--config", fast_config]
    assert run(args + ["--out", tmp_path / "a", "--jobs", "1"], capsys)[0] == 0
    monkeypatch.setenv("HARNESS_JOBS", "3")
    assert run(args + ["--out", tmp_path / "b"], capsys)[0] == 0
    assert (tmp_path / "a/combos.json").read_bytes() == (tmp_path / "b/combos.json").read_bytes()
    monkeypatch.setenv("HARNESS_JOBS", "many")
    code, _, err = run(args + ["--out", tmp_path / "c"], capsys)
    assert code == 1 and "HARNESS_JOBS" in err


def _error(err):
    return json.loads(err.strip().splitlines()[-1])["error"]


def test_usage_error_exit_one(capsys):
    code, _, err = run(["sweep", "--axis", "bogus"], capsys)
    assert code == 1 and _error(err)["exit_code"] == 1


def test_bad_manifest_exit_one(tmp_path, capsys):
    m = tmp_path / "m.csv"
    m.write_text("id,path,label\na,a.wav,7\n")
    code, _, err = run(["evaluate", "--manifest", m], capsys)
    e = _error(err)
    assert code == 1 and e["type"] == "ManifestError" and "m.csv:2" in e["message"]


def test_unknown_config_key_exit_one(tmp_path, small_manifest, capsys):
    c = tmp_path / "c.yaml"
    c.write_text("mfcc:\n  coefficients: 13\n")
    code, _, err = run(["evaluate", "--manifest", small_manifest, "--config", c], capsys)
    assert code == 1 and _error(err)["type"] == "ConfigError"


def test_runtime_failure_exit_two(tmp_path, small_manifest, capsys):
    # one class only: training is impossible
    lines = small_manifest.read_text().splitlines()
    keep = [lines[0]] + [l for l in lines[1:] if l.split(",")[2] == "0"]
    m = small_manifest.parent / "one_class.csv"
    m.write_text("\n".join(keep) + "\n")
    code, _, err = run(["evaluate", "--manifest", m, "--out", tmp_path], capsys)
    assert code == 2 and "two classes" in _error(err)["message"]


def test_dump_config_round_trips(tmp_path, capsys):
    code, out, _ = run(["dump-config"], capsys)
    p = tmp_path / "c.yaml"
    p.write_text(out)
    assert run(["dump-config", "--config", p], capsys)[1] == out


def test_synth_command(tmp_path, capsys):
    code, out, _ = run(["synth", "--n-clips", "4", "--out", tmp_path], capsys)
    assert code == 0 and len(rows(out.strip())) == 4


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mfccsweep.cli", "evaluate"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 1
    assert _error(proc.stderr)["type"] == "ConfigError"
