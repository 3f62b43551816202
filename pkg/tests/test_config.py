import pytest
import yaml
from hypothesis import given, settings, strategies as st

from mfccsweep.audio import AudioClip, write_wav
from mfccsweep.config import HarnessConfig, parse_manifest
from mfccsweep.exceptions import ConfigError, ManifestError


def test_defaults():
    cfg = HarnessConfig()
    assert cfg.svm.c == 1.0 and cfg.svm.gamma == 0.1
    assert cfg.eval.k == 10 and cfg.mfcc.num_filters == 80
    assert cfg.svm.standardize is True


def test_round_trip_is_canonical():
    text = HarnessConfig().dump()
    again = HarnessConfig.from_dict(yaml.safe_load(text))
    assert again.dump() == text
    assert again == HarnessConfig()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.sampled_from([10.0, 25.0, 30.0]), st.integers(0, 99),
       st.booleans(), st.integers(2, 10))
def test_round_trip_property(L, frame, seed, standardize, k):
    doc = {"mfcc": {"num_coefficients": L, "frame_length_ms": frame},
           "eval": {"seed": seed, "k": k}, "svm": {"standardize": standardize}}
    cfg = HarnessConfig.from_dict(doc)
    text = cfg.dump()
    assert HarnessConfig.from_dict(yaml.safe_load(text)).dump() == text


def test_load_file(tmp_path):
    p = tmp_path / "h.yaml"
    p.write_text("mfcc:\n  num_coefficients: 30\n  hop_length_ms: 5\n"
                 "ingest:\n  target_sample_rate: 8000\n")
    cfg = HarnessConfig.load(p)
    assert cfg.mfcc.num_coefficients == 30 and cfg.mfcc.sample_rate == 8000


@pytest.mark.parametrize("doc", [
    {"mfcc": {"num_coeficients": 13}},
    {"svmm": {}},
    {"svm": {"C": 1.0}},
    {"sweep": {"combinations": [{"name": "x", "hop": 5}]}},
])
def test_unknown_keys_rejected(doc):
    with pytest.raises(ConfigError, match="unknown"):
        HarnessConfig.from_dict(doc)


@pytest.mark.parametrize("doc", [
    {"mfcc": {"num_coefficients": 90}},
    {"svm": {"gamma": 0}},
    {"eval": {"k": 1}},
    {"sweep": {"axes": {"hop_length_ms": [10, 5]}}},
    {"sweep": {"axes": {"num_filters": [10]}}},
    {"sweep": {"combinations": [{"frame_length_ms": 25}]}},
    {"ingest": {"segment_seconds": -1}},
])
def test_invalid_values_rejected(doc):
    with pytest.raises(ConfigError):
        HarnessConfig.from_dict(doc)


def test_bad_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("mfcc: [unclosed\n")
    with pytest.raises(ConfigError):
        HarnessConfig.load(p)


# -- manifests ---------------------------------------------------------------

@pytest.fixture
def wavdir(tmp_path):
    import numpy as np
    for name in ("a", "b"):
        write_wav(tmp_path / f"{name}.wav", AudioClip(np.zeros(160), 16000))
    return tmp_path


def _manifest(d, text):
    p = d / "m.csv"
    p.write_text(text)
    return p


def test_two_valid_rows(wavdir):
    entries = parse_manifest(_manifest(wavdir, "id,path,label,group\na,a.wav,0,F\nb,b.wav,1,M\n"))
    assert [(e.id, e.label, e.group) for e in entries] == [("a", 0, "F"), ("b", 1, "M")]
    assert entries[0].path == wavdir / "a.wav"


def test_group_column_optional(wavdir):
    entries = parse_manifest(_manifest(wavdir, "id,path,label\na,a.wav,0\nb,b.wav,1\n"))
    assert [e.group for e in entries] == [None, None]


def test_bad_label_names_row(wavdir):
    with pytest.raises(ManifestError, match=r"m\.csv:3.*label"):
        parse_manifest(_manifest(wavdir, "id,path,label\na,a.wav,0\nb,b.wav,2\n"))


@pytest.mark.parametrize("text, match", [
    ("id,path,label\na,a.wav,0\na,b.wav,1\n", "duplicate"),
    ("id,path,label\na,missing.wav,0\n", "not found"),
    ("id,path\na,a.wav\n", "lacks"),
    ("id,path,label,extra\na,a.wav,0,x\n", "unexpected"),
    ("id,path,label\n,a.wav,0\n", "empty id"),
])
def test_manifest_errors(wavdir, text, match):
    with pytest.raises(ManifestError, match=match):
        parse_manifest(_manifest(wavdir, text))


def test_missing_manifest(tmp_path):
    with pytest.raises(ManifestError):
        parse_manifest(tmp_path / "nope.csv")
