import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_corpus():
    """40 synthetic clips ingested in memory."""
    from mfccsweep.audio import AudioClip, IngestConfig, ingest_clip
    from mfccsweep.sweep import Corpus, LabeledSegment
    from mfccsweep.synth import generate_corpus

    items = []
    for c in generate_corpus(40, seed=1):
        for s in ingest_clip(AudioClip(c.samples, c.sample_rate, c.clip_id), IngestConfig()):
            items.append(LabeledSegment(s.segment_id, s.samples, s.sample_rate, c.label,
                                        c.group))
    return Corpus("small", items)


@pytest.fixture(scope="session")
def small_manifest(tmp_path_factory):
    """40 synthetic clips written as WAV files plus a manifest."""
    from mfccsweep.synth import write_corpus

    return write_corpus(tmp_path_factory.mktemp("synth40"), n_clips=40, seed=1)


def pytest_terminal_summary(terminalreporter):
    from _acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
