"""Turn a manifest into an in-memory corpus of trimmed segments."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .audio import IngestConfig, ingest_clip, read_wav
from .config import ManifestEntry
from .sweep import Corpus, LabeledSegment


def ingest_entry(entry: ManifestEntry, cfg: IngestConfig) -> list[LabeledSegment]:
    clip = read_wav(entry.path, entry.id)
    return [LabeledSegment(seg.segment_id, seg.samples, seg.sample_rate, entry.label,
                           entry.group)
            for seg in ingest_clip(clip, cfg)]


def load_corpus(entries, cfg: IngestConfig = IngestConfig(), name: str = "dataset",
                jobs: int = 1) -> Corpus:
    """Decode, resample, segment and trim every clip, keeping manifest order."""
    entries = list(entries)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_clip = list(pool.map(lambda e: ingest_entry(e, cfg), entries))
    else:
        per_clip = [ingest_entry(e, cfg) for e in entries]
    return Corpus(name, [seg for segs in per_clip for seg in segs])
