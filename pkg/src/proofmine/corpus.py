"""Persistent corpora: parsed lemmas, the encoding table, and feature vectors.

A corpus file ("proofmine corpus v1") is a single JSON document carrying a
format tag, a sha256 checksum of the canonical payload, and the payload.
Ingesting new files rebuilds the encoding table over the merged vocabulary and
re-extracts every vector, so the stored features always match the table.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import (EncodingTable, FeatureDatabase, FeatureVector, build_encoding_table,
                       extract_features, min_max_scale, PATCH_LEN)
from .script import DuplicateLemmaName, LemmaRecord, looks_like_trace, parse_library, parse_trace

CORPUS_FORMAT = "proofmine corpus v1"
QUERY_NAME = "?query"


class VersionMismatch(ValueError):
    pass


class CorruptFile(ValueError):
    pass


@dataclass
class Corpus:
    libraries: dict[str, list[LemmaRecord]] = field(default_factory=dict)
    table: EncodingTable | None = None
    features: dict[str, FeatureVector] = field(default_factory=dict)
    version: str = CORPUS_FORMAT
    patch_len: int = PATCH_LEN

    def all_lemmas(self) -> list[LemmaRecord]:
        records = [r for records in self.libraries.values() for r in records]
        records.sort(key=lambda r: r.name)
        return records

    def lemma_count(self) -> int:
        return sum(len(records) for records in self.libraries.values())

    def library_tags(self) -> dict[str, str]:
        return {r.name: tag for tag, records in self.libraries.items() for r in records}

    def feature_database(self) -> FeatureDatabase:
        names = sorted(self.features)
        matrix = np.array([self.features[name].scaled for name in names], dtype=np.float64)
        return FeatureDatabase(names=names, libraries=self.library_tags(), matrix=matrix)


def _rebuild(libraries: dict[str, list[LemmaRecord]], patch_len: int) -> Corpus:
    records = [r for recs in libraries.values() for r in recs]
    table = build_encoding_table(records)
    names = [r.name for r in records]
    raws = np.array([extract_features(r, table, patch_len) for r in records], dtype=np.float64)
    scaled = min_max_scale(raws)
    features = {
        name: FeatureVector(tuple(float(v) for v in raws[i]), tuple(float(v) for v in scaled[i]))
        for i, name in enumerate(names)
    }
    ordered = {tag: list(libraries[tag]) for tag in sorted(libraries)}
    return Corpus(libraries=ordered, table=table, features=features, patch_len=patch_len)


def ingest(paths: list[str | Path], tags: list[str], corpus: Corpus | None = None, *,
           patch_len: int | None = None) -> Corpus:
    """Parse each file under its tag and return the enlarged corpus.

    Trace files carry their own per-record library field, which wins over the
    supplied tag.  Lemma names must stay unique across all libraries.
    """
    if corpus is None:
        corpus = Corpus()
    if len(paths) != len(tags):
        raise ValueError("paths and tags must be parallel lists")
    if any(not t for t in tags):
        raise ValueError("library tags must be non-empty")
    if patch_len is None:
        patch_len = corpus.patch_len
    if not paths:
        return corpus

    libraries: dict[str, list[LemmaRecord]] = {tag: list(recs) for tag, recs in corpus.libraries.items()}
    names = {r.name: r.library for recs in libraries.values() for r in recs}
    for path, tag in zip(paths, tags):
        path = Path(path)
        source = path.read_text(encoding="utf-8")
        if looks_like_trace(source):
            records = parse_trace(source, filename=str(path))
        else:
            records = parse_library(source, tag, filename=str(path))
        for record in records:
            if record.name in names:
                raise DuplicateLemmaName(
                    f"lemma {record.name} already ingested under library {names[record.name]!r}",
                    file=str(path))
            names[record.name] = record.library
            libraries.setdefault(record.library, []).append(record)
    return _rebuild(libraries, patch_len)


def database_with_query(corpus: Corpus, query: LemmaRecord) -> FeatureDatabase:
    """Corpus features plus one temporary query row, re-scaled together.

    Unknown query vocabulary encodes as 0; the query row is named QUERY_NAME.
    """
    if corpus.table is None:
        raise ValueError("corpus has no encoding table")
    names = sorted(corpus.features)
    raws = [corpus.features[name].raw for name in names]
    raws.append(extract_features(query, corpus.table, corpus.patch_len))
    matrix = min_max_scale(np.array(raws, dtype=np.float64))
    libraries = corpus.library_tags()
    libraries[QUERY_NAME] = query.library
    return FeatureDatabase(names=names + [QUERY_NAME], libraries=libraries, matrix=matrix)


# ---------------------------------------------------------------------------
# persistence


def _payload(corpus: Corpus) -> dict:
    return {
        "patch_len": corpus.patch_len,
        "libraries": {
            tag: [r.to_dict() for r in records]
            for tag, records in sorted(corpus.libraries.items())
        },
        "table": corpus.table.to_dict() if corpus.table else None,
        "features": {name: vec.to_dict() for name, vec in sorted(corpus.features.items())},
    }


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save(corpus: Corpus, path: str | Path) -> None:
    payload = _payload(corpus)
    checksum = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    doc = {"format": CORPUS_FORMAT, "checksum": checksum, "payload": payload}
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load(path: str | Path) -> Corpus:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"{path}: not parseable as JSON ({exc})") from exc
    if not isinstance(doc, dict) or "format" not in doc:
        raise CorruptFile(f"{path}: missing format header")
    if doc["format"] != CORPUS_FORMAT:
        raise VersionMismatch(f"{path}: expected {CORPUS_FORMAT!r}, found {doc['format']!r}")
    payload = doc.get("payload")
    if payload is None or "checksum" not in doc:
        raise CorruptFile(f"{path}: missing payload or checksum")
    checksum = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    if checksum != doc["checksum"]:
        raise CorruptFile(f"{path}: checksum mismatch")
    libraries = {
        tag: [LemmaRecord.from_dict(r) for r in records]
        for tag, records in payload["libraries"].items()
    }
    table = EncodingTable.from_dict(payload["table"]) if payload["table"] else None
    features = {name: FeatureVector.from_dict(vec) for name, vec in payload["features"].items()}
    return Corpus(
        libraries=libraries,
        table=table,
        features=features,
        patch_len=payload.get("patch_len", PATCH_LEN),
    )
