"""Numeric feature extraction: five proof steps become one 40-slot vector.

Per-step slots: (1) tactic-name codes folded into one decimal, (2) tactic
count, (3) argument-kind codes folded likewise, (4) argument relation code,
(5-7) the top three goal symbols, (8) subgoal fan-out (-1 when unknown).
Code 0 always means "absent/unknown".
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .script import ArgumentKind, LemmaRecord, ProofStep
from .terms import TermTree

PATCH_LEN = 5
SLOTS_PER_STEP = 8

# fixed codes for argument kinds; 0 doubles as the padding value
KIND_CODES: dict[ArgumentKind, int] = {
    ArgumentKind.WILDCARD: 0,
    ArgumentKind.HYPOTHESIS: 1,
    ArgumentKind.INDUCTIVE_HYPOTHESIS: 2,
    ArgumentKind.EXTERNAL_LEMMA: 3,
    ArgumentKind.NUMERIC_CONSTANT: 4,
    ArgumentKind.TERM_EXPR: 5,
    ArgumentKind.INTRO_PATTERN: 6,
}

_RELATED_KINDS = (ArgumentKind.HYPOTHESIS, ArgumentKind.EXTERNAL_LEMMA)
_MAX_FOLDED_ARGS = 6


class EmptyCorpus(ValueError):
    pass


class NoProofBody(ValueError):
    pass


@dataclass(frozen=True)
class EncodingTable:
    """Corpus-wide vocabulary codes, assigned lexicographically from 1."""

    tactic_codes: dict[str, int]
    symbol_codes: dict[str, int]
    kind_codes: dict[str, int] = field(
        default_factory=lambda: {k.value: v for k, v in KIND_CODES.items()})

    def tactic_code(self, name: str) -> int:
        return self.tactic_codes.get(name, 0)

    def symbol_code(self, symbol: str) -> int:
        return self.symbol_codes.get(symbol, 0)

    def version_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "tactic_codes": dict(self.tactic_codes),
            "symbol_codes": dict(self.symbol_codes),
            "kind_codes": dict(self.kind_codes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EncodingTable":
        return cls(
            tactic_codes=dict(data["tactic_codes"]),
            symbol_codes=dict(data["symbol_codes"]),
            kind_codes=dict(data["kind_codes"]),
        )


@dataclass(frozen=True)
class FeatureVector:
    """Raw slot values and their corpus-scaled counterparts."""

    raw: tuple[float, ...]
    scaled: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"raw": list(self.raw), "scaled": list(self.scaled)}

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureVector":
        return cls(tuple(data["raw"]), tuple(data["scaled"]))


@dataclass
class FeatureDatabase:
    """Fixed-order view of a corpus used by the clustering layer."""

    names: list[str]
    libraries: dict[str, str]
    matrix: np.ndarray  # scaled rows, aligned with names


def build_encoding_table(records: list[LemmaRecord]) -> EncodingTable:
    """Collect tactic and goal-symbol vocabularies over a whole corpus."""
    if not records:
        raise EmptyCorpus("cannot build an encoding table from an empty corpus")
    tactics: set[str] = set()
    symbols: set[str] = set()
    for record in records:
        symbols.update(node.symbol for node in record.statement.iter_nodes())
        for step in record.steps:
            for app in step.tactics:
                tactics.add(app.name)
            if step.goal_before is not None:
                symbols.update(node.symbol for node in step.goal_before.iter_nodes())
    return EncodingTable(
        tactic_codes={name: i for i, name in enumerate(sorted(tactics), start=1)},
        symbol_codes={sym: i for i, sym in enumerate(sorted(symbols), start=1)},
    )


def _decimal_fold(codes: list[int]) -> float:
    return float(sum(code * 10.0 ** (-pos) for pos, code in enumerate(codes)))


def _relation_code(kinds: list[ArgumentKind]) -> float:
    if any(k is ArgumentKind.INDUCTIVE_HYPOTHESIS for k in kinds):
        return 4.0
    related = [k for k in kinds if k in _RELATED_KINDS]
    if not related:
        return 0.0
    if all(k is ArgumentKind.HYPOTHESIS for k in related):
        return 1.0
    if all(k is ArgumentKind.EXTERNAL_LEMMA for k in related):
        return 2.0
    return 3.0


def encode_step(step: ProofStep, table: EncodingTable, statement: TermTree | None = None) -> tuple[float, ...]:
    """Eight slot values for one parsed step; unknown names map to code 0."""
    tactic_codes = [table.tactic_code(app.name) for app in step.tactics]
    args = [arg for app in step.tactics for arg in app.arguments]
    kinds = [arg.kind for arg in args]
    goal = step.goal_before
    if goal is None and step.index == 1:
        goal = statement
    if goal is not None:
        root, first, second = goal.top_symbols()
        s5 = float(table.symbol_code(root))
        s6 = float(table.symbol_code(first)) if first else 0.0
        s7 = float(table.symbol_code(second)) if second else 0.0
    else:
        s5 = s6 = s7 = 0.0
    subgoals = float(step.subgoals_after) if step.subgoals_after is not None else -1.0
    return (
        _decimal_fold(tactic_codes),
        float(len(step.tactics)),
        _decimal_fold([KIND_CODES[k] for k in kinds[:_MAX_FOLDED_ARGS]]),
        _relation_code(kinds),
        s5,
        s6,
        s7,
        subgoals,
    )


def extract_features(lemma: LemmaRecord, table: EncodingTable, patch_len: int = PATCH_LEN) -> tuple[float, ...]:
    """Concatenated step blocks for the first patch_len steps, zero-padded."""
    if not lemma.steps:
        raise NoProofBody(f"lemma {lemma.name} has no proof steps")
    blocks: list[float] = []
    for step in lemma.steps[:patch_len]:
        blocks.extend(encode_step(step, table, lemma.statement))
    missing = patch_len - min(len(lemma.steps), patch_len)
    blocks.extend([0.0] * (SLOTS_PER_STEP * missing))
    return tuple(blocks)


def min_max_scale(matrix: np.ndarray) -> np.ndarray:
    """Columnwise scale to [0, 1]; zero-range columns collapse to 0."""
    matrix = np.asarray(matrix, dtype=np.float64)
    mins = matrix.min(axis=0)
    spread = matrix.max(axis=0) - mins
    out = np.zeros_like(matrix)
    nonzero = spread > 0
    out[:, nonzero] = (matrix[:, nonzero] - mins[nonzero]) / spread[nonzero]
    return out


FEATURES_FORMAT = "proofmine features v1"


def write_feature_records(path: str | Path, names: list[str], libraries: dict[str, str],
                          vectors: dict[str, FeatureVector], table: EncodingTable) -> int:
    """Dump one JSON record per lemma ("proofmine features v1", JSON Lines)."""
    version = table.version_hash()
    out = Path(path)
    count = 0
    with out.open("w", encoding="utf-8") as handle:
        for name in names:
            vec = vectors[name]
            record = {
                "name": name,
                "library": libraries[name],
                "raw": list(vec.raw),
                "scaled": list(vec.scaled),
                "table_version": version,
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            count += 1
    return count


def read_feature_records(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
