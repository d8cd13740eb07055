import json
from pathlib import Path

import pytest

from proofmine import Corpus, ingest

FIXTURES = Path(__file__).parent / "fixtures"
GOLDENS = FIXTURES / "goldens"
HINT = FIXTURES / "hint"

GOLDEN_SOURCES = {
    "ssr_bool": FIXTURES / "ssr_bool.v",
    "ssr_fintype": FIXTURES / "ssr_fintype.v",
    "ssr_nat": FIXTURES / "ssr_nat.v",
    "ssr_seq": FIXTURES / "ssr_seq.v",
    "matrix_nilpotent": FIXTURES / "matrix_nilpotent.v",
    "coqeal_inv": FIXTURES / "coqeal_inv.v",
    "nash_binary": FIXTURES / "nash_binary.v",
    "nash_general": FIXTURES / "nash_general.v",
    "jvm_fact": FIXTURES / "jvm_fact.v",
    "jvm_expt": FIXTURES / "jvm_expt.v",
}

HINT_LIBS = [
    ("bigop", HINT / "hint_bigop.v"),
    ("lists", HINT / "hint_lists.v"),
    ("games", HINT / "hint_games.v"),
    ("vm", HINT / "hint_vm.v"),
]


def load_golden(name: str) -> dict:
    return json.loads((GOLDENS / f"{name}.json").read_text())


def compare_with_golden(records, golden):
    """Match parsed records against per-lemma step/tactic/argument labels."""
    by_name = {r.name: r for r in records}
    expected_names = [entry["name"] for entry in golden["lemmas"]]
    assert sorted(by_name) == sorted(expected_names)
    for entry in golden["lemmas"]:
        record = by_name[entry["name"]]
        assert len(record.steps) == len(entry["steps"]), entry["name"]
        for step, want in zip(record.steps, entry["steps"]):
            got_tactics = [t.name for t in step.tactics]
            want_tactics = [t["name"] for t in want["tactics"]]
            assert got_tactics == want_tactics, (entry["name"], step.index)
            for tac, wtac in zip(step.tactics, want["tactics"]):
                got_args = [[a.text, a.kind.value] for a in tac.arguments]
                assert got_args == wtac["args"], (entry["name"], step.index, tac.name)
            if "subgoals_after" in want:
                assert step.subgoals_after == want["subgoals_after"], (entry["name"], step.index)


@pytest.fixture(scope="session")
def hint_corpus() -> Corpus:
    return ingest([p for _, p in HINT_LIBS], [t for t, _ in HINT_LIBS])


_STATEMENT_TEMPLATES = [
    "wrapq (stage{k} x) = wrapq x",
    "forall (a b : nat), plus{k} a b = plus{k} b a",
    "okq p -> okq (step{k} p)",
    "runq (load{k} u) = normq u",
    "idemq gadget{k}",
    "forall s, flat{k} s ++ tail{k} s = flat{k} s",
]

_PROOF_TEMPLATES = [
    "Proof. by case. Qed.",
    "Proof. by move=> a b; rewrite rew{k} comm{k}. Qed.",
    "Proof. elim: s => //= x s IH. by rewrite IH base{k}. Qed.",
    "Proof. intros. unfold gadget{k}. trivial. Qed.",
    "Proof. apply helper{k}. exists (probe x). by []. Qed.",
    "Proof. move => H; split; rewrite H use{k}. Qed.",
    "Proof. by rewrite !norm{k} /flat{k}. Qed.",
]


def random_library_source(rng, count: int, prefix: str) -> str:
    """Synthesizes a parseable library with `count` lemmas and varied vocabulary."""
    chunks = []
    for i in range(count):
        k = int(rng.integers(0, 7))
        statement = _STATEMENT_TEMPLATES[int(rng.integers(len(_STATEMENT_TEMPLATES)))]
        proof = _PROOF_TEMPLATES[int(rng.integers(len(_PROOF_TEMPLATES)))]
        chunks.append(
            f"Lemma {prefix}_{i:03d} : {statement.format(k=k)}.\n{proof.format(k=k)}\n")
    return "\n".join(chunks)


def random_corpus(rng, tmp_path, *, max_lemmas=12, libraries=2, tag_prefix="lib") -> Corpus:
    paths, tags = [], []
    for lib in range(libraries):
        count = int(rng.integers(2, max_lemmas + 1))
        source = random_library_source(rng, count, f"{tag_prefix}{lib}")
        path = tmp_path / f"{tag_prefix}{lib}_{rng.integers(1 << 30)}.v"
        path.write_text(source)
        paths.append(path)
        tags.append(f"{tag_prefix}{lib}")
    return ingest(paths, tags)


@pytest.fixture(scope="session")
def paper_corpus() -> Corpus:
    paths = [GOLDEN_SOURCES[k] for k in ("ssr_bool", "ssr_fintype", "ssr_nat", "ssr_seq")]
    tags = ["ssrbool", "fintype", "ssrnat", "seq"]
    return ingest(paths, tags)
