"""Synthetic corpus + KB generator for the end-to-end benchmark.

Builds a world of subjects with known true child counts, renders templated
documents about them (plain counts, compositional splits, number terms,
ordinals, and distractor numbers), and writes a KB where a configurable
fraction of the seeds is deliberately one short of the truth. Gold
recognition tags come from the templates themselves, not from the labeling
rules under test.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from countquant.dsgen import COMP, COUNT, LabeledSentence, OTHER
from countquant.numlex import NumLexicon, preprocess_sentence, tokenize

WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six",
    7: "seven", 8: "eight", 9: "nine",
}
ORDINALS = {1: "first", 2: "second", 3: "third", 4: "fourth", 5: "fifth", 6: "sixth"}
NUMTERMS = {2: "twins", 3: "triplets", 4: "quadruplets", 5: "quintuplets"}

FIRST_NAMES = [
    "Avery", "Blake", "Casey", "Devon", "Ellis", "Flynn", "Gray", "Harper",
    "Indy", "Jules", "Kai", "Lane", "Morgan", "Noel", "Oakley", "Parker",
    "Quinn", "Reese", "Sage", "Tatum",
]


@dataclass
class SynthSentence:
    text: str
    # (surface, tag) pairs for tokens that are not O, in sentence order
    gold_mentions: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class SynthSubject:
    subject_id: str
    name: str
    true_count: int
    kb_count: int
    sentences: list[SynthSentence]

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


def _sentences_for(name: str, count: int, rng: random.Random) -> list[SynthSentence]:
    w = WORDS[count]
    child = "child" if count == 1 else "children"
    out = [
        SynthSentence(
            text=f"{name} has {w} {child} .",
            gold_mentions=[(w, COUNT)],
        )
    ]
    if count >= 2 and rng.random() < 0.7:
        a = rng.randint(1, count - 1)
        b = count - a
        sons = "son" if a == 1 else "sons"
        daughters = "daughter" if b == 1 else "daughters"
        out.append(
            SynthSentence(
                text=f"{name} raised {WORDS[a]} {sons} and {WORDS[b]} {daughters} .",
                gold_mentions=[(WORDS[a], COUNT), ("and", COMP), (WORDS[b], COUNT)],
            )
        )
    if count in NUMTERMS and rng.random() < 0.5:
        out.append(
            SynthSentence(
                text=f"{name} became known for raising {NUMTERMS[count]} .",
                gold_mentions=[(NUMTERMS[count], COUNT)],
            )
        )
    if count in ORDINALS and rng.random() < 0.4:
        year = rng.randint(1950, 2010)
        out.append(
            SynthSentence(
                text=f"The {ORDINALS[count]} child of {name} was born in {year} .",
                gold_mentions=[(ORDINALS[count], COUNT)],
            )
        )
    d = rng.randint(1, 9)
    books = "book" if d == 1 else "books"
    out.append(
        SynthSentence(text=f"{name} wrote {WORDS[d]} {books} during {rng.randint(1950, 2010)} .")
    )
    if rng.random() < 0.5:
        e = rng.randint(1, 9)
        awards = "award" if e == 1 else "awards"
        out.append(SynthSentence(text=f"{name} won {WORDS[e]} {awards} ."))
    rng.shuffle(out)
    return out


def generate_world(
    n_subjects: int = 500,
    non_maximal_fraction: float = 0.2,
    seed: int = 20250808,
) -> list[SynthSubject]:
    rng = random.Random(seed)
    subjects = []
    for i in range(n_subjects):
        subject_id = f"s{i:03d}"
        name = f"{rng.choice(FIRST_NAMES)}{i:03d}"
        true_count = rng.randint(1, 6)
        kb_count = true_count
        if true_count >= 2 and rng.random() < non_maximal_fraction:
            kb_count = true_count - 1
        subjects.append(
            SynthSubject(
                subject_id=subject_id,
                name=name,
                true_count=true_count,
                kb_count=kb_count,
                sentences=_sentences_for(name, true_count, rng),
            )
        )
    return subjects


def write_world(
    subjects: list[SynthSubject],
    root: Path,
    train_split: int,
) -> dict[str, Path]:
    """KB over all subjects; separate train/test corpora; gold counts for test."""
    kb_lines = []
    for s in subjects:
        kb_lines.append(f"{s.subject_id}\t__instance_of__\thuman")
        kb_lines.extend(
            f"{s.subject_id}\tchild\t{s.subject_id}_c{j}" for j in range(s.kb_count)
        )
    train, test = subjects[:train_split], subjects[train_split:]
    paths = {
        "kb": root / "kb.tsv",
        "train_corpus": root / "train_corpus.jsonl",
        "test_corpus": root / "test_corpus.jsonl",
        "gold": root / "gold.tsv",
    }
    paths["kb"].write_text("\n".join(kb_lines) + "\n", encoding="utf-8")
    paths["train_corpus"].write_text(
        "\n".join(json.dumps({"subject": s.subject_id, "text": s.text}) for s in train)
        + "\n",
        encoding="utf-8",
    )
    paths["test_corpus"].write_text(
        "\n".join(json.dumps({"subject": s.subject_id, "text": s.text}) for s in test)
        + "\n",
        encoding="utf-8",
    )
    paths["gold"].write_text(
        "\n".join(f"{s.subject_id}\t{s.true_count}" for s in test) + "\n",
        encoding="utf-8",
    )
    return paths


def gold_labeled_sentences(
    subject: SynthSubject, lexicon: NumLexicon
) -> list[LabeledSentence]:
    """Template-derived gold tags for every candidate-bearing sentence."""
    out = []
    for synth in subject.sentences:
        (raw,) = tokenize(synth.text)
        sentence = preprocess_sentence(raw, lexicon, mode="inference")
        if not sentence.mentions:
            continue
        tags = [OTHER] * len(sentence)
        queue = list(synth.gold_mentions)
        for tok in sentence:
            if queue and tok.surface.lower() == queue[0][0].lower():
                tags[tok.index] = queue[0][1]
                queue.pop(0)
        if queue:
            raise AssertionError(
                f"gold mention {queue[0]} not found in {synth.text!r}"
            )
        out.append(LabeledSentence(sentence=sentence, tags=tuple(tags), strict=False))
    return out
