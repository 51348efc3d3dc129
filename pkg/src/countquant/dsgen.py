"""Training-data generation from KB counts.

For every subject of a relation with at least one object, each sentence of
its document that contains a candidate mention is labeled against the KB
object count. Because KBs are incomplete, the count is only a lower bound,
so labeling is deliberately asymmetric:

* mention value == KB count            -> COUNT (positive seed)
* mention value <  KB count            -> O (negative)
* KB count < value <= relation bound   -> the whole sentence is dropped
  from the training set (the mention may well be the true count)
* value > relation bound               -> O (implausibly high for the
  relation, safe negative)

Runs of mentions joined by commas/"and" whose values sum to the KB count
become COUNT seeds with the cues tagged COMP. Sentences whose mention value
repeats across the document in near-identical contexts (low signature
entropy) are dropped as uninformative.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .kbstore import KbStore, Relation, count_percentile, popularity_percentile_cutoff
from .numlex import (
    NumLexicon,
    Sentence,
    TRAIN_MODE,
    is_comp_cue,
    preprocess_sentence,
    to_placeholder_sequence,
    tokenize,
)
from .numlex.types import MentionKind

COUNT = "COUNT"
COMP = "COMP"
OTHER = "O"

# Compositional seed matching: at most this many mentions per run, at most
# this many tokens between adjacent mentions (at least one being a cue).
MAX_RUN_MENTIONS = 4
MAX_RUN_GAP = 3


@dataclass(frozen=True)
class LabeledSentence:
    """Token sequence with one tag per token.

    ``strict`` enforces the gold tagging scheme (COUNT only on mentions,
    COMP only on cue tokens); model predictions are wrapped with
    ``strict=False`` since a decoder is free to violate the scheme.
    """

    sentence: Sentence
    tags: tuple[str, ...]
    subject: str = ""
    relation: Optional[Relation] = None
    strict: bool = True

    def __post_init__(self) -> None:
        if len(self.tags) != len(self.sentence):
            raise ValueError("one tag per token required")
        if not self.strict:
            return
        for tok, tag in zip(self.sentence, self.tags):
            if tag == COUNT and tok.mention is None:
                raise ValueError(f"COUNT on token {tok.surface!r} without a mention")
            if tag == COMP and not is_comp_cue(tok):
                raise ValueError(f"COMP on non-cue token {tok.surface!r}")

    def placeholder_sequence(self) -> list[str]:
        return to_placeholder_sequence(self.sentence)


@dataclass(frozen=True)
class Excluded:
    """A sentence dropped from training: some mention may be the true count."""

    sentence: Sentence
    reason: str = "mention above KB count within relation bound"


@dataclass(frozen=True)
class SeedPolicy:
    popularity_top_fraction: float = 1.0
    upper_bound_q: float = 0.99
    entropy_threshold: float = 0.5        # bits
    entropy_positives_only: bool = False
    train_special_terms_as_seeds: bool = True
    articles_as_seeds: bool = False       # fixed: articles are inference-only

    def __post_init__(self) -> None:
        if self.articles_as_seeds:
            raise ValueError("articles never serve as training seeds")


@dataclass
class GenerationStats:
    subjects: int = 0
    positives: int = 0
    negatives: int = 0
    excluded: int = 0
    entropy_dropped: int = 0
    warnings: list[str] = field(default_factory=list)

    def __add__(self, other: "GenerationStats") -> "GenerationStats":
        return GenerationStats(
            subjects=self.subjects + other.subjects,
            positives=self.positives + other.positives,
            negatives=self.negatives + other.negatives,
            excluded=self.excluded + other.excluded,
            entropy_dropped=self.entropy_dropped + other.entropy_dropped,
            warnings=self.warnings + other.warnings,
        )

    def summary(self) -> str:
        return (
            f"subjects={self.subjects} positives={self.positives} "
            f"negatives={self.negatives} excluded={self.excluded} "
            f"entropy_dropped={self.entropy_dropped}"
        )


def _seed_eligible(token, policy: SeedPolicy) -> bool:
    """Can this mention be labeled COUNT during training?"""
    kind = token.mention.kind
    if kind in (MentionKind.ARTICLE, MentionKind.ZERO):
        return False
    if kind is MentionKind.NUMTERM and not policy.train_special_terms_as_seeds:
        return False
    return True


def _find_composition_run(
    sentence: Sentence, candidates: list[int], kb_count: int
) -> tuple[list[int], list[int]]:
    """First run of mentions summing to kb_count with cues between them.

    *candidates* holds token indices of seed-eligible mentions not equal to
    kb_count on their own. Returns (mention token indices, cue token indices).
    """
    tokens = sentence.tokens
    for a in range(len(candidates)):
        for b in range(a + 1, min(a + MAX_RUN_MENTIONS, len(candidates))):
            run = candidates[a : b + 1]
            gaps_ok = True
            cue_positions: list[int] = []
            for left, right in zip(run, run[1:]):
                gap = list(range(left + 1, right))
                cues = [g for g in gap if is_comp_cue(tokens[g])]
                if not cues or len(gap) > MAX_RUN_GAP:
                    gaps_ok = False
                    break
                cue_positions.extend(cues)
            if not gaps_ok:
                continue
            if sum(tokens[i].mention.value for i in run) == kb_count:
                return run, cue_positions
    return [], []


def label_sentence(
    sentence: Sentence,
    kb_count: int,
    upper_bound: int,
    policy: SeedPolicy = SeedPolicy(),
) -> LabeledSentence | Excluded:
    """Label one mention-annotated sentence against the KB count.

    Returns an :class:`Excluded` marker when any mention falls strictly
    between the KB count and the relation upper bound; those sentences are
    kept out of training entirely rather than risking a false negative.
    """
    if kb_count < 1:
        raise ValueError("training subjects must have at least one object")

    mention_positions = [t.index for t in sentence.mentions]
    for i in mention_positions:
        value = sentence[i].mention.value
        if kb_count < value <= upper_bound:
            return Excluded(sentence=sentence)

    tags = [OTHER] * len(sentence)
    exact = [
        i
        for i in mention_positions
        if sentence[i].mention.value == kb_count and _seed_eligible(sentence[i], policy)
    ]
    for i in exact:
        tags[i] = COUNT

    run_pool = [
        i
        for i in mention_positions
        if i not in exact and _seed_eligible(sentence[i], policy)
    ]
    run, cues = _find_composition_run(sentence, run_pool, kb_count)
    for i in run:
        tags[i] = COUNT
    for i in cues:
        tags[i] = COMP

    return LabeledSentence(sentence=sentence, tags=tuple(tags))


def _context_signature(sentence: Sentence, position: int) -> tuple[str, ...]:
    lemmas = sentence.lemmas()
    def at(j: int) -> str:
        if j < 0:
            return "<BOS>"
        if j >= len(lemmas):
            return "<EOS>"
        return lemmas[j]
    return (at(position - 2), at(position - 1), at(position + 1), at(position + 2))


def number_entropy(document: list[Sentence], value: int) -> float:
    """Shannon entropy (bits) of the contexts in which *value* is mentioned.

    Context = the lemma bigrams left and right of each mention of the value
    across the document. A value that recurs in one and the same context has
    entropy 0; n distinct contexts give log2(n) bits.
    """
    if not document:
        raise ValueError("document must be non-empty")
    signatures = Counter(
        _context_signature(sent, tok.index)
        for sent in document
        for tok in sent.mentions
        if tok.mention.value == value
    )
    total = sum(signatures.values())
    if total == 0:
        return 0.0
    return -sum(
        (c / total) * math.log2(c / total) for c in signatures.values()
    ) or 0.0


def _value_occurrences(document: list[Sentence]) -> Counter:
    return Counter(
        tok.mention.value for sent in document for tok in sent.mentions
    )


def _low_entropy_values(
    document: list[Sentence], threshold: float
) -> set[int]:
    """Values mentioned more than once whose context entropy is below threshold."""
    occurrences = _value_occurrences(document)
    return {
        value
        for value, n in occurrences.items()
        if n > 1 and number_entropy(document, value) < threshold
    }


@dataclass(frozen=True)
class Corpus:
    """Pre-linked document collection: one text per subject entity."""

    documents: dict[str, str]

    @staticmethod
    def load(path: Path | str) -> "Corpus":
        docs: dict[str, str] = {}
        for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1
        ):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                docs[str(record["subject"])] = str(record["text"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
        return Corpus(documents=docs)

    def __contains__(self, subject: str) -> bool:
        return subject in self.documents

    def __getitem__(self, subject: str) -> str:
        return self.documents[subject]

    def subjects(self) -> list[str]:
        return sorted(self.documents)


def label_subject_document(
    text: str,
    kb_count: int,
    upper_bound: int,
    lexicon: NumLexicon,
    policy: SeedPolicy,
    subject: str = "",
    relation: Optional[Relation] = None,
) -> tuple[list[LabeledSentence], GenerationStats]:
    """Preprocess and label one subject's document (training mode)."""
    stats = GenerationStats(subjects=1)
    document = [
        preprocess_sentence(s, lexicon, mode=TRAIN_MODE) for s in tokenize(text)
    ]
    low_entropy = _low_entropy_values(document, policy.entropy_threshold)
    if policy.entropy_positives_only:
        low_entropy &= {kb_count}

    labeled: list[LabeledSentence] = []
    for sent in document:
        if not sent.mentions:
            continue
        if any(t.mention.value in low_entropy for t in sent.mentions):
            stats.entropy_dropped += 1
            continue
        outcome = label_sentence(sent, kb_count, upper_bound, policy)
        if isinstance(outcome, Excluded):
            stats.excluded += 1
            continue
        outcome = LabeledSentence(
            sentence=outcome.sentence,
            tags=outcome.tags,
            subject=subject,
            relation=relation,
        )
        if COUNT in outcome.tags:
            stats.positives += 1
        else:
            stats.negatives += 1
        labeled.append(outcome)
    return labeled, stats


def generate_training_set(
    store: KbStore,
    corpus: Corpus,
    rel: Relation,
    policy: SeedPolicy = SeedPolicy(),
    lexicon: Optional[NumLexicon] = None,
) -> tuple[list[LabeledSentence], GenerationStats]:
    """Labeled sentences for every qualifying subject of the relation.

    Deterministic: subjects are processed in sorted order and each document
    independently, so results do not depend on worker scheduling.
    """
    from .numlex import load_default_lexicon

    lexicon = lexicon or load_default_lexicon()
    upper_bound = count_percentile(store, rel, policy.upper_bound_q)
    keep = popularity_percentile_cutoff(store, rel, policy.popularity_top_fraction)

    all_labeled: list[LabeledSentence] = []
    stats = GenerationStats()
    for subject in store.relation_subjects(rel):
        if subject not in keep or subject not in corpus:
            continue
        kb_count = store.triple_count(subject, rel.property)
        labeled, doc_stats = label_subject_document(
            corpus[subject], kb_count, upper_bound, lexicon, policy,
            subject=subject, relation=rel,
        )
        all_labeled.extend(labeled)
        stats = stats + doc_stats
    if not all_labeled:
        stats.warnings.append(f"relation {rel.label}: empty training set")
    return all_labeled, stats


def write_conll(labeled: list[LabeledSentence], path: Path | str) -> None:
    """CoNLL-style TSV: surface<TAB>placeholder<TAB>tag, blank line between sentences."""
    lines: list[str] = []
    for ls in labeled:
        symbols = ls.placeholder_sequence()
        for tok, symbol, tag in zip(ls.sentence, symbols, ls.tags):
            lines.append(f"{tok.surface}\t{symbol}\t{tag}")
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")


def read_conll(path: Path | str) -> Iterator[tuple[list[str], list[str]]]:
    """Yield (placeholder sequence, tags) pairs from a training file."""
    symbols: list[str] = []
    tags: list[str] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            if symbols:
                yield symbols, tags
                symbols, tags = [], []
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 3 tab-separated columns")
        symbols.append(parts[1])
        tags.append(parts[2])
    if symbols:
        yield symbols, tags
