"""Consolidation of labeled mentions into one count per (subject, relation).

Input: decoded tag sequences plus per-position COUNT marginals for every
sentence of a subject's document. Three steps produce the final prediction:

1. mentions joined by COMP-tagged cues within a sentence are summed into a
   single composed mention (confidence = max over members);
2. per mention type, the best candidate is selected -- highest confidence
   for cardinals/number terms/articles (kept only strictly above the
   threshold), highest *value* for ordinals (threshold-exempt);
3. types are ranked cardinal > number term > ordinal > article and the best
   surviving type supplies the count.

Zero-count mentions compete as cardinals of value 0; on a confidence tie a
positive cardinal beats a zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .dsgen import COMP, COUNT, LabeledSentence
from .kbstore import Relation
from .numlex.types import MentionKind

# Final ranking of mention types (lower = preferred).
_KIND_RANK = {
    MentionKind.CARDINAL: 0,
    MentionKind.NUMTERM: 1,
    MentionKind.ORDINAL: 2,
    MentionKind.ARTICLE: 3,
}


@dataclass(frozen=True)
class CqCandidate:
    kind: MentionKind
    value: int
    confidence: float
    sentence_index: int
    token_index: int
    surface: str = ""
    composed: bool = False

    def sort_key(self) -> tuple:
        return (self.sentence_index, self.token_index)


@dataclass(frozen=True)
class CountingQuantifier:
    subject: str
    relation: Optional[Relation]
    count: int
    confidence: float
    provenance: tuple[CqCandidate, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "subject": self.subject,
            "relation": self.relation.label if self.relation else None,
            "count": self.count,
            "confidence": round(self.confidence, 6),
            "provenance": [
                {
                    "kind": c.kind.value,
                    "value": c.value,
                    "confidence": round(c.confidence, 6),
                    "sentence": c.sentence_index,
                    "token": c.token_index,
                    "surface": c.surface,
                    "composed": c.composed,
                }
                for c in self.provenance
            ],
        }


def extract_candidates(
    labeled: LabeledSentence, confidences: list[float], sentence_index: int
) -> list[CqCandidate]:
    """COUNT-tagged mentions of one sentence with their confidence scores."""
    candidates = []
    for tok, tag in zip(labeled.sentence, labeled.tags):
        if tag == COUNT and tok.mention is not None:
            candidates.append(
                CqCandidate(
                    kind=tok.mention.kind,
                    value=tok.mention.value,
                    confidence=float(confidences[tok.index]),
                    sentence_index=sentence_index,
                    token_index=tok.index,
                    surface=tok.surface,
                )
            )
    return candidates


def sum_compositional(
    candidates: list[CqCandidate], labeled: LabeledSentence
) -> list[CqCandidate]:
    """Merge mention chains linked by COMP-tagged cue tokens.

    Adjacent COUNT mentions belong to one chain when at least one token
    between them is tagged COMP. A merged mention takes the sum of the
    member values, the highest member confidence, and competes as a
    cardinal.
    """
    if len(candidates) < 2:
        return list(candidates)
    ordered = sorted(candidates, key=lambda c: c.token_index)
    chains: list[list[CqCandidate]] = [[ordered[0]]]
    for prev, cur in zip(ordered, ordered[1:]):
        between = range(prev.token_index + 1, cur.token_index)
        linked = any(labeled.tags[j] == COMP for j in between)
        if linked:
            chains[-1].append(cur)
        else:
            chains.append([cur])
    merged: list[CqCandidate] = []
    for chain in chains:
        if len(chain) == 1:
            merged.append(chain[0])
        else:
            best = max(range(len(chain)), key=lambda i: (chain[i].confidence, -i))
            merged.append(
                CqCandidate(
                    kind=MentionKind.CARDINAL,
                    value=sum(c.value for c in chain),
                    confidence=chain[best].confidence,
                    sentence_index=chain[0].sentence_index,
                    token_index=chain[0].token_index,
                    surface=" + ".join(c.surface for c in chain),
                    composed=True,
                )
            )
    return merged


def _pool_kind(candidate: CqCandidate) -> MentionKind:
    """Zero mentions and composed mentions compete in the cardinal pool."""
    if candidate.kind is MentionKind.ZERO or candidate.composed:
        return MentionKind.CARDINAL
    return candidate.kind


def select_per_type(
    candidates: list[CqCandidate], threshold: float
) -> dict[MentionKind, CqCandidate]:
    """Best candidate per mention type.

    Cardinals, number terms and articles keep their highest-confidence
    member if it is strictly above the threshold. Ordinals keep the highest
    value present, regardless of confidence. Ties break toward positive
    values, then earlier sentence/token positions.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    pools: dict[MentionKind, list[CqCandidate]] = {}
    for c in candidates:
        pools.setdefault(_pool_kind(c), []).append(c)

    selected: dict[MentionKind, CqCandidate] = {}
    for kind, pool in pools.items():
        if kind is MentionKind.ORDINAL:
            best = min(
                pool, key=lambda c: (-c.value, -c.confidence) + c.sort_key()
            )
            selected[kind] = best
            continue
        best = min(
            pool,
            key=lambda c: (-c.confidence, c.value == 0) + c.sort_key(),
        )
        if best.confidence > threshold:
            selected[kind] = best
    return selected


def rank_types(
    per_type: dict[MentionKind, CqCandidate],
    subject: str = "",
    relation: Optional[Relation] = None,
) -> Optional[CountingQuantifier]:
    """Pick the final prediction by type preference; None when nothing survived."""
    if not per_type:
        return None
    winner_kind = min(per_type, key=lambda k: _KIND_RANK[k])
    winner = per_type[winner_kind]
    provenance = tuple(
        per_type[k] for k in sorted(per_type, key=lambda k: _KIND_RANK[k])
    )
    return CountingQuantifier(
        subject=subject,
        relation=relation,
        count=winner.value,
        confidence=winner.confidence,
        provenance=provenance,
    )


def consolidate(
    subject: str,
    relation: Optional[Relation],
    labeled_sentences: list[LabeledSentence],
    confidences: list[list[float]],
    threshold: float = 0.1,
) -> Optional[CountingQuantifier]:
    """Full consolidation over all sentences of a subject's document.

    *confidences* holds, per sentence, the COUNT marginal for every token
    position. Deterministic: ties break toward earlier sentences/tokens.
    """
    pooled: list[CqCandidate] = []
    for idx, (labeled, conf) in enumerate(zip(labeled_sentences, confidences)):
        candidates = extract_candidates(labeled, conf, idx)
        pooled.extend(sum_compositional(candidates, labeled))
    return rank_types(select_per_type(pooled, threshold), subject, relation)
