"""Core token/sentence types shared by the whole pipeline.

Sentences are immutable: every preprocessing step returns a new ``Sentence``
with token indices re-assigned, so they can be passed freely between workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Optional


class MentionKind(enum.Enum):
    """Linguistic form of a numeric mention."""

    CARDINAL = "cardinal"
    ORDINAL = "ordinal"
    NUMTERM = "numterm"
    ARTICLE = "article"
    ZERO = "zero"


# Placeholder symbols substituted for mention tokens in CRF input sequences.
PLACEHOLDER_CARDINAL = "CARDINAL"
PLACEHOLDER_ORDINAL = "ORDINAL"
PLACEHOLDER_NUMTERM = "NUMTERM"

_BASE_PLACEHOLDER = {
    MentionKind.CARDINAL: PLACEHOLDER_CARDINAL,
    MentionKind.ORDINAL: PLACEHOLDER_ORDINAL,
    MentionKind.NUMTERM: PLACEHOLDER_NUMTERM,
    # Indefinite articles and zero cues surface as cardinals ("one" / "0").
    MentionKind.ARTICLE: PLACEHOLDER_CARDINAL,
    MentionKind.ZERO: PLACEHOLDER_CARDINAL,
}


@dataclass(frozen=True)
class MentionAnnotation:
    """Normalized numeric reading attached to a token.

    ``placeholder`` is the full symbol (``NUMTERM-plets`` for suffixed
    number terms); ``base_placeholder`` collapses it to the bare kind used
    in placeholder sequences.
    """

    kind: MentionKind
    value: int
    suffix_class: Optional[str] = None
    placeholder: str = ""

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f"mention value must be >= 0, got {self.value}")
        if self.kind is MentionKind.ARTICLE and self.value != 1:
            raise ValueError("article mentions always count one")
        if self.kind is MentionKind.ZERO and self.value != 0:
            raise ValueError("zero mentions always count zero")
        if self.kind is MentionKind.NUMTERM and self.value < 1:
            raise ValueError("number-term mentions decode to a value >= 1")
        if self.suffix_class is not None and self.kind is not MentionKind.NUMTERM:
            raise ValueError("suffix class only applies to number terms")
        if not self.placeholder:
            ph = _BASE_PLACEHOLDER[self.kind]
            if self.kind is MentionKind.NUMTERM and self.suffix_class:
                ph = f"{PLACEHOLDER_NUMTERM}{self.suffix_class}"
            object.__setattr__(self, "placeholder", ph)

    @property
    def base_placeholder(self) -> str:
        return _BASE_PLACEHOLDER[self.kind]


@dataclass(frozen=True)
class Token:
    """A single token: surface form, lowercased lemma, sentence position."""

    surface: str
    lemma: str
    index: int
    mention: Optional[MentionAnnotation] = None

    def with_mention(self, mention: MentionAnnotation) -> "Token":
        return replace(self, mention=mention)


@dataclass(frozen=True)
class Sentence:
    """An immutable tokenized sentence."""

    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        for i, tok in enumerate(self.tokens):
            if tok.index != i:
                raise ValueError(
                    f"token index {tok.index} at position {i}: indices must be 0..n-1"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]

    @property
    def mentions(self) -> tuple[Token, ...]:
        """Tokens carrying a mention annotation, in sentence order."""
        return tuple(t for t in self.tokens if t.mention is not None)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens]


def make_sentence(tokens: Iterable[Token]) -> Sentence:
    """Build a sentence, re-assigning indices to 0..n-1."""
    fixed = tuple(
        replace(tok, index=i) for i, tok in enumerate(tokens)
    )
    return Sentence(tokens=fixed)
