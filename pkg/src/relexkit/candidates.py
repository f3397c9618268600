"""Typed entity-pair enumeration shared by the rule-based extractor and the
dataset builder, so both see exactly the same candidate universe: pairs of
type-compatible mentions within one sentence or in adjacent sentences.
"""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import Document, EntityMention, RelationSchema, Schema
from .textproc import Sentence

__all__ = ["CandidatePair", "iter_typed_pairs", "sentence_index_of"]


@dataclass(frozen=True)
class CandidatePair:
    """One type-compatible mention pair for one relation.

    `left`/`right` follow the schema's argument orientation; when both
    orientations type-check (symmetric signatures) the earlier-starting
    mention is the left argument. `token_gap` is the number of tokens
    strictly between the base sentence's last token and the second
    mention's first token; None for same-sentence pairs.
    """

    relation: str
    left: EntityMention
    right: EntityMention
    sentence_left: int
    sentence_right: int
    token_gap: int | None

    @property
    def cross_sentence(self) -> bool:
        return self.sentence_left != self.sentence_right


def sentence_index_of(mention: EntityMention, sentences: list[Sentence]) -> int | None:
    """Sentence containing the mention's start offset, or None."""
    for s in sentences:
        if s.start <= mention.start < s.end:
            return s.index
    return None


def _orient(rel: RelationSchema, first: EntityMention, second: EntityMention):
    """Orientation of an offset-ordered pair under the relation signature."""
    fwd = first.type_name in rel.left and second.type_name in rel.right
    rev = second.type_name in rel.left and first.type_name in rel.right
    if fwd:
        return first, second
    if rev:
        return second, first
    return None


def _first_covered_token(mention: EntityMention, sentence: Sentence) -> int:
    for idx, tok in enumerate(sentence.tokens):
        if tok.start < mention.end and tok.end > mention.start:
            return idx
    # mention sits in whitespace only; anchor before the first later token
    for idx, tok in enumerate(sentence.tokens):
        if tok.start >= mention.start:
            return idx
    return len(sentence.tokens)


def iter_typed_pairs(
    document: Document,
    sentences: list[Sentence],
    schema: Schema,
) -> list[CandidatePair]:
    """All candidate pairs in the document, in deterministic order.

    Order: sentence scope (same-sentence first per sentence index, then the
    adjacent scope), mention offsets, then schema relation order.
    """
    per_sentence: list[list[EntityMention]] = [[] for _ in sentences]
    for mention in document.mentions:
        idx = sentence_index_of(mention, sentences)
        if idx is not None:
            per_sentence[idx].append(mention)
    for bucket in per_sentence:
        bucket.sort(key=lambda m: (m.start, m.end, m.id))

    out: list[CandidatePair] = []
    for si in range(len(sentences)):
        here = per_sentence[si]
        for i in range(len(here)):
            for j in range(i + 1, len(here)):
                first, second = here[i], here[j]
                for rel in schema.relations:
                    oriented = _orient(rel, first, second)
                    if oriented is None:
                        continue
                    out.append(CandidatePair(
                        rel.name, oriented[0], oriented[1], si, si, None))
        if si + 1 < len(sentences):
            there = per_sentence[si + 1]
            for first in here:
                for second in there:
                    gap = _first_covered_token(second, sentences[si + 1])
                    for rel in schema.relations:
                        oriented = _orient(rel, first, second)
                        if oriented is None:
                            continue
                        out.append(CandidatePair(
                            rel.name, oriented[0], oriented[1], si, si + 1, gap))
    return out
