"""Greedy synonym clustering of lemmas into shared concept tokens.

A concept map is built from an ordered lemma list L and an embedding
vocabulary V: walking L in order, each not-yet-mapped lemma with an
embedding becomes the seed of a new concept when at least one other
unmapped vocabulary lemma lies within cosine `mu` of it; the seed then
absorbs every such lemma in one step. Lemmas that attract nothing stay in
their original form, so every concept has at least two members and every
member is within `mu` of its seed. Absorption draws from the whole
(capped) embedding vocabulary, not just corpus lemmas, which is what lets
the features generalize to unseen synonyms.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingTable
from .errors import ConfigError

__all__ = [
    "ConceptMap",
    "build_concept_map",
    "apply_concept_map",
    "concept_stats",
    "ordered_lemma_list",
    "render_concept",
]


def render_concept(concept_id: int) -> str:
    return f"CONCEPT_{concept_id}"


@dataclass(frozen=True)
class ConceptMap:
    """Frozen lemma -> concept-id mapping with provenance."""

    mapping: Mapping[str, int]
    seeds: Mapping[int, str]
    mu: float
    embedding_label: str = ""
    build_order: tuple[str, ...] = ()

    def __post_init__(self):
        members: dict[int, list[str]] = {}
        for lemma, cid in self.mapping.items():
            members.setdefault(cid, []).append(lemma)
        for cid, lemmas in members.items():
            if len(lemmas) < 2:
                raise ConfigError(f"concept {cid} has fewer than two members")
            if cid not in self.seeds:
                raise ConfigError(f"concept {cid} has no seed")

    @property
    def concept_count(self) -> int:
        return len(self.seeds)

    def is_empty(self) -> bool:
        return not self.mapping

    def members(self, concept_id: int) -> list[str]:
        return sorted(l for l, c in self.mapping.items() if c == concept_id)

    def build_order_hash(self) -> str:
        payload = json.dumps(list(self.build_order)).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "embedding_label": self.embedding_label,
            "seeds": {str(cid): seed for cid, seed in sorted(self.seeds.items())},
            "members": {str(cid): self.members(cid) for cid in sorted(self.seeds)},
            "build_order_hash": self.build_order_hash(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConceptMap":
        mapping: dict[str, int] = {}
        for cid_str, lemmas in data["members"].items():
            for lemma in lemmas:
                mapping[lemma] = int(cid_str)
        return cls(
            mapping=mapping,
            seeds={int(cid): seed for cid, seed in data["seeds"].items()},
            mu=data["mu"],
            embedding_label=data.get("embedding_label", ""),
        )


def empty_concept_map(mu: float = 1.0, embedding_label: str = "") -> ConceptMap:
    return ConceptMap(mapping={}, seeds={}, mu=mu, embedding_label=embedding_label)


def ordered_lemma_list(frequencies: Mapping[str, int]) -> list[str]:
    """Deduplicated lemma list, descending frequency, ties lexicographic."""
    return [l for l, _ in sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0]))]


def build_concept_map(
    lemmas: Sequence[str],
    table: EmbeddingTable,
    mu: float,
) -> ConceptMap:
    """Run the greedy clustering over `lemmas` against vocabulary `table`.

    `lemmas` is processed in the given order (first occurrence wins for
    duplicates). Concept ids are allocated sequentially from 1. Lemmas
    without an embedding are left unmapped. mu must lie in (0, 1];
    mu = 1.0 maps nothing unless two vectors share a direction exactly,
    which degenerates the downstream features to plain bag-of-words.
    """
    if not (0.0 < mu <= 1.0):
        raise ConfigError(f"mu must be in (0, 1], got {mu}")

    order: list[str] = []
    seen: set[str] = set()
    for lemma in lemmas:
        if lemma not in seen:
            seen.add(lemma)
            order.append(lemma)

    mapping: dict[str, int] = {}
    seeds: dict[int, str] = {}
    next_id = 1
    vocab = table.lemmas()
    unmapped = np.ones(len(table), dtype=bool)
    unit = table.unit_matrix() if len(table) else None

    for lemma in order:
        if lemma in mapping:
            continue
        if lemma not in table:
            continue
        row = table.row(lemma)
        sims = unit @ unit[row]
        candidates = np.flatnonzero((sims >= mu) & unmapped)
        candidates = candidates[candidates != row]
        if candidates.size == 0:
            continue
        cid = next_id
        next_id += 1
        seeds[cid] = lemma
        mapping[lemma] = cid
        unmapped[row] = False
        for r in candidates:
            mapping[vocab[r]] = cid
            unmapped[r] = False

    return ConceptMap(
        mapping=mapping,
        seeds=seeds,
        mu=mu,
        embedding_label=table.label,
        build_order=tuple(order),
    )


def apply_concept_map(
    cmap: ConceptMap,
    stream: Iterable[str],
    placeholders: frozenset[str] = frozenset(),
) -> list[str]:
    """Replace mapped lemmas with their concept token, pass the rest through.

    Entity placeholders are never rewritten even if a same-spelled lemma got
    mapped.
    """
    out = []
    for token in stream:
        if token in placeholders:
            out.append(token)
        elif token in cmap.mapping:
            out.append(render_concept(cmap.mapping[token]))
        else:
            out.append(token)
    return out


def concept_stats(cmap: ConceptMap, top: int = 5) -> dict:
    """Deterministic summary for reports: counts, size histogram, largest."""
    sizes = {cid: len(cmap.members(cid)) for cid in cmap.seeds}
    histogram: dict[int, int] = {}
    for size in sizes.values():
        histogram[size] = histogram.get(size, 0) + 1
    largest = sorted(sizes.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    return {
        "concept_count": len(cmap.seeds),
        "mapped_lemma_count": len(cmap.mapping),
        "size_histogram": dict(sorted(histogram.items())),
        "largest_concepts": [
            {"concept": render_concept(cid), "seed": cmap.seeds[cid],
             "size": size, "members": cmap.members(cid)}
            for cid, size in largest
        ],
    }
