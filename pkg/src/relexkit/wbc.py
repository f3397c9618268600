"""Rule-based extraction by typed co-occurrence within a bounded window.

A type-compatible pair is predicted when both mentions share a sentence
(always, whatever the distance budget), or when the later mention sits in
the immediately following sentence with fewer than `rho` tokens between the
base sentence's last token and the mention's first token. The window never
extends past two sentences, so rho = 0 is strict intra-sentential
co-occurrence and growing rho only ever adds predictions.

Distance is counted in raw tokens (stopwords and punctuation included),
exclusive at both ends.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from . import textproc
from .candidates import iter_typed_pairs
from .corpus import Corpus, Document, Schema
from .errors import ConfigError

__all__ = [
    "WindowConfig",
    "PredictedRelation",
    "extract",
    "extract_corpus",
    "tune_rho",
    "prediction_key",
    "write_predictions",
    "read_predictions",
]

PairKey = tuple[str, str, str]  # (doc id, smaller mention id, larger mention id)


@dataclass(frozen=True)
class WindowConfig:
    rho: int
    schema: Schema

    def __post_init__(self):
        if self.rho < 0:
            raise ConfigError("rho must be >= 0")


@dataclass(frozen=True)
class PredictedRelation:
    relation: str
    doc_id: str
    left_mention: str
    right_mention: str
    window: tuple[int, int]
    rho: int

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "doc_id": self.doc_id,
            "left_mention": self.left_mention,
            "right_mention": self.right_mention,
            "window": list(self.window),
            "rho": self.rho,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PredictedRelation":
        return cls(
            relation=data["relation"], doc_id=data["doc_id"],
            left_mention=data["left_mention"], right_mention=data["right_mention"],
            window=tuple(data["window"]), rho=data["rho"])


def prediction_key(pred: PredictedRelation) -> PairKey:
    a, b = sorted((pred.left_mention, pred.right_mention))
    return (pred.doc_id, a, b)


def extract(
    document: Document,
    schema: Schema,
    rho: int,
    sentences=None,
) -> list[PredictedRelation]:
    """Predict every type-compatible pair within the rho-bounded window."""
    if rho < 0:
        raise ConfigError("rho must be >= 0")
    if sentences is None:
        sentences = textproc.analyze(document.text)
    seen: set[tuple[str, str, str]] = set()
    out: list[PredictedRelation] = []
    for pair in iter_typed_pairs(document, sentences, schema):
        if pair.cross_sentence:
            assert pair.token_gap is not None
            if pair.token_gap >= rho:
                continue
        key = (pair.relation, pair.left.id, pair.right.id)
        if key in seen:
            continue
        seen.add(key)
        out.append(PredictedRelation(
            relation=pair.relation,
            doc_id=document.id,
            left_mention=pair.left.id,
            right_mention=pair.right.id,
            window=(pair.sentence_left, pair.sentence_right),
            rho=rho,
        ))
    return out


def extract_corpus(corpus: Corpus, rho: int) -> list[PredictedRelation]:
    """Extract over all documents; output sorted by document and offsets."""
    out: list[PredictedRelation] = []
    for doc in corpus.documents:
        preds = extract(doc, corpus.schema, rho)
        mentions = {m.id: m for m in doc.mentions}
        preds.sort(key=lambda p: (
            mentions[p.left_mention].start, mentions[p.left_mention].end,
            mentions[p.right_mention].start, mentions[p.right_mention].end,
            p.relation))
        out.extend(preds)
    return out


def tune_rho(
    documents: Sequence[Document],
    schema: Schema,
    dev_gold: Mapping[str, set[PairKey]],
    candidates: Sequence[int] = (0, 5, 10),
    restrict: Mapping[str, set[PairKey]] | None = None,
) -> dict[str, int]:
    """Pick, per relation type, the candidate rho with the best dev F1.

    `dev_gold` maps relation name -> gold pair keys on the development
    split. When `restrict` is given, predictions are first intersected with
    that relation's candidate universe so rule-based and classifier modes
    score over the same keys. Ties break toward smaller rho; relations with
    no dev gold default to rho = 0 with a warning.
    """
    if not candidates:
        raise ConfigError("candidate rho list must be nonempty")
    ordered = sorted(set(candidates))

    predictions: dict[int, dict[str, set[PairKey]]] = {}
    for rho in ordered:
        per_rel: dict[str, set[PairKey]] = {}
        for doc in documents:
            for pred in extract(doc, schema, rho):
                per_rel.setdefault(pred.relation, set()).add(prediction_key(pred))
        predictions[rho] = per_rel

    chosen: dict[str, int] = {}
    for rel in schema.relations:
        gold = set(dev_gold.get(rel.name, ()))
        if not gold:
            warnings.warn(f"{rel.name}: no development gold; defaulting to rho=0")
            chosen[rel.name] = 0
            continue
        best_rho = ordered[0]
        best_f1 = -1.0
        for rho in ordered:
            preds = predictions[rho].get(rel.name, set())
            if restrict is not None:
                preds = preds & set(restrict.get(rel.name, ()))
            tp = len(preds & gold)
            fp = len(preds - gold)
            fn = len(gold - preds)
            denom = 2 * tp + fp + fn
            f1 = (2 * tp / denom) if denom else 0.0
            if f1 > best_f1:
                best_f1 = f1
                best_rho = rho
        chosen[rel.name] = best_rho
    return chosen


def write_predictions(preds: Sequence[PredictedRelation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pred in preds:
            fh.write(json.dumps(pred.to_json(), sort_keys=True) + "\n")


def read_predictions(path: str | Path) -> list[PredictedRelation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(PredictedRelation.from_json(json.loads(line)))
    return out
