"""Turns an annotated corpus into per-relation binary classification datasets,
builds the three 6:1:3 train/dev/test partitions, and the nine nested
learning-curve fractions.

Positives are the gold pairs; negatives are every other type-compatible pair
in the same candidate scope (one sentence or two adjacent sentences), so the
rule-based and learned methods are compared over the same universe. Entity
argument surfaces are replaced with their type name as a single placeholder
token, kept verbatim through normalization. Gold pairs farther apart than
adjacent sentences are excluded and counted in the diagnostics.
"""
from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import textproc
from .candidates import CandidatePair, iter_typed_pairs
from .corpus import Corpus, Document
from .errors import ConfigError
from .textproc import Sentence

__all__ = [
    "RelationInstance",
    "RelationDataset",
    "SplitTriple",
    "BuildDiagnostics",
    "build_datasets",
    "make_splits",
    "learning_curve_fractions",
    "write_dataset",
    "read_dataset",
    "write_splits",
    "read_splits",
]


@dataclass(frozen=True)
class RelationInstance:
    instance_id: str
    relation: str
    doc_id: str
    left_mention: str
    right_mention: str
    context: tuple[str, ...]
    raw_context: str
    label: int
    cross_sentence: bool

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "relation": self.relation,
            "doc_id": self.doc_id,
            "left_mention": self.left_mention,
            "right_mention": self.right_mention,
            "context": list(self.context),
            "raw_context": self.raw_context,
            "label": self.label,
            "cross_sentence": self.cross_sentence,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RelationInstance":
        return cls(
            instance_id=data["instance_id"],
            relation=data["relation"],
            doc_id=data["doc_id"],
            left_mention=data["left_mention"],
            right_mention=data["right_mention"],
            context=tuple(data["context"]),
            raw_context=data["raw_context"],
            label=int(data["label"]),
            cross_sentence=bool(data["cross_sentence"]),
        )


@dataclass(frozen=True)
class RelationDataset:
    relation: str
    instances: tuple[RelationInstance, ...]
    provenance: str = ""

    def __post_init__(self):
        ids = [i.instance_id for i in self.instances]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"{self.relation}: duplicate instance ids")
        if any(i.relation != self.relation for i in self.instances):
            raise ConfigError(f"{self.relation}: mixed relation names in dataset")

    def by_id(self) -> dict[str, RelationInstance]:
        return {i.instance_id: i for i in self.instances}

    def positives(self) -> int:
        return sum(i.label for i in self.instances)


@dataclass(frozen=True)
class SplitTriple:
    split_id: int
    seed: int
    train: tuple[str, ...]
    dev: tuple[str, ...]
    test: tuple[str, ...]


@dataclass
class BuildDiagnostics:
    dropped_relations: dict[str, int] = field(default_factory=dict)
    out_of_scope_gold: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "dropped_relations": dict(sorted(self.dropped_relations.items())),
            "out_of_scope_gold": dict(sorted(self.out_of_scope_gold.items())),
        }


def build_datasets(
    corpus: Corpus,
    min_instance_count: int = 10,
    stopwords=None,
) -> tuple[list[RelationDataset], BuildDiagnostics]:
    """Build one binary dataset per relation type.

    Relation types with fewer than `min_instance_count` gold annotations are
    dropped and recorded in the diagnostics, as are gold pairs lying farther
    apart than adjacent sentences.
    """
    schema = corpus.schema
    diagnostics = BuildDiagnostics()

    gold_counts: dict[str, int] = {r.name: 0 for r in schema.relations}
    for doc in corpus.documents:
        for ann in doc.relations:
            gold_counts[ann.relation] += 1

    instances: dict[str, list[RelationInstance]] = {r.name: [] for r in schema.relations}
    matched_gold: dict[str, int] = {r.name: 0 for r in schema.relations}

    for doc in corpus.documents:
        sentences = textproc.analyze(doc.text, stopwords=stopwords)
        gold_pairs = {
            (ann.relation, frozenset((ann.left, ann.right)))
            for ann in doc.relations
        }
        seen_pairs: set[tuple[str, frozenset[str]]] = set()
        for pair in iter_typed_pairs(doc, sentences, schema):
            key = (pair.relation, frozenset((pair.left.id, pair.right.id)))
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            context, raw, cross = _pair_context(pair, sentences, doc)
            label = 1 if key in gold_pairs else 0
            if label:
                matched_gold[pair.relation] += 1
            instances[pair.relation].append(RelationInstance(
                instance_id=f"{pair.relation}|{doc.id}|{pair.left.id}|{pair.right.id}",
                relation=pair.relation,
                doc_id=doc.id,
                left_mention=pair.left.id,
                right_mention=pair.right.id,
                context=context,
                raw_context=raw,
                label=label,
                cross_sentence=cross,
            ))

    for rel in schema.relations:
        out_of_scope = gold_counts[rel.name] - matched_gold[rel.name]
        if out_of_scope:
            diagnostics.out_of_scope_gold[rel.name] = out_of_scope

    datasets = []
    digest = hashlib.sha256(json.dumps(
        [sorted(d.id for d in corpus.documents), min_instance_count]
    ).encode("utf-8")).hexdigest()[:16]
    for rel in schema.relations:
        if gold_counts[rel.name] < min_instance_count:
            diagnostics.dropped_relations[rel.name] = gold_counts[rel.name]
            continue
        datasets.append(RelationDataset(
            relation=rel.name,
            instances=tuple(instances[rel.name]),
            provenance=digest,
        ))
    return datasets, diagnostics


def _pair_context(
    pair: CandidatePair,
    sentences: list[Sentence],
    doc: Document,
) -> tuple[tuple[str, ...], str, bool]:
    si, sj = pair.sentence_left, pair.sentence_right
    scope = [sentences[si]] if si == sj else [sentences[si], sentences[sj]]
    tokens = [t for s in scope for t in s.tokens]

    ordered = sorted((pair.left, pair.right), key=lambda m: (m.start, m.end, m.id))
    covered: set[int] = set()
    anchors: dict[int, list[str]] = {}
    for mention in ordered:
        hit = [i for i, t in enumerate(tokens)
               if t.start < mention.end and t.end > mention.start]
        if hit:
            anchor = hit[0]
            covered.update(hit)
        else:
            anchor = next((i for i, t in enumerate(tokens)
                           if t.start >= mention.start), len(tokens))
        anchors.setdefault(anchor, []).append(mention.type_name)

    out: list[str] = []
    for idx, tok in enumerate(tokens):
        if idx in anchors:
            out.extend(anchors[idx])
        if idx in covered:
            continue
        if tok.is_punctuation or tok.is_stopword:
            continue
        out.append(tok.lemma)
    if len(tokens) in anchors:
        out.extend(anchors[len(tokens)])

    raw = " ".join(doc.text[s.start:s.end] for s in scope)
    return tuple(out), raw, si != sj


def make_splits(dataset: RelationDataset, seeds: Sequence[int]) -> list[SplitTriple]:
    """Three seeded 60/10/30 shuffle partitions; remainders go to train."""
    n = len(dataset.instances)
    if n < 10:
        raise ConfigError(
            f"{dataset.relation}: refusing to split {n} instances (< 10)")
    if len(seeds) != 3:
        raise ConfigError("exactly three split seeds are required")
    ids = [i.instance_id for i in dataset.instances]
    triples = []
    for split_id, seed in enumerate(seeds, start=1):
        shuffled = ids[:]
        random.Random(seed).shuffle(shuffled)
        # dev and test round to nearest; train absorbs the remainder, which
        # keeps every set within one instance of the exact 6:1:3 ratio
        n_test = round_half_up(3 * n / 10)
        n_dev = round_half_up(n / 10)
        test = shuffled[:n_test]
        dev = shuffled[n_test:n_test + n_dev]
        train = shuffled[n_test + n_dev:]
        triples.append(SplitTriple(
            split_id=split_id, seed=seed,
            train=tuple(sorted(train)),
            dev=tuple(sorted(dev)),
            test=tuple(sorted(test)),
        ))
    return triples


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def learning_curve_fractions(train_ids: Sequence[str], seed: int) -> list[tuple[str, ...]]:
    """Nine nested subsets at 10%..90% of the training set.

    One seeded shuffle; the k-th subset is the prefix of size
    round(k*n/10) (half-up), so each fraction contains all smaller ones.
    """
    if not train_ids:
        raise ConfigError("training set is empty")
    order = sorted(train_ids)
    random.Random(seed).shuffle(order)
    n = len(order)
    return [tuple(order[:round_half_up(k * n / 10)]) for k in range(1, 10)]


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def write_dataset(dataset: RelationDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in dataset.instances:
            fh.write(json.dumps(inst.to_json(), sort_keys=True) + "\n")


def read_dataset(path: str | Path, relation: str | None = None,
                 provenance: str = "") -> RelationDataset:
    instances = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                instances.append(RelationInstance.from_json(json.loads(line)))
    name = relation or (instances[0].relation if instances else Path(path).stem)
    return RelationDataset(relation=name, instances=tuple(instances),
                           provenance=provenance)


def write_splits(triples: Sequence[SplitTriple], path: str | Path) -> None:
    data = {
        "splits": [
            {"split_id": t.split_id, "seed": t.seed,
             "train": list(t.train), "dev": list(t.dev), "test": list(t.test)}
            for t in triples
        ]
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", "utf-8")


def read_splits(path: str | Path) -> list[SplitTriple]:
    data = json.loads(Path(path).read_text("utf-8"))
    return [
        SplitTriple(split_id=t["split_id"], seed=t["seed"],
                    train=tuple(t["train"]), dev=tuple(t["dev"]),
                    test=tuple(t["test"]))
        for t in data["splits"]
    ]
