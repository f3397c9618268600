"""Featurizers for relation instances.

Sparse count features over lemmas (bag-of-words) or concept-mapped lemmas
(bag-of-concepts), dense sentence embeddings by TF-IDF-weighted average
pooling of word vectors, and the concatenation of the two. Spaces are fitted
on training instances and frozen; featurizing dev/test never adds columns,
unseen terms are dropped.
"""
from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import textproc
from .boc import ConceptMap, apply_concept_map
from .corpus import Document
from .embeddings import EmbeddingTable
from .errors import ConfigError
from .instancegen import RelationInstance

__all__ = [
    "KIND_BOW",
    "KIND_BOC",
    "KIND_SE",
    "KIND_BOC_SE",
    "FeatureSpace",
    "FeatureVector",
    "TfIdfModel",
    "fit_tfidf",
    "fit_space",
    "featurize",
    "featurize_matrix",
    "corpus_lemma_frequencies",
    "instance_lemma_frequencies",
]

KIND_BOW = "bow"
KIND_BOC = "boc"
KIND_SE = "se"
KIND_BOC_SE = "boc_se"

_SPARSE_KINDS = (KIND_BOW, KIND_BOC, KIND_BOC_SE)
_DENSE_KINDS = (KIND_SE, KIND_BOC_SE)
_ALL_KINDS = (KIND_BOW, KIND_BOC, KIND_SE, KIND_BOC_SE)


class TfIdfModel:
    """Raw term frequency times natural-log inverse document frequency.

    score(w, d) = tf(w, d) * ln(N / df(w)); a lemma never seen in the fitted
    documents, or a document id outside them, scores 0.
    """

    def __init__(self, n_documents: int, df: Mapping[str, int],
                 tf: Mapping[str, Mapping[str, int]]):
        if n_documents <= 0:
            raise ConfigError("TF-IDF needs a nonempty document set")
        self.n_documents = n_documents
        self.df = dict(df)
        self.tf = {doc_id: dict(counts) for doc_id, counts in tf.items()}

    def score(self, lemma: str, doc_id: str) -> float:
        df = self.df.get(lemma, 0)
        if df == 0:
            return 0.0
        tf = self.tf.get(doc_id, {}).get(lemma, 0)
        if tf == 0:
            return 0.0
        return tf * math.log(self.n_documents / df)


def fit_tfidf(documents: Sequence[Document], stopwords=None) -> TfIdfModel:
    """Fit document frequencies and per-document term frequencies."""
    if not documents:
        raise ConfigError("TF-IDF needs a nonempty document set")
    df: Counter[str] = Counter()
    tf: dict[str, Counter[str]] = {}
    for doc in documents:
        counts: Counter[str] = Counter()
        for sentence in textproc.analyze(doc.text, stopwords=stopwords):
            counts.update(sentence.content_lemmas())
        tf[doc.id] = counts
        df.update(counts.keys())
    return TfIdfModel(len(documents), df, tf)


def corpus_lemma_frequencies(documents: Sequence[Document], stopwords=None) -> Counter:
    """Content-lemma counts over whole documents (vocabulary-cap source)."""
    freqs: Counter[str] = Counter()
    for doc in documents:
        for sentence in textproc.analyze(doc.text, stopwords=stopwords):
            freqs.update(sentence.content_lemmas())
    return freqs


def instance_lemma_frequencies(
    instances: Iterable[RelationInstance],
    placeholders: frozenset[str] = frozenset(),
) -> Counter:
    """Lemma counts over instance contexts, excluding entity placeholders."""
    freqs: Counter[str] = Counter()
    for inst in instances:
        freqs.update(t for t in inst.context if t not in placeholders)
    return freqs


@dataclass(frozen=True)
class FeatureSpace:
    """Frozen featurization recipe: column index plus required resources."""

    kind: str
    columns: tuple[str, ...]
    dimension: int
    fitted_on: str = ""
    concept_map: ConceptMap | None = None
    embedding: EmbeddingTable | None = None
    placeholders: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.kind not in _ALL_KINDS:
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        if self.kind in (KIND_BOC, KIND_BOC_SE) and self.concept_map is None:
            raise ConfigError(f"{self.kind} requires a concept map")
        if self.kind in _DENSE_KINDS and self.embedding is None:
            raise ConfigError(f"{self.kind} requires an embedding table")

    @property
    def column_index(self) -> dict[str, int]:
        return {term: i for i, term in enumerate(self.columns)}

    @property
    def sparse_dimension(self) -> int:
        return len(self.columns)

    def space_hash(self) -> str:
        payload = {
            "kind": self.kind,
            "columns": list(self.columns),
            "dimension": self.dimension,
            "fitted_on": self.fitted_on,
            "mu": self.concept_map.mu if self.concept_map else None,
            "embedding_label": self.embedding.label if self.embedding else None,
            "placeholders": sorted(self.placeholders),
        }
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class FeatureVector:
    space: FeatureSpace
    indices: tuple[int, ...] | None = None
    counts: tuple[int, ...] | None = None
    dense: tuple[float, ...] | None = None

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return np.asarray(self.dense, dtype=np.float64)
        out = np.zeros(self.space.dimension, dtype=np.float64)
        if self.indices:
            out[list(self.indices)] = list(self.counts)
        return out


def _mapped_stream(instance: RelationInstance, space: FeatureSpace) -> list[str]:
    if space.kind in (KIND_BOC, KIND_BOC_SE):
        return apply_concept_map(space.concept_map, instance.context,
                                 space.placeholders)
    return list(instance.context)


def fit_space(
    instances: Sequence[RelationInstance],
    kind: str,
    concept_map: ConceptMap | None = None,
    embedding: EmbeddingTable | None = None,
    placeholders: frozenset[str] = frozenset(),
    fitted_on: str = "",
) -> FeatureSpace:
    """Fit a frozen feature space on training instances.

    Sparse kinds index every term observed after concept mapping (concept
    tokens, surviving lemmas, and entity placeholders), lexicographically.
    """
    probe = FeatureSpace(kind=kind, columns=(), dimension=0,
                         fitted_on=fitted_on, concept_map=concept_map,
                         embedding=embedding, placeholders=placeholders)
    columns: tuple[str, ...] = ()
    if kind in _SPARSE_KINDS:
        terms: set[str] = set()
        for inst in instances:
            terms.update(_mapped_stream(inst, probe))
        columns = tuple(sorted(terms))
    dimension = len(columns)
    if kind in _DENSE_KINDS:
        dimension += embedding.dimension
    return FeatureSpace(
        kind=kind, columns=columns, dimension=dimension, fitted_on=fitted_on,
        concept_map=concept_map, embedding=embedding, placeholders=placeholders)


def _sentence_embedding(
    instance: RelationInstance,
    space: FeatureSpace,
    tfidf: TfIdfModel,
) -> np.ndarray:
    """Mean over contributing tokens of vector(w) * tfidf_score(w).

    Contributing tokens are the in-vocabulary, non-placeholder lemmas of the
    context; out-of-vocabulary tokens and entity placeholders are ignored.
    An instance with no contributing tokens maps to the zero vector.
    """
    table = space.embedding
    total = np.zeros(table.dimension, dtype=np.float64)
    n = 0
    for token in instance.context:
        if token in space.placeholders or token not in table:
            continue
        weight = tfidf.score(token, instance.doc_id)
        total += table.vector(token).astype(np.float64) * weight
        n += 1
    if n == 0:
        return total
    return total / n


def featurize(
    instance: RelationInstance,
    space: FeatureSpace,
    tfidf: TfIdfModel | None = None,
) -> FeatureVector:
    """Featurize one instance against a frozen space.

    Terms unseen at fit time are dropped. Dense kinds require the TF-IDF
    model fitted on the training split's original documents.
    """
    if space.kind in _DENSE_KINDS and tfidf is None:
        raise ConfigError(f"{space.kind} featurization requires a TF-IDF model")
    if space.kind in (KIND_BOW, KIND_BOC):
        index = space.column_index
        counter = Counter(_mapped_stream(instance, space))
        pairs = sorted(
            (index[term], count) for term, count in counter.items() if term in index)
        return FeatureVector(
            space=space,
            indices=tuple(i for i, _ in pairs),
            counts=tuple(c for _, c in pairs),
        )
    if space.kind == KIND_SE:
        vec = _sentence_embedding(instance, space, tfidf)
        return FeatureVector(space=space, dense=tuple(float(v) for v in vec))
    # boc_se: sparse counts scattered into a dense prefix + pooled suffix
    index = space.column_index
    counter = Counter(_mapped_stream(instance, space))
    dense = np.zeros(space.dimension, dtype=np.float64)
    for term, count in counter.items():
        if term in index:
            dense[index[term]] = count
    dense[space.sparse_dimension:] = _sentence_embedding(instance, space, tfidf)
    return FeatureVector(space=space, dense=tuple(float(v) for v in dense))


def featurize_matrix(
    instances: Sequence[RelationInstance],
    space: FeatureSpace,
    tfidf: TfIdfModel | None = None,
) -> np.ndarray:
    """Dense (n, dimension) float64 matrix for model training."""
    out = np.zeros((len(instances), space.dimension), dtype=np.float64)
    for row, inst in enumerate(instances):
        out[row] = featurize(inst, space, tfidf).to_dense()
    return out
