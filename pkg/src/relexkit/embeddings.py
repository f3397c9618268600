"""Pretrained word-vector tables: loading, vocabulary capping, similarity.

Vectors are stored in single precision; all similarity math accumulates in
double precision. Synonym lookup is an exhaustive scan over the table, which
is exact and deterministic and cheap at capped-vocabulary sizes.
"""
from __future__ import annotations

import warnings
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, ParseError

__all__ = [
    "EmbeddingTable",
    "load_vectors",
    "cap_vocabulary",
    "cosine",
    "synonyms",
]


class EmbeddingTable:
    """Immutable lemma -> vector table with lowercase keys."""

    def __init__(self, lemmas: Sequence[str], matrix: np.ndarray, label: str = ""):
        matrix = np.asarray(matrix, dtype=np.float32)
        if matrix.ndim != 2 or len(lemmas) != matrix.shape[0]:
            raise ConfigError("lemma list and matrix rows do not match")
        norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
        if np.any(norms == 0.0):
            raise ConfigError("zero-norm vectors are not admitted")
        if any(l != l.lower() for l in lemmas):
            raise ConfigError("lemma keys must be lowercase")
        self._lemmas = tuple(lemmas)
        self._matrix = matrix
        self._index = {l: i for i, l in enumerate(self._lemmas)}
        if len(self._index) != len(self._lemmas):
            raise ConfigError("duplicate lemma keys")
        self.label = label
        self.skipped_zero_norm = 0
        self._unit64: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    def __len__(self) -> int:
        return len(self._lemmas)

    def __contains__(self, lemma: str) -> bool:
        return lemma in self._index

    def lemmas(self) -> tuple[str, ...]:
        return self._lemmas

    def row(self, lemma: str) -> int:
        return self._index[lemma]

    def vector(self, lemma: str) -> np.ndarray:
        return self._matrix[self._index[lemma]]

    def unit_matrix(self) -> np.ndarray:
        """Row-normalized float64 view, cached; used by all query paths."""
        if self._unit64 is None:
            m = self._matrix.astype(np.float64)
            self._unit64 = m / np.linalg.norm(m, axis=1, keepdims=True)
        return self._unit64

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[float]], label: str = "") -> "EmbeddingTable":
        lemmas = list(mapping.keys())
        matrix = np.array([list(mapping[l]) for l in lemmas], dtype=np.float32)
        return cls(lemmas, matrix, label)

    def write(self, path: str | Path) -> None:
        """Write in text vector format with a `<count> <dim>` header line."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self)} {self.dimension}\n")
            for lemma, row in zip(self._lemmas, self._matrix):
                values = " ".join(repr(float(v)) for v in row)
                fh.write(f"{lemma} {values}\n")


def load_vectors(
    path: str | Path,
    expected_dimension: int | None = None,
    label: str | None = None,
) -> EmbeddingTable:
    """Load a text vector file: one `<token> <f1> ... <fD>` entry per line.

    An optional single `<count> <dim>` header line is detected and skipped.
    Tokens are lowercased; duplicates keep the first occurrence; zero-norm
    rows are skipped and counted.
    """
    path = Path(path)
    lemmas: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dim = expected_dimension
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            fields = raw.rstrip("\n").split(" ")
            fields = [f for f in fields if f]
            if not fields:
                continue
            if lineno == 1 and len(fields) == 2:
                try:
                    count, header_dim = int(fields[0]), int(fields[1])
                except ValueError:
                    pass
                else:
                    if count > 0 and header_dim > 0:
                        if expected_dimension is not None and header_dim != expected_dimension:
                            raise ParseError(
                                f"header dimension {header_dim} != expected {expected_dimension}",
                                str(path), lineno)
                        dim = dim or header_dim
                        continue
            token = fields[0].lower()
            values = fields[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim:
                raise ParseError(
                    f"expected {dim} values, found {len(values)}", str(path), lineno)
            try:
                vec = np.array([float(v) for v in values], dtype=np.float32)
            except ValueError:
                raise ParseError("non-numeric vector field", str(path), lineno)
            if token in seen:
                continue
            if float(np.linalg.norm(vec.astype(np.float64))) == 0.0:
                skipped += 1
                continue
            seen.add(token)
            lemmas.append(token)
            rows.append(vec)
    if not rows:
        raise ParseError("no vectors found", str(path))
    table = EmbeddingTable(lemmas, np.vstack(rows),
                           label=label if label is not None else path.stem)
    table.skipped_zero_norm = skipped
    if skipped:
        warnings.warn(f"{path}: skipped {skipped} zero-norm vector(s)")
    return table


def cap_vocabulary(
    table: EmbeddingTable,
    frequencies: Mapping[str, int],
    max_size: int = 20000,
) -> EmbeddingTable:
    """Keep only table entries among the `max_size` most frequent corpus lemmas.

    Ranking is by descending frequency with lexicographic tie-breaking; the
    cap applies to the corpus ranking before intersecting with the table, so
    high-frequency lemmas missing from the table still consume cap slots.
    """
    if max_size <= 0:
        raise ConfigError("max_size must be positive")
    ranked = sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0]))[:max_size]
    kept = [lemma for lemma, _ in ranked if lemma in table]
    if len(kept) == len(table):
        return table
    matrix = np.vstack([table.vector(l) for l in kept]) if kept else \
        np.zeros((0, table.dimension), dtype=np.float32)
    capped = EmbeddingTable(kept, matrix, label=table.label) if kept else \
        _empty_like(table)
    return capped


def _empty_like(table: EmbeddingTable) -> EmbeddingTable:
    out = EmbeddingTable.__new__(EmbeddingTable)
    out._lemmas = ()
    out._matrix = np.zeros((0, table.dimension), dtype=np.float32)
    out._index = {}
    out.label = table.label
    out.skipped_zero_norm = 0
    out._unit64 = None
    return out


def cosine(u, v) -> float:
    """Cosine similarity with double-precision accumulation."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine is undefined for zero-norm vectors")
    return float(np.dot(u, v) / (nu * nv))


def synonyms(table: EmbeddingTable, lemma: str, mu: float) -> list[tuple[str, float]]:
    """All table lemmas with cosine >= mu to `lemma`, most similar first.

    Exhaustive scan; the query itself is excluded; ties order
    lexicographically. Raises KeyError when the lemma is absent.
    """
    if lemma not in table:
        raise KeyError(lemma)
    unit = table.unit_matrix()
    sims = unit @ unit[table.row(lemma)]
    out = [
        (other, float(sims[i]))
        for i, other in enumerate(table.lemmas())
        if other != lemma and sims[i] >= mu
    ]
    out.sort(key=lambda pair: (-pair[1], pair[0]))
    return out
