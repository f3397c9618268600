"""Annotated-corpus data model, standoff reader/writer, synthetic generator.

The standoff dialect is line oriented: entity lines are
``T<id>\\t<TypeName> <start> <end>\\t<surface>`` and relation lines are
``R<id>\\t<RelName> Arg1:T<idA> Arg2:T<idB>``, with half-open character
offsets into the companion text file.

The synthetic generator stands in for a real clinical corpus. It builds
documents from sentence templates with typed entity slots and records the
ground-truth annotations; it is a pure function of (config, seed).
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

from . import textproc
from .errors import ConfigError, IntegrityError, ParseError, SchemaError

__all__ = [
    "EntityType",
    "RelationSchema",
    "Schema",
    "EntityMention",
    "RelationAnnotation",
    "Document",
    "Corpus",
    "load_standoff",
    "write_standoff",
    "load_corpus_dir",
    "write_corpus_dir",
    "RelationConfig",
    "GeneratorConfig",
    "generate_synthetic_corpus",
]


@dataclass(frozen=True)
class EntityType:
    name: str
    abbreviation: str


@dataclass(frozen=True)
class RelationSchema:
    """A typed binary relation; both argument slots admit a set of types."""

    name: str
    left: frozenset[str]
    right: frozenset[str]


@dataclass(frozen=True)
class Schema:
    entity_types: tuple[EntityType, ...]
    relations: tuple[RelationSchema, ...]

    def __post_init__(self):
        names = [t.name for t in self.entity_types]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate entity type names")
        abbrevs = [t.abbreviation.lower() for t in self.entity_types]
        if len(set(abbrevs)) != len(abbrevs):
            raise SchemaError("entity type abbreviations must be unique")
        if any(not t.name for t in self.entity_types):
            raise SchemaError("entity type names must be nonempty")
        rel_names = [r.name for r in self.relations]
        if len(set(rel_names)) != len(rel_names):
            raise SchemaError("duplicate relation names")
        known = set(names)
        for rel in self.relations:
            if not rel.left or not rel.right:
                raise ConfigError(f"relation {rel.name!r} has an empty argument type set")
            unknown = (set(rel.left) | set(rel.right)) - known
            if unknown:
                raise SchemaError(
                    f"relation {rel.name!r} references unknown types {sorted(unknown)}")

    def type_names(self) -> frozenset[str]:
        return frozenset(t.name for t in self.entity_types)

    def relation(self, name: str) -> RelationSchema:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "entity_types": [
                {"name": t.name, "abbreviation": t.abbreviation}
                for t in self.entity_types
            ],
            "relations": [
                {"name": r.name, "left": sorted(r.left), "right": sorted(r.right)}
                for r in self.relations
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Schema":
        return cls(
            entity_types=tuple(
                EntityType(t["name"], t["abbreviation"])
                for t in data["entity_types"]
            ),
            relations=tuple(
                RelationSchema(r["name"], frozenset(r["left"]), frozenset(r["right"]))
                for r in data["relations"]
            ),
        )


@dataclass(frozen=True)
class EntityMention:
    id: str
    type_name: str
    start: int
    end: int
    surface: str


@dataclass(frozen=True)
class RelationAnnotation:
    id: str
    relation: str
    left: str
    right: str


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    mentions: tuple[EntityMention, ...]
    relations: tuple[RelationAnnotation, ...]

    def mention_by_id(self, mention_id: str) -> EntityMention:
        for m in self.mentions:
            if m.id == mention_id:
                return m
        raise KeyError(mention_id)


@dataclass(frozen=True)
class Corpus:
    schema: Schema
    documents: tuple[Document, ...]

    def __post_init__(self):
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise IntegrityError("duplicate document ids in corpus")


def validate_document(doc: Document, schema: Schema) -> None:
    """Check span bounds, surface agreement, id uniqueness, and type-checks."""
    seen = set()
    for m in doc.mentions:
        if m.id in seen:
            raise IntegrityError(f"{doc.id}: duplicate mention id {m.id}")
        seen.add(m.id)
        if not (0 <= m.start < m.end <= len(doc.text)):
            raise IntegrityError(
                f"{doc.id}: mention {m.id} span ({m.start}, {m.end}) out of bounds")
        if doc.text[m.start:m.end] != m.surface:
            raise IntegrityError(
                f"{doc.id}: mention {m.id} surface does not match its span")
        if m.type_name not in schema.type_names():
            raise SchemaError(f"{doc.id}: unknown entity type {m.type_name!r}")
    by_id = {m.id: m for m in doc.mentions}
    rel_ids = set()
    for r in doc.relations:
        if r.id in rel_ids:
            raise IntegrityError(f"{doc.id}: duplicate relation id {r.id}")
        rel_ids.add(r.id)
        if r.left not in by_id or r.right not in by_id:
            raise IntegrityError(
                f"{doc.id}: relation {r.id} references an unknown mention id")
        try:
            rel = schema.relation(r.relation)
        except KeyError:
            raise SchemaError(f"{doc.id}: unknown relation type {r.relation!r}")
        if by_id[r.left].type_name not in rel.left or by_id[r.right].type_name not in rel.right:
            raise SchemaError(
                f"{doc.id}: relation {r.id} argument types do not satisfy "
                f"{r.relation}({sorted(rel.left)}, {sorted(rel.right)})")


_ENTITY_RE = re.compile(r"^(T\S+)\t(\S+) (\d+) (\d+)\t(.*)$")
_RELATION_RE = re.compile(r"^(R\S+)\t(\S+) Arg1:(T\S+) Arg2:(T\S+)\s*$")


def load_standoff(text_path: str | Path, ann_path: str | Path, schema: Schema) -> Document:
    """Read one text file plus its annotation file into a validated Document."""
    text_path = Path(text_path)
    text = text_path.read_text("utf-8")
    mentions: list[EntityMention] = []
    relations: list[RelationAnnotation] = []
    with open(ann_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("T"):
                m = _ENTITY_RE.match(line)
                if m is None:
                    raise ParseError("malformed entity line", str(ann_path), lineno)
                mentions.append(EntityMention(
                    id=m.group(1), type_name=m.group(2),
                    start=int(m.group(3)), end=int(m.group(4)),
                    surface=m.group(5)))
            elif line.startswith("R"):
                m = _RELATION_RE.match(line)
                if m is None:
                    raise ParseError("malformed relation line", str(ann_path), lineno)
                relations.append(RelationAnnotation(
                    id=m.group(1), relation=m.group(2),
                    left=m.group(3), right=m.group(4)))
            else:
                raise ParseError("unrecognized annotation line", str(ann_path), lineno)
    doc = Document(id=text_path.stem, text=text,
                   mentions=tuple(mentions), relations=tuple(relations))
    validate_document(doc, schema)
    return doc


def write_standoff(doc: Document) -> tuple[str, str]:
    """Render a Document back into (text content, annotation content)."""
    lines = [
        f"{m.id}\t{m.type_name} {m.start} {m.end}\t{m.surface}"
        for m in doc.mentions
    ]
    lines.extend(
        f"{r.id}\t{r.relation} Arg1:{r.left} Arg2:{r.right}"
        for r in doc.relations
    )
    ann = "\n".join(lines)
    if lines:
        ann += "\n"
    return doc.text, ann


def write_corpus_dir(corpus: Corpus, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "schema.json").write_text(
        json.dumps(corpus.schema.to_json(), indent=2, sort_keys=True) + "\n", "utf-8")
    for doc in corpus.documents:
        text, ann = write_standoff(doc)
        (directory / f"{doc.id}.txt").write_text(text, "utf-8")
        (directory / f"{doc.id}.ann").write_text(ann, "utf-8")


def load_corpus_dir(directory: str | Path, schema: Schema | None = None) -> Corpus:
    directory = Path(directory)
    if schema is None:
        schema_path = directory / "schema.json"
        if not schema_path.exists():
            raise ConfigError(f"no schema.json in {directory}")
        schema = Schema.from_json(json.loads(schema_path.read_text("utf-8")))
    docs = []
    for text_path in sorted(directory.glob("*.txt")):
        ann_path = text_path.with_suffix(".ann")
        if not ann_path.exists():
            raise ConfigError(f"missing annotation file for {text_path.name}")
        docs.append(load_standoff(text_path, ann_path, schema))
    return Corpus(schema=schema, documents=tuple(docs))


# --------------------------------------------------------------------------
# Synthetic corpus generation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationConfig:
    """Per-relation generation knobs.

    intra_fraction: probability a gold pair lands inside one sentence (the
    alternative is two adjacent sentences). instances_per_document: expected
    gold pairs per document (fractional part drawn as a Bernoulli).
    cross_gap_tokens: tokens placed before the second argument in the
    following sentence; must be >= 1 so the sentence starts with a word.
    """

    name: str
    left: tuple[str, ...]
    right: tuple[str, ...]
    intra_fraction: float = 1.0
    instances_per_document: float = 1.0
    cross_gap_tokens: int = 3


@dataclass(frozen=True)
class GeneratorConfig:
    documents: int
    entity_types: tuple[EntityType, ...]
    relations: tuple[RelationConfig, ...]
    distractor_density: float = 0.0
    filler_sentences: tuple[int, int] = (1, 2)
    seed: int = 0

    def __post_init__(self):
        if self.documents <= 0:
            raise ConfigError("documents must be positive")
        for rel in self.relations:
            if not rel.left or not rel.right:
                raise ConfigError(f"relation {rel.name!r} has an empty argument type set")
            if not 0.0 <= rel.intra_fraction <= 1.0:
                raise ConfigError(f"relation {rel.name!r}: intra_fraction must be in [0, 1]")
            if rel.instances_per_document < 0:
                raise ConfigError(f"relation {rel.name!r}: instances_per_document must be >= 0")
            if rel.cross_gap_tokens < 1:
                raise ConfigError(f"relation {rel.name!r}: cross_gap_tokens must be >= 1")
        if self.distractor_density < 0:
            raise ConfigError("distractor_density must be >= 0")
        lo, hi = self.filler_sentences
        if lo < 0 or hi < lo:
            raise ConfigError("filler_sentences must be a non-decreasing pair")

    def schema(self) -> Schema:
        return Schema(
            entity_types=self.entity_types,
            relations=tuple(
                RelationSchema(r.name, frozenset(r.left), frozenset(r.right))
                for r in self.relations
            ),
        )

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorConfig":
        return cls(
            documents=data["documents"],
            entity_types=tuple(
                EntityType(t["name"], t["abbreviation"]) for t in data["entity_types"]),
            relations=tuple(
                RelationConfig(
                    name=r["name"], left=tuple(r["left"]), right=tuple(r["right"]),
                    intra_fraction=r.get("intra_fraction", 1.0),
                    instances_per_document=r.get("instances_per_document", 1.0),
                    cross_gap_tokens=r.get("cross_gap_tokens", 3),
                ) for r in data["relations"]),
            distractor_density=data.get("distractor_density", 0.0),
            filler_sentences=tuple(data.get("filler_sentences", (1, 2))),
            seed=data.get("seed", 0),
        )

    def to_json(self) -> dict:
        return {
            "documents": self.documents,
            "entity_types": [
                {"name": t.name, "abbreviation": t.abbreviation}
                for t in self.entity_types],
            "relations": [
                {"name": r.name, "left": list(r.left), "right": list(r.right),
                 "intra_fraction": r.intra_fraction,
                 "instances_per_document": r.instances_per_document,
                 "cross_gap_tokens": r.cross_gap_tokens}
                for r in self.relations],
            "distractor_density": self.distractor_density,
            "filler_sentences": list(self.filler_sentences),
            "seed": self.seed,
        }


_SURFACE_SUFFIXES = ("arin", "exol", "omir", "ental", "uvex", "ostat")

_FILLER_WORDS = (
    "review", "clinic", "letter", "dose", "daily", "stable", "noted",
    "recorded", "plan", "therapy", "scan", "result", "normal", "mild",
    "repeat", "annual", "visit", "discussed", "ongoing", "reported",
    "routine", "interval", "baseline", "satisfactory", "unremarkable",
)

_FILLER_SENTENCES = (
    "She remains well overall.",
    "Plan for annual review continues.",
    "No new symptoms were reported today.",
    "Examination was unremarkable at this visit.",
    "The letter was copied to the general practitioner.",
)

_INTRA_PATTERNS = (
    ("Review confirmed", "L", "alongside", "R", "during the visit."),
    ("The letter records", "L", "together with", "R", "today."),
    ("Assessment noted", "L", "linked with", "R", "at follow-up."),
    ("Clinic notes describe", "L", "accompanying", "R", "without concern."),
)


class _Slot:
    __slots__ = ("key", "type_name", "surface")

    def __init__(self, key, type_name, surface):
        self.key = key
        self.type_name = type_name
        self.surface = surface


def _type_surfaces(entity_type: EntityType) -> list[str]:
    base = entity_type.abbreviation.lower()
    return [base + suffix for suffix in _SURFACE_SUFFIXES]


def _fractional_count(rng: random.Random, expected: float) -> int:
    whole = int(expected)
    frac = expected - whole
    return whole + (1 if rng.random() < frac else 0)


def generate_synthetic_corpus(config: GeneratorConfig) -> Corpus:
    """Deterministically generate a corpus from templates with typed slots.

    Positive pairs are placed in one sentence with probability
    ``intra_fraction``, otherwise across two adjacent sentences; distractor
    mentions of schema types are inserted without annotations. Sentences are
    rendered so the textproc splitter recovers exactly the generated
    boundaries, which is self-checked per document.
    """
    schema = config.schema()
    surfaces = {t.name: _type_surfaces(t) for t in config.entity_types}
    master = random.Random(config.seed)
    doc_seeds = [master.getrandbits(64) for _ in range(config.documents)]

    documents = []
    for doc_index in range(config.documents):
        rng = random.Random(doc_seeds[doc_index])
        doc_id = f"doc_{doc_index:04d}"
        groups: list[tuple[list[list[object]], list[tuple[str, str, str]]]] = []
        slot_counter = 0

        for rel in config.relations:
            n_positives = _fractional_count(rng, rel.instances_per_document)
            for _ in range(n_positives):
                lkey = f"s{slot_counter}"
                rkey = f"s{slot_counter + 1}"
                slot_counter += 2
                ltype = rng.choice(rel.left)
                rtype = rng.choice(rel.right)
                lslot = _Slot(lkey, ltype, rng.choice(surfaces[ltype]))
                rslot = _Slot(rkey, rtype, rng.choice(surfaces[rtype]))
                if rng.random() < rel.intra_fraction:
                    head, _, mid, _, tail = rng.choice(_INTRA_PATTERNS)
                    plan = head.split() + [lslot] + mid.split() + [rslot] + tail.split()
                    groups.append(([plan], [(rel.name, lkey, rkey)]))
                else:
                    first = "The".split() + [lslot] + "was reviewed in clinic.".split()
                    gap = [rng.choice(_FILLER_WORDS) for _ in range(rel.cross_gap_tokens)]
                    gap[0] = gap[0].capitalize()
                    second = gap + [rslot] + "was documented.".split()
                    groups.append(([first, second], [(rel.name, lkey, rkey)]))

        for _ in range(_fractional_count(rng, config.distractor_density)):
            n_types = rng.choice((1, 2))
            picked = [rng.choice(config.entity_types).name for _ in range(n_types)]
            plan: list[object] = "Routine notes mention".split()
            for i, type_name in enumerate(picked):
                key = f"s{slot_counter}"
                slot_counter += 1
                if i > 0:
                    plan.append("and")
                plan.append(_Slot(key, type_name, rng.choice(surfaces[type_name])))
            plan.extend("this visit.".split())
            groups.append(([plan], []))

        lo, hi = config.filler_sentences
        for _ in range(rng.randint(lo, hi)):
            groups.append(([rng.choice(_FILLER_SENTENCES).split()], []))

        rng.shuffle(groups)

        # render sentences, tracking slot offsets
        pieces: list[str] = []
        pos = 0
        slot_spans: dict[str, tuple[str, int, int, str]] = {}
        n_sentences = 0
        for plans, _ in groups:
            for plan in plans:
                words: list[str] = []
                wpos = pos
                for item in plan:
                    if words:
                        wpos += 1  # joining space
                    if isinstance(item, _Slot):
                        word = item.surface
                        slot_spans[item.key] = (
                            item.type_name, wpos, wpos + len(word), word)
                    else:
                        word = item
                    words.append(word)
                    wpos += len(word)
                sentence = " ".join(words)
                if not sentence.endswith("."):
                    sentence += "."
                    wpos += 1
                pieces.append(sentence)
                pos = wpos + 1  # inter-sentence space
                n_sentences += 1
        text = " ".join(pieces)

        # mention ids in offset order
        ordered = sorted(slot_spans.items(), key=lambda kv: (kv[1][1], kv[1][2]))
        mention_ids = {key: f"T{i + 1}" for i, (key, _) in enumerate(ordered)}
        mentions = tuple(
            EntityMention(mention_ids[key], type_name, start, end, surface)
            for key, (type_name, start, end, surface) in ordered
        )
        relations = []
        for _, rels in groups:
            for rel_name, lkey, rkey in rels:
                relations.append(RelationAnnotation(
                    f"R{len(relations) + 1}", rel_name,
                    mention_ids[lkey], mention_ids[rkey]))

        doc = Document(doc_id, text, mentions, tuple(relations))
        validate_document(doc, schema)
        if len(textproc.split_sentences(text)) != n_sentences:
            raise IntegrityError(
                f"{doc_id}: generated text failed the sentence-structure self-check")
        documents.append(doc)

    return Corpus(schema=schema, documents=tuple(documents))
