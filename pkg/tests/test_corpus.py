import pytest

from relexkit import textproc
from relexkit.corpus import (
    Corpus,
    Document,
    EntityMention,
    EntityType,
    GeneratorConfig,
    RelationAnnotation,
    RelationConfig,
    RelationSchema,
    Schema,
    generate_synthetic_corpus,
    load_corpus_dir,
    load_standoff,
    write_corpus_dir,
    write_standoff,
)
from relexkit.errors import ConfigError, IntegrityError, ParseError, SchemaError


@pytest.fixture
def therapy_schema():
    return Schema(
        entity_types=(
            EntityType("TimeDescriptor", "TD"),
            EntityType("EndocrineTherapy", "ET"),
        ),
        relations=(
            RelationSchema("TherapyTiming",
                           frozenset({"TimeDescriptor"}),
                           frozenset({"EndocrineTherapy"})),
        ),
    )


SAMPLE_TEXT = "She remains on Arimidex tablets."
SAMPLE_ANN = (
    "T1\tTimeDescriptor 4 14\tremains on\n"
    "T2\tEndocrineTherapy 15 23\tArimidex\n"
    "R1\tTherapyTiming Arg1:T1 Arg2:T2\n"
)


def _write_pair(tmp_path, text, ann, stem="doc_0001"):
    text_path = tmp_path / f"{stem}.txt"
    ann_path = tmp_path / f"{stem}.ann"
    text_path.write_text(text, "utf-8")
    ann_path.write_text(ann, "utf-8")
    return text_path, ann_path


class TestLoadStandoff:
    def test_sample_document(self, tmp_path, therapy_schema):
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, SAMPLE_ANN)
        doc = load_standoff(text_path, ann_path, therapy_schema)
        assert len(doc.mentions) == 2
        assert len(doc.relations) == 1
        assert doc.mentions[0].surface == "remains on"
        assert doc.mentions[1].type_name == "EndocrineTherapy"
        assert doc.relations[0].relation == "TherapyTiming"

    def test_empty_annotation_file(self, tmp_path, therapy_schema):
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, "")
        doc = load_standoff(text_path, ann_path, therapy_schema)
        assert doc.text == SAMPLE_TEXT
        assert doc.mentions == () and doc.relations == ()

    def test_span_out_of_bounds(self, tmp_path, therapy_schema):
        ann = "T1\tTimeDescriptor 4 99\tremains on\n"
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, ann)
        with pytest.raises(IntegrityError):
            load_standoff(text_path, ann_path, therapy_schema)

    def test_malformed_line_names_line_number(self, tmp_path, therapy_schema):
        ann = "T1\tTimeDescriptor 4 14\tremains on\nTbroken line\n"
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, ann)
        with pytest.raises(ParseError) as err:
            load_standoff(text_path, ann_path, therapy_schema)
        assert err.value.line == 2

    def test_unknown_mention_reference(self, tmp_path, therapy_schema):
        ann = SAMPLE_ANN + "R2\tTherapyTiming Arg1:T1 Arg2:T9\n"
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, ann)
        with pytest.raises(IntegrityError):
            load_standoff(text_path, ann_path, therapy_schema)

    def test_type_mismatch_is_schema_error(self, tmp_path, therapy_schema):
        ann = (
            "T1\tTimeDescriptor 4 14\tremains on\n"
            "T2\tEndocrineTherapy 15 23\tArimidex\n"
            "R1\tTherapyTiming Arg1:T2 Arg2:T1\n"
        )
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, ann)
        with pytest.raises(SchemaError):
            load_standoff(text_path, ann_path, therapy_schema)

    def test_surface_mismatch(self, tmp_path, therapy_schema):
        ann = "T1\tTimeDescriptor 4 14\twrong text!\n"
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, ann)
        with pytest.raises(IntegrityError):
            load_standoff(text_path, ann_path, therapy_schema)


class TestWriteStandoff:
    def test_round_trip(self, tmp_path, therapy_schema):
        text_path, ann_path = _write_pair(tmp_path, SAMPLE_TEXT, SAMPLE_ANN)
        doc = load_standoff(text_path, ann_path, therapy_schema)
        text, ann = write_standoff(doc)
        assert text == SAMPLE_TEXT
        assert ann == SAMPLE_ANN
        text_path2, ann_path2 = _write_pair(tmp_path, text, ann, stem="doc_0001b")
        doc2 = load_standoff(text_path2, ann_path2, therapy_schema)
        assert doc2.mentions == doc.mentions
        assert doc2.relations == doc.relations

    def test_no_annotations_gives_empty_content(self):
        doc = Document("d", "Nothing here.", (), ())
        _, ann = write_standoff(doc)
        assert ann == ""

    def test_overlapping_mentions_round_trip(self, tmp_path, therapy_schema):
        text = "She remains on Arimidex tablets."
        doc = Document(
            "doc_0002", text,
            mentions=(
                EntityMention("T1", "TimeDescriptor", 4, 14, "remains on"),
                EntityMention("T2", "TimeDescriptor", 4, 11, "remains"),
            ),
            relations=(),
        )
        text_out, ann_out = write_standoff(doc)
        text_path, ann_path = _write_pair(tmp_path, text_out, ann_out, stem="doc_0002")
        doc2 = load_standoff(text_path, ann_path, therapy_schema)
        assert doc2 == doc


@pytest.fixture
def small_gen_config():
    return GeneratorConfig(
        documents=50,
        entity_types=(
            EntityType("TimeDescriptor", "TD"),
            EntityType("EndocrineTherapy", "ET"),
        ),
        relations=(
            RelationConfig("TherapyTiming", ("TimeDescriptor",),
                           ("EndocrineTherapy",), intra_fraction=1.0),
        ),
        seed=7,
    )


class TestGenerator:
    def test_intra_fraction_one_puts_pairs_in_one_sentence(self, small_gen_config):
        corpus = generate_synthetic_corpus(small_gen_config)
        assert len(corpus.documents) == 50
        total = 0
        for doc in corpus.documents:
            spans = textproc.split_sentences(doc.text)

            def sent_of(mention):
                for k, (a, b) in enumerate(spans):
                    if a <= mention.start < b:
                        return k
                raise AssertionError("mention outside any sentence")

            for rel in doc.relations:
                left = doc.mention_by_id(rel.left)
                right = doc.mention_by_id(rel.right)
                assert sent_of(left) == sent_of(right)
                total += 1
        assert total > 0

    def test_determinism(self, small_gen_config):
        c1 = generate_synthetic_corpus(small_gen_config)
        c2 = generate_synthetic_corpus(small_gen_config)
        assert c1 == c2

    def test_mixed_config_annotation_count_near_expectation(self):
        # expectation computed from the config: sum over relations of
        # documents * instances_per_document
        types = tuple(EntityType(f"Type{i}", f"Y{i}") for i in range(6))
        relations = []
        ipds = [0.6, 0.8, 1.0, 1.1, 1.3, 0.9, 1.2, 0.7, 1.0, 1.4, 0.5, 1.0]
        for i, ipd in enumerate(ipds):
            left = types[i % 6].name
            right = types[(i + 1) % 6].name
            relations.append(RelationConfig(
                f"Rel{i}", (left,), (right,),
                intra_fraction=0.5 + 0.04 * (i % 5),
                instances_per_document=ipd))
        config = GeneratorConfig(
            documents=200, entity_types=types, relations=tuple(relations),
            distractor_density=0.5, seed=1)
        expected = sum(200 * r.instances_per_document for r in config.relations)
        corpus = generate_synthetic_corpus(config)
        actual = sum(len(d.relations) for d in corpus.documents)
        assert abs(actual - expected) <= 0.10 * expected

    def test_empty_arg_type_set_is_config_error(self):
        with pytest.raises(ConfigError):
            GeneratorConfig(
                documents=5,
                entity_types=(EntityType("A", "A"),),
                relations=(RelationConfig("R", (), ("A",)),),
            )

    def test_generated_corpus_validates_and_round_trips(self, tmp_path, small_gen_config):
        corpus = generate_synthetic_corpus(small_gen_config)
        write_corpus_dir(corpus, tmp_path / "corpus")
        loaded = load_corpus_dir(tmp_path / "corpus")
        assert loaded.schema == corpus.schema
        assert loaded.documents == corpus.documents

    def test_config_json_round_trip(self, small_gen_config):
        data = small_gen_config.to_json()
        assert GeneratorConfig.from_json(data) == small_gen_config


class TestSchemaValidation:
    def test_duplicate_abbreviations_rejected(self):
        with pytest.raises(SchemaError):
            Schema(
                entity_types=(EntityType("A", "X"), EntityType("B", "x")),
                relations=(),
            )

    def test_relation_with_unknown_type_rejected(self):
        with pytest.raises(SchemaError):
            Schema(
                entity_types=(EntityType("A", "A"),),
                relations=(RelationSchema("R", frozenset({"A"}), frozenset({"Z"})),),
            )

    def test_duplicate_document_ids_rejected(self):
        schema = Schema(entity_types=(EntityType("A", "A"),), relations=())
        doc = Document("d", "x", (), ())
        with pytest.raises(IntegrityError):
            Corpus(schema, (doc, doc))
