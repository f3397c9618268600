import math

import numpy as np
import pytest

from relexkit.boc import ConceptMap, empty_concept_map
from relexkit.corpus import Document
from relexkit.embeddings import EmbeddingTable
from relexkit.errors import ConfigError
from relexkit.features import (
    KIND_BOC,
    KIND_BOC_SE,
    KIND_BOW,
    KIND_SE,
    FeatureSpace,
    corpus_lemma_frequencies,
    featurize,
    featurize_matrix,
    fit_space,
    fit_tfidf,
    instance_lemma_frequencies,
)
from relexkit.instancegen import RelationInstance


def make_instance(context, doc_id="doc_0", label=1, iid="Rel|doc_0|T1|T2"):
    return RelationInstance(
        instance_id=iid, relation="Rel", doc_id=doc_id,
        left_mention="T1", right_mention="T2",
        context=tuple(context), raw_context=" ".join(context),
        label=label, cross_sentence=False)


class TestFitSpace:
    def test_bow_index_is_lexicographic(self):
        instances = [make_instance(["a", "b"], iid="i1"),
                     make_instance(["b", "c"], iid="i2")]
        space = fit_space(instances, KIND_BOW)
        assert space.columns == ("a", "b", "c")
        assert space.column_index == {"a": 0, "b": 1, "c": 2}
        assert space.dimension == 3

    def test_boc_index_after_mapping(self):
        instances = [make_instance(["a", "b"], iid="i1"),
                     make_instance(["b", "c"], iid="i2")]
        cmap = ConceptMap(mapping={"a": 1, "c": 1}, seeds={1: "a"}, mu=0.9)
        space = fit_space(instances, KIND_BOC, concept_map=cmap)
        assert space.columns == ("CONCEPT_1", "b")
        assert space.dimension == 2

    def test_boc_se_dimension_is_concatenation(self):
        instances = [make_instance(["a", "b"], iid="i1"),
                     make_instance(["b", "c"], iid="i2")]
        cmap = ConceptMap(mapping={"a": 1, "c": 1}, seeds={1: "a"}, mu=0.9)
        table = EmbeddingTable.from_mapping(
            {"a": [1, 0, 0, 0], "b": [0, 1, 0, 0], "c": [0, 0, 1, 0]})
        space = fit_space(instances, KIND_BOC_SE, concept_map=cmap,
                          embedding=table)
        assert space.dimension == 2 + 4

    def test_missing_resources_are_config_errors(self):
        instances = [make_instance(["a"])]
        with pytest.raises(ConfigError):
            fit_space(instances, KIND_BOC)
        with pytest.raises(ConfigError):
            fit_space(instances, KIND_SE)

    def test_boc_dimension_never_exceeds_bow(self):
        instances = [make_instance(["a", "b", "c", "d"], iid="i1"),
                     make_instance(["b", "e"], iid="i2")]
        cmap = ConceptMap(mapping={"a": 1, "b": 1, "d": 2, "e": 2},
                          seeds={1: "a", 2: "d"}, mu=0.9)
        bow = fit_space(instances, KIND_BOW)
        boc = fit_space(instances, KIND_BOC, concept_map=cmap)
        assert boc.dimension <= bow.dimension


class TestFeaturizeSparse:
    def test_counts(self):
        space = fit_space([make_instance(["a", "b", "c"])], KIND_BOW)
        vec = featurize(make_instance(["a", "b", "b"]), space)
        assert vec.indices == (0, 1)
        assert vec.counts == (1, 2)

    def test_unseen_terms_dropped(self):
        space = fit_space([make_instance(["a"])], KIND_BOW)
        vec = featurize(make_instance(["a", "zzz"]), space)
        assert vec.indices == (0,)
        assert vec.counts == (1,)

    def test_count_sum_equals_token_count_on_training_instances(self):
        instances = [
            make_instance(["TestName", "a", "b", "a", "TestResult"], iid="i1"),
            make_instance(["b", "c", "c"], iid="i2"),
        ]
        space = fit_space(instances, KIND_BOW)
        for inst in instances:
            vec = featurize(inst, space)
            assert sum(vec.counts) == len(inst.context)

    def test_bow_equals_boc_with_empty_map(self):
        instances = [make_instance(["a", "b"], iid="i1"),
                     make_instance(["b", "c", "c"], iid="i2")]
        bow = fit_space(instances, KIND_BOW)
        boc = fit_space(instances, KIND_BOC, concept_map=empty_concept_map())
        x_bow = featurize_matrix(instances, bow)
        x_boc = featurize_matrix(instances, boc)
        assert bow.columns == boc.columns
        assert np.array_equal(x_bow, x_boc)

    def test_space_hash_stable_after_featurizing_new_data(self):
        space = fit_space([make_instance(["a", "b"])], KIND_BOW)
        before = space.space_hash()
        featurize(make_instance(["q", "r", "s"]), space)
        assert space.space_hash() == before


class TestTfIdf:
    def _docs(self):
        texts = [
            "Mammogram was clear today.",
            "Mammogram showed calcification today.",
            "Dose unchanged today.",
            "Dose reduced today.",
        ]
        return [Document(f"doc_{i}", t, (), ()) for i, t in enumerate(texts)]

    def test_lemma_in_every_document_scores_zero(self):
        model = fit_tfidf(self._docs())
        assert model.score("today", "doc_0") == 0.0

    def test_direct_formula(self):
        # df(calcification) = 1, tf in doc_1 = 1 -> ln(4)
        model = fit_tfidf(self._docs())
        assert model.score("calcification", "doc_1") == pytest.approx(
            math.log(4.0), abs=1e-12)

    def test_tf_two_df_one(self):
        docs = self._docs()
        docs.append(Document(
            "doc_4", "Letrozole continued. Letrozole tolerated well.", (), ()))
        model = fit_tfidf(docs)
        assert model.score("letrozole", "doc_4") == pytest.approx(
            2 * math.log(5.0), abs=1e-12)

    def test_unseen_lemma_scores_zero(self):
        model = fit_tfidf(self._docs())
        assert model.score("nonexistent", "doc_0") == 0.0

    def test_unknown_document_scores_zero(self):
        model = fit_tfidf(self._docs())
        assert model.score("mammogram", "doc_99") == 0.0

    def test_empty_document_set_rejected(self):
        with pytest.raises(ConfigError):
            fit_tfidf([])


class TestSentenceEmbedding:
    def _setup(self):
        table = EmbeddingTable.from_mapping({
            "w1": [1.0, 2.0, 3.0],
            "w2": [0.0, 1.0, 0.0],
        })
        doc = Document("doc_0", "W1 w1 w2 here. Second sentence w1 also.", (), ())
        other = Document("doc_1", "Nothing shared here today.", (), ())
        tfidf = fit_tfidf([doc, other])
        return table, tfidf

    def test_single_token_is_vector_times_score(self):
        table, tfidf = self._setup()
        space = fit_space([make_instance(["w1"])], KIND_SE, embedding=table)
        vec = featurize(make_instance(["w1"]), space, tfidf).to_dense()
        score = tfidf.score("w1", "doc_0")
        assert score > 0
        expected = np.array([1.0, 2.0, 3.0]) * score
        np.testing.assert_allclose(vec, expected, atol=1e-9)

    def test_two_tokens_hand_computed_mean(self):
        table, tfidf = self._setup()
        space = fit_space([make_instance(["w1", "w2"])], KIND_SE, embedding=table)
        inst = make_instance(["w1", "w2"])
        vec = featurize(inst, space, tfidf).to_dense()
        s1 = tfidf.score("w1", "doc_0")
        s2 = tfidf.score("w2", "doc_0")
        expected = (np.array([1.0, 2.0, 3.0]) * s1 + np.array([0.0, 1.0, 0.0]) * s2) / 2
        np.testing.assert_allclose(vec, expected, atol=1e-9)

    def test_oov_and_placeholders_ignored(self):
        table, tfidf = self._setup()
        space = fit_space(
            [make_instance(["w1"])], KIND_SE, embedding=table,
            placeholders=frozenset({"TestName"}))
        with_extras = make_instance(["TestName", "w1", "unknownword"])
        only_w1 = make_instance(["w1"])
        a = featurize(with_extras, space, tfidf).to_dense()
        b = featurize(only_w1, space, tfidf).to_dense()
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_no_contributing_tokens_gives_zero_vector(self):
        table, tfidf = self._setup()
        space = fit_space([make_instance(["w1"])], KIND_SE, embedding=table)
        vec = featurize(make_instance(["zzz"]), space, tfidf).to_dense()
        assert np.all(vec == 0.0)

    def test_permutation_invariance(self):
        table, tfidf = self._setup()
        space = fit_space([make_instance(["w1", "w2"])], KIND_SE, embedding=table)
        a = featurize(make_instance(["w1", "w2", "w1"]), space, tfidf).to_dense()
        b = featurize(make_instance(["w1", "w1", "w2"]), space, tfidf).to_dense()
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_missing_tfidf_is_config_error(self):
        table, _ = self._setup()
        space = fit_space([make_instance(["w1"])], KIND_SE, embedding=table)
        with pytest.raises(ConfigError):
            featurize(make_instance(["w1"]), space)

    def test_boc_se_concatenates(self):
        table, tfidf = self._setup()
        cmap = empty_concept_map()
        inst = make_instance(["w1", "w2", "w2"])
        space = fit_space([inst], KIND_BOC_SE, concept_map=cmap, embedding=table)
        vec = featurize(inst, space, tfidf).to_dense()
        assert vec.shape == (2 + 3,)
        assert vec[0] == 1.0 and vec[1] == 2.0  # counts for w1, w2
        se_space = fit_space([inst], KIND_SE, embedding=table)
        se = featurize(inst, se_space, tfidf).to_dense()
        np.testing.assert_allclose(vec[2:], se, atol=1e-12)


class TestFrequencies:
    def test_corpus_lemma_frequencies(self):
        doc = Document("d", "Mammogram was clear. Mammogram repeated.", (), ())
        freqs = corpus_lemma_frequencies([doc])
        assert freqs["mammogram"] == 2
        assert "was" not in freqs

    def test_instance_frequencies_exclude_placeholders(self):
        inst = make_instance(["TestName", "a", "a", "b"])
        freqs = instance_lemma_frequencies(
            [inst], placeholders=frozenset({"TestName"}))
        assert freqs == {"a": 2, "b": 1}
