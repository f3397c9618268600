import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relexkit.textproc import (
    Sentence,
    analyze,
    lemmatize,
    load_stopwords,
    normalize,
    split_sentences,
    tokenize,
)


class TestSplitSentences:
    def test_two_plain_sentences(self):
        spans = split_sentences("She remains well. Mammogram was clear.")
        assert len(spans) == 2

    def test_empty_text(self):
        assert split_sentences("") == []

    def test_decimal_point_is_not_a_boundary(self):
        text = "Dose was 2.5 mg daily. Next review in 12 months."
        spans = split_sentences(text)
        assert len(spans) == 2
        assert text[spans[0][0]:spans[0][1]] == "Dose was 2.5 mg daily."

    def test_abbreviation_guard(self):
        spans = split_sentences("Seen by Dr. Smith today. Plan unchanged.")
        assert len(spans) == 2

    def test_unit_abbreviation_guard(self):
        # "mg." directly before an uppercase word does not split
        spans = split_sentences("Dose 20 mg. Review was booked.")
        assert len(spans) == 1

    def test_lowercase_continuation_does_not_split(self):
        assert len(split_sentences("Stable e.g. no change seen.")) == 1

    def test_terminal_run(self):
        spans = split_sentences("Really?! Yes. ")
        assert len(spans) == 2

    def test_spans_cover_all_non_whitespace(self):
        text = "One sentence here. Another one follows!  Third.  "
        spans = split_sentences(text)
        covered = set()
        for a, b in spans:
            covered.update(range(a, b))
        for i, ch in enumerate(text):
            if not ch.isspace():
                assert i in covered


class TestTokenize:
    def test_trailing_period_detached(self):
        toks = [t[0] for t in tokenize("remains on Arimidex tablets.")]
        assert toks == ["remains", "on", "Arimidex", "tablets", "."]

    def test_decimal_number_kept_whole(self):
        assert [t[0] for t in tokenize("2.5")] == ["2.5"]

    def test_empty(self):
        assert tokenize("") == []

    def test_hyphenated_word_kept_whole(self):
        assert [t[0] for t in tokenize("routine follow-up done")] == [
            "routine", "follow-up", "done"]

    def test_internal_punctuation_split(self):
        assert [t[0] for t in tokenize("patient's")] == ["patient", "'", "s"]

    def test_parentheses_detached(self):
        assert [t[0] for t in tokenize("(mild)")] == ["(", "mild", ")"]

    def test_spans_reconstruct_surfaces(self):
        text = "Dose was 2.5 mg daily (well-tolerated)."
        for surface, a, b in tokenize(text):
            assert text[a:b] == surface

    @given(st.text(alphabet=string.ascii_letters + string.digits + " .,-()'!?", max_size=80))
    @settings(max_examples=200, deadline=None)
    def test_no_non_whitespace_dropped(self, text):
        toks = tokenize(text)
        covered = set()
        for _, a, b in toks:
            covered.update(range(a, b))
        for i, ch in enumerate(text):
            assert (i in covered) == (not ch.isspace())


class TestLemmatize:
    @pytest.mark.parametrize("surface,lemma", [
        ("tablets", "tablet"),
        ("remains", "remain"),
        ("Arimidex", "arimidex"),
        ("studies", "study"),
        ("boxes", "box"),
        ("classes", "class"),
        ("running", "run"),
        ("stopped", "stop"),
        ("treated", "treat"),
        ("larger", "larg"),
        ("children", "child"),
        ("2.5", "2.5"),
        ("dresses", "dress"),
        ("doses", "dose"),
    ])
    def test_fixtures(self, surface, lemma):
        assert lemmatize(surface) == lemma

    def test_short_words_guarded(self):
        # minimum stem lengths keep short function words intact
        for w in ("is", "was", "has", "gas", "used", "being", "doing"):
            assert lemmatize(w) == w.lower()

    @given(st.text(alphabet=string.ascii_letters, min_size=1, max_size=15))
    @settings(max_examples=300, deadline=None)
    def test_idempotent(self, word):
        once = lemmatize(word)
        assert lemmatize(once) == once


class TestNormalize:
    def test_example_sentence(self):
        surfaces = ["She", "remains", "on", "Arimidex", "tablets", "."]
        assert normalize(surfaces) == ["remain", "arimidex", "tablet"]

    def test_all_stopwords(self):
        assert normalize(["she", "is", "on", "it"]) == []

    def test_idempotent_on_own_output(self):
        surfaces = ["She", "remains", "on", "Arimidex", "tablets", "."]
        out = normalize(surfaces)
        rendered = " ".join(out)
        again = normalize([t[0] for t in tokenize(rendered)])
        assert again == out

    @given(st.lists(st.text(alphabet=string.ascii_letters, min_size=1, max_size=12),
                    max_size=12))
    @settings(max_examples=200, deadline=None)
    def test_idempotence_property(self, words):
        out = normalize(words)
        rendered = " ".join(out)
        again = normalize([t[0] for t in tokenize(rendered)])
        assert again == out


class TestAnalyze:
    def test_token_spans_absolute(self):
        text = "She remains well. Mammogram was clear."
        sentences = analyze(text)
        assert [s.index for s in sentences] == [0, 1]
        for s in sentences:
            assert isinstance(s, Sentence)
            for t in s.tokens:
                assert text[t.start:t.end] == t.surface
                assert s.start <= t.start < t.end <= s.end

    def test_content_lemmas(self):
        text = "She remains on Arimidex tablets."
        (s,) = analyze(text)
        assert s.content_lemmas() == ["remain", "arimidex", "tablet"]

    def test_deterministic(self):
        text = "Dose was 2.5 mg daily. Next review in 12 months."
        assert analyze(text) == analyze(text)


def test_stopword_list_loaded():
    stops = load_stopwords()
    assert "the" in stops and "she" in stops and "not" in stops
    assert len(stops) > 100
