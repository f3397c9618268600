"""Deterministic text normalization.

Sentence splitting, tokenization, a rule-based lemmatizer, and stopword /
punctuation filtering. Everything is a pure function of its inputs plus the
bundled resource files, so repeated calls always give identical output. The
lemmatizer applies an exception table and then ordered English suffix rules
until a fixpoint, which makes it idempotent by construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources as _importlib_resources
from typing import Iterable, Mapping

__all__ = [
    "Token",
    "Sentence",
    "split_sentences",
    "tokenize",
    "lemmatize",
    "normalize",
    "analyze",
    "load_stopwords",
    "load_lemma_exceptions",
]

_TERMINALS = ".!?"

# Words that end with "." without closing a sentence (titles, units).
_ABBREVIATIONS = frozenset({
    "dr", "mr", "mrs", "ms", "prof", "st", "no", "vs", "etc", "fig",
    "approx", "mg", "ml", "kg", "cm", "mm", "mmol",
})

# Doubled final consonants that stay doubled after suffix stripping.
_KEEP_DOUBLE = ("ll", "ss", "zz", "ff")


@dataclass(frozen=True)
class Token:
    """A single token with document-absolute character offsets."""

    surface: str
    lemma: str
    start: int
    end: int
    is_stopword: bool
    is_punctuation: bool


@dataclass(frozen=True)
class Sentence:
    """One sentence span with its tokens; offsets are document-absolute."""

    start: int
    end: int
    index: int
    tokens: tuple[Token, ...]

    def text(self, document_text: str) -> str:
        return document_text[self.start:self.end]

    def content_lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens
                if not (t.is_stopword or t.is_punctuation)]


def _read_resource(name: str) -> str:
    return (_importlib_resources.files("relexkit") / "resources" / name).read_text("utf-8")


@lru_cache(maxsize=None)
def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Stopword list, one token per line; `path` overrides the bundled list."""
    if path is None:
        text = _read_resource("stopwords.txt")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@lru_cache(maxsize=None)
def load_lemma_exceptions(path: str | None = None):
    """Exception table as `surface\\tlemma` lines; `path` overrides the bundled one."""
    if path is None:
        text = _read_resource("lemma_exceptions.tsv")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        surface, lemma = line.split("\t")
        table[surface.strip()] = lemma.strip()
    return table


def _is_punct_char(ch: str) -> bool:
    return not ch.isalnum() and not ch.isspace()


def _closes_sentence(text: str, i: int, run_end: int) -> bool:
    """Whether the terminal run text[i:run_end] ends a sentence."""
    ch = text[i]
    if ch == ".":
        # decimal point
        if 0 < i and i + 1 < len(text) and text[i - 1].isdigit() and text[i + 1].isdigit():
            return False
        # abbreviation or single-initial guard, only for a lone period
        if run_end - i == 1:
            j = i
            while j > 0 and text[j - 1].isalpha():
                j -= 1
            word = text[j:i]
            if word and (word.lower() in _ABBREVIATIONS
                         or (len(word) == 1 and word.isupper())):
                return False
    # followed by end-of-text (possibly trailing whitespace) ...
    k = run_end
    while k < len(text) and text[k].isspace():
        k += 1
    if k == len(text):
        return True
    # ... or by whitespace and an uppercase letter
    return k > run_end and text[k].isupper()


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Split into sentence spans (half-open, trimmed of outer whitespace).

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace plus an
    uppercase letter, or at end of text. Decimal points and a small
    abbreviation list never split. Spans are ordered, non-overlapping, and
    cover every non-whitespace character.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] in _TERMINALS:
            run_end = i + 1
            while run_end < n and text[run_end] in _TERMINALS:
                run_end += 1
            if _closes_sentence(text, i, run_end):
                span = _trim_span(text, start, run_end)
                if span is not None:
                    spans.append(span)
                start = run_end
            i = run_end
        else:
            i += 1
    tail = _trim_span(text, start, n)
    if tail is not None:
        spans.append(tail)
    return spans


def _trim_span(text: str, a: int, b: int) -> tuple[int, int] | None:
    while a < b and text[a].isspace():
        a += 1
    while b > a and text[b - 1].isspace():
        b -= 1
    return (a, b) if a < b else None


def tokenize(text: str, base: int = 0) -> list[tuple[str, int, int]]:
    """Tokenize into (surface, start, end) triples; offsets shifted by `base`.

    Splits on whitespace, detaches leading/trailing punctuation, and splits
    internal punctuation except decimal points and hyphens joining
    alphanumeric characters.
    """
    out: list[tuple[str, int, int]] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        _split_chunk(text, i, j, base, out)
        i = j
    return out


def _split_chunk(text: str, i: int, j: int, base: int, out: list) -> None:
    a, b = i, j
    while a < b and _is_punct_char(text[a]):
        out.append((text[a], base + a, base + a + 1))
        a += 1
    trailing: list[tuple[str, int, int]] = []
    while b > a and _is_punct_char(text[b - 1]):
        b -= 1
        trailing.append((text[b], base + b, base + b + 1))
    trailing.reverse()
    cur = a
    for k in range(a, b):
        ch = text[k]
        if _is_punct_char(ch) and not _keep_internal(text, k, a, b):
            if k > cur:
                out.append((text[cur:k], base + cur, base + k))
            out.append((ch, base + k, base + k + 1))
            cur = k + 1
    if cur < b:
        out.append((text[cur:b], base + cur, base + b))
    out.extend(trailing)


def _keep_internal(text: str, k: int, a: int, b: int) -> bool:
    ch = text[k]
    if a < k < b - 1:
        if ch == "." and text[k - 1].isdigit() and text[k + 1].isdigit():
            return True
        if ch == "-" and text[k - 1].isalnum() and text[k + 1].isalnum():
            return True
    return False


def _undouble(stem: str) -> str:
    if (len(stem) >= 3 and stem[-1] == stem[-2]
            and stem[-1].isalpha() and stem[-1] not in "aeiou"
            and not stem.endswith(_KEEP_DOUBLE)):
        return stem[:-1]
    return stem


def _strip_suffix(w: str) -> str:
    if w.endswith("ies") and len(w) >= 5:
        return w[:-3] + "y"
    if len(w) >= 5 and w.endswith(("sses", "shes", "ches", "xes", "zes")):
        return w[:-2]
    if w.endswith("s") and not w.endswith(("ss", "us", "is")) and len(w) >= 4:
        return w[:-1]
    if w.endswith("ing") and len(w) >= 6:
        return _undouble(w[:-3])
    if w.endswith("ed") and len(w) >= 5:
        return _undouble(w[:-2])
    if w.endswith("est") and len(w) >= 7:
        return w[:-3]
    if w.endswith("er") and len(w) >= 6:
        return w[:-2]
    return w


def lemmatize(surface: str, exceptions: Mapping[str, str] | None = None) -> str:
    """Lowercase and strip inflectional suffixes (plural, -ing/-ed, -er/-est).

    The exception table wins over the rules. Rules are re-applied until a
    fixpoint so that lemmatize(lemmatize(x)) == lemmatize(x). Only fully
    alphabetic strings are suffix-stripped; anything else is just lowercased.
    Agreement with a dictionary lemmatizer is not the goal here, internal
    consistency is: the same surface always maps to the same lemma.
    """
    if exceptions is None:
        exceptions = load_lemma_exceptions()
    lemma = surface.lower()
    for _ in range(8):
        if lemma in exceptions:
            repl = exceptions[lemma]
            if repl == lemma:
                return lemma
            lemma = repl
            continue
        if not lemma.isalpha():
            return lemma
        nxt = _strip_suffix(lemma)
        if nxt == lemma:
            return lemma
        lemma = nxt
    return lemma


def _is_punct_token(surface: str) -> bool:
    return bool(surface) and all(_is_punct_char(c) for c in surface)


def normalize(
    surfaces: Iterable[str],
    stopwords: frozenset[str] | None = None,
    exceptions: Mapping[str, str] | None = None,
) -> list[str]:
    """Lemmatize token surfaces and drop stopwords and punctuation.

    A token is a stopword when either its lowercased surface or its lemma is
    on the list; checking both keeps the operation idempotent on its own
    output. Order is preserved.
    """
    if stopwords is None:
        stopwords = load_stopwords()
    out: list[str] = []
    for surface in surfaces:
        if _is_punct_token(surface):
            continue
        lemma = lemmatize(surface, exceptions)
        if surface.lower() in stopwords or lemma in stopwords:
            continue
        out.append(lemma)
    return out


def analyze(
    text: str,
    stopwords: frozenset[str] | None = None,
    exceptions: Mapping[str, str] | None = None,
) -> list[Sentence]:
    """Full pipeline: sentences with tokens, lemmas, and filter flags."""
    if stopwords is None:
        stopwords = load_stopwords()
    sentences: list[Sentence] = []
    for index, (start, end) in enumerate(split_sentences(text)):
        tokens = []
        for surface, a, b in tokenize(text[start:end], base=start):
            punct = _is_punct_token(surface)
            lemma = surface if punct else lemmatize(surface, exceptions)
            stop = (not punct
                    and (surface.lower() in stopwords or lemma in stopwords))
            tokens.append(Token(surface, lemma, a, b, stop, punct))
        sentences.append(Sentence(start, end, index, tuple(tokens)))
    return sentences
