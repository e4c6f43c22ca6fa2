"""Deterministic text primitives: tokenization, sentence splitting, n-grams,
number normalization, and lexicon-based verb/noun counting.

Everything in this module is pure and rule-based so that downstream corpus
builds and evaluations are bit-reproducible.
"""

import re
import string
from dataclasses import dataclass
from importlib import resources

WORD = "word"
NUMBER = "number"
PUNCTUATION = "punctuation"

_PUNCT_CHARS = set(string.punctuation)
_CHUNK_RE = re.compile(r"\S+")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")
_NUMBER_RANGE_RE = re.compile(r"(\d+(?:\.\d+)?)-(\d+(?:\.\d+)?)")

TERMINATORS = ".!?;"

# Lowercased forms (final period stripped) that never end a sentence.
ABBREVIATIONS = {"e.g", "i.e", "etc", "vs", "cf", "approx", "al"}


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    kind: str


@dataclass(frozen=True)
class SentenceSpan:
    start: int
    end: int


def tokenize(text):
    """Split on whitespace, peel surrounding punctuation, and tag numbers.

    Contiguous digit runs (optionally with one internal '.') are number
    tokens; a digit range like "10-15" becomes two number tokens joined by a
    punctuation '-'. Token offsets partition the non-whitespace text exactly.
    """
    tokens = []
    for m in _CHUNK_RE.finditer(text):
        s, e = m.start(), m.end()
        while s < e and text[s] in _PUNCT_CHARS:
            tokens.append(Token(text[s], s, s + 1, PUNCTUATION))
            s += 1
        trailing = []
        while e > s and text[e - 1] in _PUNCT_CHARS:
            trailing.append(Token(text[e - 1], e - 1, e, PUNCTUATION))
            e -= 1
        if s < e:
            core = text[s:e]
            rm = _NUMBER_RANGE_RE.fullmatch(core)
            if rm:
                lo, hi = rm.group(1), rm.group(2)
                tokens.append(Token(lo, s, s + len(lo), NUMBER))
                tokens.append(Token("-", s + len(lo), s + len(lo) + 1, PUNCTUATION))
                tokens.append(Token(hi, s + len(lo) + 1, e, NUMBER))
            elif _NUMBER_RE.fullmatch(core):
                tokens.append(Token(core, s, e, NUMBER))
            else:
                tokens.append(Token(core, s, e, WORD))
        tokens.extend(reversed(trailing))
    return tokens


def _preceding_chunk(text, i):
    """Non-whitespace run immediately before position i, stripped of leading
    punctuation."""
    j = i
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    chunk = text[j:i]
    return chunk.lstrip("".join(_PUNCT_CHARS - {"."}))


def _is_abbreviation_dot(text, i):
    """True when the '.' at position i closes an abbreviation, not a sentence."""
    chunk = _preceding_chunk(text, i)
    if not chunk:
        return False
    if chunk.lower().rstrip(".") in ABBREVIATIONS or chunk.lower() in ABBREVIATIONS:
        return True
    # A lone capital followed by a lowercase continuation ("C. elegans") is an
    # initial; followed by a capitalized word ("degrees C. Spray") it ends the
    # sentence.
    if len(chunk) == 1 and chunk.isupper():
        k = i + 1
        while k < len(text) and text[k].isspace():
            k += 1
        if k < len(text) and text[k].islower():
            return True
    return False


def split_sentences(text):
    """Rule-based sentence segmentation.

    A sentence ends at '.', '!', '?', or ';' followed by whitespace or end of
    text, unless the '.' closes a known abbreviation. Periods inside numbers
    ("2.5") never split because they are not followed by whitespace. Spans
    cover all non-whitespace text.
    """
    bounds = []
    for i, ch in enumerate(text):
        if ch not in TERMINATORS:
            continue
        if i + 1 < len(text) and not text[i + 1].isspace():
            continue
        if ch == "." and _is_abbreviation_dot(text, i):
            continue
        bounds.append(i + 1)

    spans = []
    pos = 0
    for b in bounds:
        start = pos
        while start < b and text[start].isspace():
            start += 1
        if start < b:
            spans.append(SentenceSpan(start, b))
        pos = b
    start = pos
    while start < len(text) and text[start].isspace():
        start += 1
    stripped_end = len(text.rstrip())
    if start < stripped_end:
        spans.append(SentenceSpan(start, stripped_end))
    return spans


def normalize_numbers(tokens):
    """Map each number token to the "[N]" placeholder, lowercase the rest."""
    return ["[N]" if t.kind == NUMBER else t.text.lower() for t in tokens]


def ngrams(items, n):
    """Contiguous n-grams of a sequence, in order; empty when too short."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    items = list(items)
    return [tuple(items[i:i + n]) for i in range(len(items) - n + 1)]


@dataclass
class PosLexicon:
    """Small domain lexicon of verb and noun lemmas (verbs win on ambiguity)."""

    verbs: set
    nouns: set

    def __post_init__(self):
        self.nouns = set(self.nouns) - set(self.verbs)
        self.verbs = set(self.verbs)

    @classmethod
    def load(cls, path):
        verbs, nouns = set(), set()
        current = None
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                if line.upper() == "#VERBS":
                    current = verbs
                elif line.upper() == "#NOUNS":
                    current = nouns
                elif line.startswith("#"):
                    continue
                elif current is not None:
                    current.add(line.lower())
        return cls(verbs=verbs, nouns=nouns)


_DEFAULT_LEXICON = None


def default_lexicon():
    """Lexicon shipped with the package, loaded once."""
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        path = resources.files("convseg").joinpath("data/cooking_lexicon.txt")
        with resources.as_file(path) as p:
            _DEFAULT_LEXICON = PosLexicon.load(p)
    return _DEFAULT_LEXICON


_STOPWORDS = None


def default_stopwords():
    global _STOPWORDS
    if _STOPWORDS is None:
        path = resources.files("convseg").joinpath("data/stopwords.txt")
        words = path.read_text(encoding="utf-8").split()
        _STOPWORDS = frozenset(w.lower() for w in words)
    return _STOPWORDS


def lemma_candidates(word):
    """Crude suffix-stripped lemma candidates (-s, -ed, -ing, with 'e' restore)."""
    w = word.lower()
    cands = [w]
    if w.endswith("ies") and len(w) > 4:
        cands.append(w[:-3] + "y")
    if w.endswith("es") and len(w) > 3:
        cands.append(w[:-2])
    if w.endswith("s") and len(w) > 2:
        cands.append(w[:-1])
    for suffix in ("ed", "ing"):
        if w.endswith(suffix) and len(w) > len(suffix) + 1:
            stem = w[: -len(suffix)]
            cands.extend([stem, stem + "e"])
            if len(stem) > 2 and stem[-1] == stem[-2]:
                cands.append(stem[:-1])  # stirred -> stir
    return cands


def pos_counts(tokens, lexicon):
    """Count word tokens resolving to the verb set first, else the noun set."""
    verbs = nouns = 0
    for tok in tokens:
        if tok.kind != WORD:
            continue
        cands = lemma_candidates(tok.text)
        if any(c in lexicon.verbs for c in cands):
            verbs += 1
        elif any(c in lexicon.nouns for c in cands):
            nouns += 1
    return verbs, nouns
