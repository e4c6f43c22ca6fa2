"""Corpus analysis: per-step and per-document distributions, boundary
n-gram tables with number placeholders, and n-gram uniqueness fractions.
"""

import csv
import json
from collections import Counter
from dataclasses import dataclass, field

from . import textproc
from .errors import MetricError


@dataclass
class CorpusStats:
    doc_steps: list = field(default_factory=list)
    doc_tokens: list = field(default_factory=list)
    doc_sentences: list = field(default_factory=list)
    step_tokens: list = field(default_factory=list)
    step_sentences: list = field(default_factory=list)
    step_verbs: list = field(default_factory=list)
    step_nouns: list = field(default_factory=list)

    @staticmethod
    def _mean(values):
        return sum(values) / len(values) if values else 0.0

    @property
    def mean_steps(self):
        return self._mean(self.doc_steps)

    @property
    def mean_tokens(self):
        return self._mean(self.doc_tokens)

    @property
    def mean_sentences(self):
        return self._mean(self.doc_sentences)

    @property
    def mean_tokens_per_step(self):
        return self._mean(self.step_tokens)

    @property
    def mean_sentences_per_step(self):
        return self._mean(self.step_sentences)

    @property
    def mean_verbs_per_step(self):
        return self._mean(self.step_verbs)

    @property
    def mean_nouns_per_step(self):
        return self._mean(self.step_nouns)

    def histogram(self, name):
        values = getattr(self, name)
        return sorted(Counter(values).items())

    def to_dict(self):
        return {
            "n_documents": len(self.doc_steps),
            "mean_steps": self.mean_steps,
            "mean_tokens": self.mean_tokens,
            "mean_sentences": self.mean_sentences,
            "mean_tokens_per_step": self.mean_tokens_per_step,
            "mean_sentences_per_step": self.mean_sentences_per_step,
            "mean_verbs_per_step": self.mean_verbs_per_step,
            "mean_nouns_per_step": self.mean_nouns_per_step,
            "histograms": {
                name: self.histogram(name)
                for name in (
                    "doc_steps",
                    "doc_sentences",
                    "step_tokens",
                    "step_verbs",
                    "step_nouns",
                )
            },
        }


@dataclass
class NgramTable:
    position: str
    n: int
    entries: list


def corpus_stats(docs, lexicon=None):
    """Distribution battery over documents with gold steps."""
    docs = list(docs)
    if not docs:
        raise MetricError("empty corpus")
    if lexicon is None:
        lexicon = textproc.default_lexicon()
    stats = CorpusStats()
    for doc in docs:
        steps = doc.step_texts()
        stats.doc_steps.append(len(steps))
        stats.doc_tokens.append(doc.n_tokens)
        stats.doc_sentences.append(doc.n_sentences)
        for step in steps:
            tokens = textproc.tokenize(step)
            verbs, nouns = textproc.pos_counts(tokens, lexicon)
            stats.step_tokens.append(len(tokens))
            stats.step_sentences.append(len(textproc.split_sentences(step)))
            stats.step_verbs.append(verbs)
            stats.step_nouns.append(nouns)
    return stats


def _boundary_ngram(step_text, position, n):
    tokens = [
        t for t in textproc.tokenize(step_text) if t.kind != textproc.PUNCTUATION
    ]
    if len(tokens) < n:
        return None
    window = tokens[:n] if position == "starting" else tokens[-n:]
    return tuple(textproc.normalize_numbers(window))


def _ngram_counts(docs, position, n):
    counts = Counter()
    for doc in docs:
        for step in doc.step_texts():
            gram = _boundary_ngram(step, position, n)
            if gram is not None:
                counts[gram] += 1
    return counts


def boundary_ngrams(docs, position, n, top_k):
    """Top-k most frequent starting or ending n-grams of gold steps.

    Numbers are replaced by the "[N]" placeholder; ties break
    lexicographically so the table is deterministic.
    """
    if position not in ("starting", "ending"):
        raise ValueError(f"position must be 'starting' or 'ending', got {position!r}")
    if n < 1 or top_k < 1:
        raise ValueError("n and top_k must be >= 1")
    counts = _ngram_counts(docs, position, n)
    entries = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return NgramTable(position=position, n=n, entries=entries)


def uniqueness_fraction(docs, n):
    """Fraction of distinct boundary n-grams (starting and ending pooled)
    whose corpus frequency is exactly 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    pooled = _ngram_counts(docs, "starting", n)
    pooled.update(_ngram_counts(docs, "ending", n))
    if not pooled:
        raise MetricError(f"corpus yields no boundary {n}-grams")
    singletons = sum(1 for c in pooled.values() if c == 1)
    return singletons / len(pooled)


def stats_to_json(stats, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def histogram_to_csv(stats, name, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "count"])
        for value, count in stats.histogram(name):
            writer.writerow([value, count])


def ngram_table_to_csv(table, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ngram", "frequency"])
        for gram, freq in table.entries:
            writer.writerow([" ".join(gram), freq])
