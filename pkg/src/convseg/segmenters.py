"""Boundary segmenters over the candidate lattice of a document.

All segmenters share a small estimator-style API: construct with parameters,
inspect them with get_params/set_params, and call predict(doc) to obtain a
Segmentation whose breaks are a subset of the document's candidates.
"""

import inspect
import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import textproc
from .corpus import cut_text
from .errors import (
    ScorerCountMismatchError,
    ScorerProbabilityError,
    ScorerResponseError,
    SegmenterError,
)

DEFAULT_DECISION_THRESHOLD = 0.5

TERMINATOR_KINDS = [".", ";", "!", "?"]

FEATURE_NAMES = [
    "sentence_len_tokens",
    "tokens_since_last_break",
    "relative_position",
    "verb_count",
    "noun_count",
    "has_temperature_cue",
    "has_time_cue",
    "terminator_dot",
    "terminator_semicolon",
    "terminator_bang",
    "terminator_question",
]

_TIME_UNITS = {"minute", "minutes", "hour", "hours", "second", "seconds"}


@dataclass
class Segmentation:
    doc_id: str
    breaks: list
    steps: list

    @property
    def n_steps(self):
        return len(self.breaks) + 1


def make_segmentation(doc, breaks):
    breaks = sorted(set(breaks))
    candidate_set = set(doc.candidates)
    bad = [b for b in breaks if b not in candidate_set]
    if bad:
        raise SegmenterError(f"breaks not on the candidate lattice: {bad[:3]}")
    return Segmentation(doc_id=doc.id, breaks=breaks, steps=cut_text(doc.text, breaks))


@dataclass
class BoundaryFeatures:
    sentence_len_tokens: int
    tokens_since_last_break: int
    relative_position: float
    verb_count: int
    noun_count: int
    has_temperature_cue: int
    has_time_cue: int
    terminator: str

    def to_vector(self):
        one_hot = [1.0 if self.terminator == t else 0.0 for t in TERMINATOR_KINDS]
        return np.array(
            [
                float(self.sentence_len_tokens),
                float(self.tokens_since_last_break),
                self.relative_position,
                float(self.verb_count),
                float(self.noun_count),
                float(self.has_temperature_cue),
                float(self.has_time_cue),
                *one_hot,
            ]
        )


def extract_features(doc, candidate_index, lexicon=None):
    """Features of the sentence ending at the given candidate boundary.

    Text-derived only: no dependence on previously predicted breaks.
    """
    if lexicon is None:
        lexicon = textproc.default_lexicon()
    if not 0 <= candidate_index < len(doc.candidates):
        raise SegmenterError(
            f"candidate index {candidate_index} out of range for {doc.id!r}"
        )
    offset = doc.candidates[candidate_index]
    prev = doc.candidates[candidate_index - 1] if candidate_index > 0 else 0
    sentence = doc.text[prev:offset]
    tokens = textproc.tokenize(sentence)
    norm = textproc.normalize_numbers(tokens)

    has_temperature = int(
        any(n in ("degrees", "degree") for n in norm)
        or any("preheat" in textproc.lemma_candidates(n) for n in norm)
    )
    has_time = int(
        any(a == "[N]" and b in _TIME_UNITS for a, b in zip(norm, norm[1:]))
    )
    verbs, nouns = textproc.pos_counts(tokens, lexicon)
    return BoundaryFeatures(
        sentence_len_tokens=len(tokens),
        tokens_since_last_break=len(tokens),
        relative_position=offset / len(doc.text) if doc.text else 0.0,
        verb_count=verbs,
        noun_count=nouns,
        has_temperature_cue=has_temperature,
        has_time_cue=has_time,
        terminator=doc.text[offset - 1],
    )


def feature_matrix(doc, lexicon=None):
    if not doc.candidates:
        return np.zeros((0, len(FEATURE_NAMES)))
    return np.stack(
        [extract_features(doc, i, lexicon).to_vector() for i in range(len(doc.candidates))]
    )


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class ClassifierModel:
    """Linear boundary classifier: logistic(w . x + b)."""

    feature_names: list = field(default_factory=lambda: list(FEATURE_NAMES))
    weights: np.ndarray = None
    bias: float = 0.0
    decision_threshold: float = DEFAULT_DECISION_THRESHOLD
    trained_on: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.zeros(len(self.feature_names))
        self.weights = np.asarray(self.weights, dtype=float)

    def predict_proba(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.weights.shape[0]:
            raise SegmenterError(
                f"feature dimension mismatch: model has {self.weights.shape[0]}, "
                f"input has {x.shape[-1]}"
            )
        return sigmoid(x @ self.weights + self.bias)


def classifier_predict(model, features):
    """Break probability for one candidate boundary."""
    vec = features.to_vector() if isinstance(features, BoundaryFeatures) else features
    return float(model.predict_proba(vec))


class BaseSegmenter:
    """Minimal estimator API: parameters are the __init__ keyword arguments."""

    name = "base"

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise SegmenterError(f"unknown parameter {key!r} for {self.name}")
            setattr(self, key, value)
        return self

    def predict(self, doc):
        raise NotImplementedError

    def predict_all(self, docs):
        return [self.predict(doc) for doc in docs]


class RandPSegmenter(BaseSegmenter):
    """Independent Bernoulli(p) draw per candidate, consumed in order."""

    name = "rand"

    def __init__(self, p=0.5, seed=0):
        if not 0.0 <= p <= 1.0:
            raise SegmenterError(f"p must be in [0, 1], got {p}")
        self.p = p
        self.seed = seed

    def predict(self, doc):
        rng = random.Random(f"{self.seed}:{doc.id}")
        breaks = [c for c in doc.candidates if rng.random() < self.p]
        return make_segmentation(doc, breaks)


class EveryNSegmenter(BaseSegmenter):
    """Break at every n-th candidate."""

    name = "every"

    def __init__(self, n=1):
        if n < 1:
            raise SegmenterError(f"n must be >= 1, got {n}")
        self.n = n

    def predict(self, doc):
        return make_segmentation(doc, doc.candidates[self.n - 1 :: self.n])


class TextTilingSegmenter(BaseSegmenter):
    """Lexical-cohesion segmenter: block cosine similarity + depth scores.

    Pipeline: stopword-filtered lowercase tokens are grouped into
    pseudosentences of w tokens; each gap is scored with the cosine between
    the term-frequency vectors of k_blocks pseudosentences on each side; the
    score sequence is mean-smoothed and valleys deeper than
    mean(d) + std(d)/2 become boundaries, snapped to the nearest candidate.
    Adjacent selected gaps are one valley; the break lands on the gap with
    the lowest raw score inside the run.
    """

    name = "texttiling"

    def __init__(self, w=10, k_blocks=3, smoothing_width=2, stopwords=None):
        self.w = w
        self.k_blocks = k_blocks
        self.smoothing_width = smoothing_width
        self.stopwords = stopwords

    def _pseudosentences(self, doc):
        stop = self.stopwords if self.stopwords is not None else textproc.default_stopwords()
        toks = [
            (t.text.lower(), t.end)
            for t in textproc.tokenize(doc.text)
            if t.kind == textproc.WORD and t.text.lower() not in stop
        ]
        groups = []
        for i in range(0, len(toks) - self.w + 1, self.w):
            chunk = toks[i : i + self.w]
            groups.append(([w for w, _ in chunk], chunk[-1][1]))
        return groups

    @staticmethod
    def _cosine(counter_a, counter_b):
        shared = set(counter_a) & set(counter_b)
        dot = sum(counter_a[t] * counter_b[t] for t in shared)
        na = math.sqrt(sum(v * v for v in counter_a.values()))
        nb = math.sqrt(sum(v * v for v in counter_b.values()))
        if na == 0.0 or nb == 0.0:
            return 0.0
        return dot / (na * nb)

    def gap_scores(self, doc):
        from collections import Counter

        groups = self._pseudosentences(doc)
        if len(groups) < 2 * self.k_blocks:
            return [], []
        counters = [Counter(words) for words, _ in groups]
        anchors = [end for _, end in groups]
        scores = []
        for gap in range(len(groups) - 1):
            left = Counter()
            for c in counters[max(0, gap - self.k_blocks + 1) : gap + 1]:
                left.update(c)
            right = Counter()
            for c in counters[gap + 1 : gap + 1 + self.k_blocks]:
                right.update(c)
            scores.append(self._cosine(left, right))
        return scores, anchors

    def smooth(self, scores):
        sw = self.smoothing_width
        return [
            sum(scores[max(0, i - sw) : i + sw + 1])
            / len(scores[max(0, i - sw) : i + sw + 1])
            for i in range(len(scores))
        ]

    @staticmethod
    def depth_scores(smoothed):
        depths = []
        for i, s in enumerate(smoothed):
            j = i
            while j > 0 and smoothed[j - 1] >= smoothed[j]:
                j -= 1
            left_peak = smoothed[j]
            j = i
            while j < len(smoothed) - 1 and smoothed[j + 1] >= smoothed[j]:
                j += 1
            right_peak = smoothed[j]
            depths.append((left_peak - s) + (right_peak - s))
        return depths

    def predict(self, doc):
        scores, anchors = self.gap_scores(doc)
        if not scores or not doc.candidates:
            return make_segmentation(doc, [])
        smoothed = self.smooth(scores)
        depths = self.depth_scores(smoothed)
        mean = sum(depths) / len(depths)
        std = math.sqrt(sum((d - mean) ** 2 for d in depths) / len(depths))
        cutoff = max(mean + std / 2.0, 0.0)
        selected = [i for i, d in enumerate(depths) if d > cutoff]
        # Merge runs of adjacent selected gaps: a single valley spans several
        # gaps once smoothed. The raw score pinpoints the valley floor.
        breaks = set()
        run = []
        for i in selected + [None]:
            if run and (i is None or i != run[-1] + 1):
                best = min(run, key=lambda g: (scores[g], -depths[g], g))
                anchor = anchors[best]
                snapped = min(
                    doc.candidates, key=lambda c: (abs(c - anchor), c)
                )
                breaks.add(snapped)
                run = []
            if i is not None:
                run.append(i)
        return make_segmentation(doc, sorted(breaks))


class ClassifierSegmenter(BaseSegmenter):
    """Trainable feature-based boundary classifier."""

    name = "classifier"

    def __init__(self, model=None, lexicon=None):
        self.model = model if model is not None else ClassifierModel()
        self.lexicon = lexicon

    def fit(self, train_docs, validation_docs, config=None):
        from . import training

        report = training.train_on_documents(
            train_docs, validation_docs, config=config, lexicon=self.lexicon
        )
        self.model = report.model
        return self

    def predict(self, doc):
        if not doc.candidates:
            return make_segmentation(doc, [])
        probs = self.model.predict_proba(feature_matrix(doc, self.lexicon))
        breaks = [
            c
            for c, p in zip(doc.candidates, probs)
            if p > self.model.decision_threshold
        ]
        return make_segmentation(doc, breaks)


class ExternalSegmenter(BaseSegmenter):
    """Client of the external-scorer wire protocol.

    The scorer is any object with score(request) -> response, where the
    request is {"doc_id", "text", "candidates"} and the response must carry
    one probability in [0, 1] per candidate, in order.
    """

    name = "external"

    def __init__(self, scorer=None, threshold=DEFAULT_DECISION_THRESHOLD):
        self.scorer = scorer
        self.threshold = threshold

    def predict(self, doc):
        if self.scorer is None:
            raise SegmenterError("external segmenter needs a scorer")
        request = {
            "doc_id": doc.id,
            "text": doc.text,
            "candidates": list(doc.candidates),
        }
        response = self.scorer.score(request)
        probs = validate_score_response(response, request)
        breaks = [c for c, p in zip(doc.candidates, probs) if p > self.threshold]
        return make_segmentation(doc, breaks)


def validate_score_response(response, request):
    """Check a scorer response against the wire-protocol contract."""
    if not isinstance(response, dict):
        raise ScorerResponseError(f"response is not an object: {type(response).__name__}")
    if "error" in response:
        raise ScorerResponseError(f"scorer error: {response['error']}")
    if response.get("doc_id") != request["doc_id"]:
        raise ScorerResponseError(
            f"doc_id mismatch: sent {request['doc_id']!r}, got {response.get('doc_id')!r}"
        )
    probs = response.get("probabilities")
    if not isinstance(probs, list) or not all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs
    ):
        raise ScorerResponseError("'probabilities' must be a list of numbers")
    if len(probs) != len(request["candidates"]):
        raise ScorerCountMismatchError(
            f"expected {len(request['candidates'])} probabilities, got {len(probs)}"
        )
    out_of_range = [p for p in probs if not 0.0 <= p <= 1.0]
    if out_of_range:
        raise ScorerProbabilityError(
            f"probabilities outside [0, 1]: {out_of_range[:3]}"
        )
    return [float(p) for p in probs]


def rand_p(doc, p, seed=0):
    return RandPSegmenter(p=p, seed=seed).predict(doc)


def every_n(doc, n):
    return EveryNSegmenter(n=n).predict(doc)


def texttiling(doc, w=10, k_blocks=3, smoothing_width=2, stopwords=None):
    return TextTilingSegmenter(
        w=w, k_blocks=k_blocks, smoothing_width=smoothing_width, stopwords=stopwords
    ).predict(doc)


def external_segment(doc, scorer, threshold=DEFAULT_DECISION_THRESHOLD):
    return ExternalSegmenter(scorer=scorer, threshold=threshold).predict(doc)


SEGMENTER_CLASSES = {
    cls.name: cls
    for cls in (
        RandPSegmenter,
        EveryNSegmenter,
        TextTilingSegmenter,
        ClassifierSegmenter,
        ExternalSegmenter,
    )
}


def segment(doc, method, seed=0, **params):
    """Dispatch by method name. Unknown names raise SegmenterError."""
    cls = SEGMENTER_CLASSES.get(method)
    if cls is None:
        raise SegmenterError(
            f"unknown method {method!r}; expected one of {sorted(SEGMENTER_CLASSES)}"
        )
    if "seed" in cls._param_names():
        params.setdefault("seed", seed)
    return cls(**params).predict(doc)


def segmentation_to_record(seg, method):
    return {
        "id": seg.doc_id,
        "method": method,
        "breaks": list(seg.breaks),
        "steps": list(seg.steps),
    }
