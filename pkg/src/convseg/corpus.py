"""Corpus pipeline: ingest raw step-structured recipes, filter and
deduplicate them, flatten each into an unsegmented text with gold break
labels, and build train/validation/test splits.
"""

import hashlib
import json
import random
from collections import Counter
from dataclasses import dataclass

from . import textproc
from .errors import DocumentBuildError, DuplicateIdError, IngestError, SplitError

DEFAULT_MIN_STEPS = 3
DEFAULT_MAX_HAMMING = 3
DEFAULT_SPLIT_RATIO = 0.82


@dataclass
class RawRecipe:
    id: str
    title: str
    steps: list
    annotated: bool = False


@dataclass
class Document:
    """A flattened recipe: unsegmented text plus gold breaks and candidate
    boundaries.

    step_offsets are character offsets where one original step ends and the
    next begins; candidates are sentence-end offsets from the splitter. The
    document-final offset belongs to neither list.
    """

    id: str
    title: str
    text: str
    step_offsets: list
    candidates: list
    n_tokens: int = 0
    n_sentences: int = 0

    @property
    def n_steps(self):
        return len(self.step_offsets) + 1

    @property
    def sentences_per_step(self):
        return self.n_sentences / self.n_steps

    def step_texts(self):
        return cut_text(self.text, self.step_offsets)


def cut_text(text, breaks):
    """Cut text at break offsets, trimming the single join space per piece."""
    pieces = []
    start = 0
    for off in list(breaks) + [len(text)]:
        pieces.append(text[start:off].strip())
        start = off
    return pieces


@dataclass
class CorpusSplit:
    train: list
    validation: list
    test: list
    threshold_sentences_per_step: float
    seed: int = 0
    ratio: float = DEFAULT_SPLIT_RATIO


def ingest(path, fmt="jsonl"):
    """Read raw recipes from a JSONL file, one object per line.

    Steps are whitespace-trimmed. A malformed line or a duplicate id raises
    IngestError with the offending line number.
    """
    if fmt != "jsonl":
        raise IngestError(f"unsupported format: {fmt}")
    recipes = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON ({exc.msg})", lineno) from exc
            if not isinstance(obj, dict):
                raise IngestError("record is not an object", lineno)
            for key in ("id", "title", "steps"):
                if key not in obj:
                    raise IngestError(f"missing field {key!r}", lineno)
            rid = obj["id"]
            if not isinstance(rid, str) or not rid:
                raise IngestError("'id' must be a non-empty string", lineno)
            if rid in seen:
                raise DuplicateIdError(f"duplicate id {rid!r}", lineno)
            seen.add(rid)
            steps_raw = obj["steps"]
            if not isinstance(steps_raw, list) or not steps_raw:
                raise IngestError("'steps' must be a non-empty list", lineno)
            steps = []
            for step in steps_raw:
                if not isinstance(step, str):
                    raise IngestError("step entries must be strings", lineno)
                trimmed = step.strip()
                if not trimmed:
                    raise IngestError("step strings must be non-empty", lineno)
                steps.append(trimmed)
            recipes.append(
                RawRecipe(
                    id=rid,
                    title=str(obj["title"]),
                    steps=steps,
                    annotated=bool(obj.get("annotated", False)),
                )
            )
    return recipes


def filter_min_steps(recipes, min_steps=DEFAULT_MIN_STEPS):
    """Keep recipes with at least min_steps steps, preserving order."""
    if min_steps < 1:
        raise ValueError(f"min_steps must be >= 1, got {min_steps}")
    return [r for r in recipes if len(r.steps) >= min_steps]


def _feature_hash(feature):
    return int.from_bytes(hashlib.md5(feature.encode("utf-8")).digest()[:8], "big")


def simhash(text):
    """64-bit SimHash over lowercased unigram + bigram token features.

    Weights are term frequencies; identical texts always map to identical
    fingerprints.
    """
    tokens = [
        t.text.lower()
        for t in textproc.tokenize(text)
        if t.kind != textproc.PUNCTUATION
    ]
    features = Counter(tokens)
    features.update(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    votes = [0] * 64
    for feature, weight in features.items():
        h = _feature_hash(feature)
        for bit in range(64):
            votes[bit] += weight if (h >> bit) & 1 else -weight
    fingerprint = 0
    for bit in range(64):
        if votes[bit] > 0:
            fingerprint |= 1 << bit
    return fingerprint


def hamming(a, b):
    return ((a ^ b) & ((1 << 64) - 1)).bit_count()


def dedup(recipes, max_hamming=DEFAULT_MAX_HAMMING):
    """Greedy near-duplicate removal over concatenated step text.

    Scans in input order; a recipe whose fingerprint is within max_hamming
    bits of an already-kept one is dropped (first occurrence wins).
    """
    if not 0 <= max_hamming <= 64:
        raise ValueError(f"max_hamming must be in [0, 64], got {max_hamming}")
    kept = []
    kept_fps = []
    for recipe in recipes:
        fp = simhash(" ".join(recipe.steps))
        if any(hamming(fp, other) <= max_hamming for other in kept_fps):
            continue
        kept.append(recipe)
        kept_fps.append(fp)
    return kept


def build_document(recipe, splitter=textproc.split_sentences):
    """Flatten a recipe into a Document.

    The text is the single-space join of the steps; gold breaks are the
    cumulative end offsets of steps 1..k-1; candidates are the splitter's
    sentence-end offsets minus the document-final one.
    """
    text = " ".join(recipe.steps)
    step_offsets = []
    pos = 0
    for step in recipe.steps[:-1]:
        pos += len(step)
        step_offsets.append(pos)
        pos += 1  # the join space
    try:
        spans = splitter(text)
    except Exception as exc:  # noqa: BLE001 - contract: name the recipe
        raise DocumentBuildError(recipe.id, f"sentence splitter failed: {exc}") from exc
    candidates = [sp.end for sp in spans if sp.end < len(text)]
    return Document(
        id=recipe.id,
        title=recipe.title,
        text=text,
        step_offsets=step_offsets,
        candidates=candidates,
        n_tokens=len(textproc.tokenize(text)),
        n_sentences=len(spans),
    )


def pool_threshold(annotated_docs):
    """Pooled sentences-per-step average over a document pool."""
    total_sentences = sum(d.n_sentences for d in annotated_docs)
    total_steps = sum(d.n_steps for d in annotated_docs)
    if total_steps == 0:
        raise SplitError("annotated pool is empty")
    return total_sentences / total_steps


def make_split(
    annotated,
    unannotated,
    ratio=DEFAULT_SPLIT_RATIO,
    seed=0,
    threshold=None,
):
    """Build the train/validation/test partition.

    The test set is the annotated pool. Train/validation come from the
    unannotated documents whose sentences-per-step ratio is <= threshold
    (default: pooled average of the annotated set), shuffled with the given
    seed and cut at `ratio`.
    """
    if not 0 < ratio < 1:
        raise SplitError(f"ratio must be in (0, 1), got {ratio}")
    if threshold is None:
        threshold = pool_threshold(annotated)
    test_ids = {d.id for d in annotated}
    eligible = [
        d
        for d in unannotated
        if d.id not in test_ids and d.sentences_per_step <= threshold
    ]
    if not eligible:
        raise SplitError("no unannotated documents pass the threshold")
    shuffled = list(eligible)
    random.Random(seed).shuffle(shuffled)
    n_train = int(round(ratio * len(shuffled)))
    n_train = min(max(n_train, 0), len(shuffled))
    return CorpusSplit(
        train=shuffled[:n_train],
        validation=shuffled[n_train:],
        test=list(annotated),
        threshold_sentences_per_step=threshold,
        seed=seed,
        ratio=ratio,
    )


def document_to_record(doc):
    return {
        "id": doc.id,
        "title": doc.title,
        "text": doc.text,
        "step_offsets": list(doc.step_offsets),
        "candidates": list(doc.candidates),
    }


def document_from_record(obj):
    text = obj["text"]
    return Document(
        id=obj["id"],
        title=obj.get("title", ""),
        text=text,
        step_offsets=list(obj["step_offsets"]),
        candidates=list(obj["candidates"]),
        n_tokens=len(textproc.tokenize(text)),
        n_sentences=len(textproc.split_sentences(text)),
    )


def save_corpus(docs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_record(doc), sort_keys=True) + "\n")


def load_corpus(path):
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                docs.append(document_from_record(json.loads(raw)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise IngestError(f"bad corpus record: {exc}", lineno) from exc
    return docs
