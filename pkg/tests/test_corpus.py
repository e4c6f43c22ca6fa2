import hashlib
import json
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from convseg import corpus, textproc
from convseg.errors import (
    DocumentBuildError,
    DuplicateIdError,
    IngestError,
    SplitError,
)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


VALID = [
    {"id": "a", "title": "A", "steps": ["Mix well.", "Bake it.", "Serve hot."]},
    {"id": "b", "title": "B", "steps": [" Stir. ", "Cool down."], "annotated": True},
]


class TestIngest:
    def test_valid_file(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        write_jsonl(path, VALID)
        recipes = corpus.ingest(path)
        assert len(recipes) == 2
        assert recipes[0].id == "a"
        assert recipes[1].annotated is True
        assert recipes[1].steps[0] == "Stir."  # whitespace trimmed

    def test_missing_steps_reports_line(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        write_jsonl(path, [VALID[0], {"id": "c", "title": "C"}])
        with pytest.raises(IngestError) as exc:
            corpus.ingest(path)
        assert exc.value.line_number == 2

    def test_empty_file(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        path.write_text("")
        assert corpus.ingest(path) == []

    def test_duplicate_id_names_it(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        write_jsonl(path, [VALID[0], VALID[0]])
        with pytest.raises(DuplicateIdError) as exc:
            corpus.ingest(path)
        assert "'a'" in str(exc.value)

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        path.write_text(json.dumps(VALID[0]) + "\n{not json\n")
        with pytest.raises(IngestError) as exc:
            corpus.ingest(path)
        assert exc.value.line_number == 2


class TestFilterMinSteps:
    def test_below_threshold_removed(self):
        short = corpus.RawRecipe("s", "S", ["One.", "Two."])
        exact = corpus.RawRecipe("e", "E", ["One.", "Two.", "Three."])
        assert corpus.filter_min_steps([short, exact], 3) == [exact]

    def test_empty(self):
        assert corpus.filter_min_steps([], 3) == []

    def test_invalid_min_steps(self):
        with pytest.raises(ValueError):
            corpus.filter_min_steps([], 0)


def simhash_oracle(text):
    """Reference SimHash: direct weighted bit-vote construction."""
    toks = [
        t.text.lower() for t in textproc.tokenize(text) if t.kind != "punctuation"
    ]
    feats = Counter(toks) + Counter(f"{a} {b}" for a, b in zip(toks, toks[1:]))
    fp = 0
    for bit in range(64):
        vote = 0
        for feat, w in feats.items():
            h = int.from_bytes(hashlib.md5(feat.encode()).digest()[:8], "big")
            vote += w if (h >> bit) & 1 else -w
        if vote > 0:
            fp |= 1 << bit
    return fp


class TestSimhash:
    def test_deterministic(self):
        s = "preheat oven to 190"
        assert corpus.simhash(s) == corpus.simhash(s)
        assert corpus.hamming(corpus.simhash(s), corpus.simhash(s)) == 0

    def test_matches_brute_force_oracle(self):
        rng = random.Random(7)
        for _ in range(20):
            text = " ".join(rng.choices(helpers.CONTENT_WORDS, k=rng.randint(5, 60)))
            assert corpus.simhash(text) == simhash_oracle(text)

    def test_single_token_edit_small_distance(self):
        rng = random.Random(3)
        words = rng.choices(helpers.CONTENT_WORDS, k=200)
        edited = list(words)
        edited[100] = "zzzreplacement"
        d = corpus.hamming(
            simhash_oracle(" ".join(words)), simhash_oracle(" ".join(edited))
        )
        assert d <= corpus.DEFAULT_MAX_HAMMING
        assert corpus.hamming(
            corpus.simhash(" ".join(words)), corpus.simhash(" ".join(edited))
        ) == d


class TestDedup:
    def test_exact_duplicate_dropped(self):
        a = corpus.RawRecipe("a", "A", ["Mix well.", "Bake.", "Serve."])
        b = corpus.RawRecipe("b", "B", ["Mix well.", "Bake.", "Serve."])
        assert [r.id for r in corpus.dedup([a, b], 3)] == ["a"]

    def test_unrelated_texts_kept(self):
        a = corpus.RawRecipe("a", "A", ["Chop the onions finely.", "Saute in butter.", "Season well."])
        b = corpus.RawRecipe("b", "B", ["Install the widget bracket.", "Tighten every bolt.", "Check torque."])
        d = corpus.hamming(
            simhash_oracle(" ".join(a.steps)), simhash_oracle(" ".join(b.steps))
        )
        assert d > 3  # oracle confirms the fingerprints are far apart
        assert corpus.dedup([a, b], 3) == [a, b]

    def test_empty(self):
        assert corpus.dedup([], 3) == []

    def test_idempotent(self):
        recipes = helpers.make_corpus(11, 30)
        recipes += [
            corpus.RawRecipe(f"{r.id}-copy", r.title, list(r.steps))
            for r in recipes[:5]
        ]
        once = corpus.dedup(recipes, 3)
        assert corpus.dedup(once, 3) == once

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            corpus.dedup([], 65)


class TestBuildDocument:
    def test_offset_arithmetic(self):
        r = corpus.RawRecipe("r", "R", ["A b.", "C d."])
        doc = corpus.build_document(r)
        assert doc.text == "A b. C d."
        assert doc.step_offsets == [len("A b.")]

    def test_three_steps_two_breaks(self):
        r = corpus.RawRecipe("r", "R", ["Mix it.", "Bake it.", "Serve it."])
        doc = corpus.build_document(r)
        assert len(doc.step_offsets) == 2
        assert doc.n_steps == 3

    def test_gold_break_can_miss_candidates(self):
        # A step ending without a sentence terminator: the splitter finds no
        # sentence end there, so the gold break is not a candidate.
        r = corpus.RawRecipe("r", "R", ["Mix the batter", "Bake it.", "Serve it."])
        doc = corpus.build_document(r)
        assert doc.step_offsets[0] not in doc.candidates

    def test_final_offset_excluded(self):
        r = corpus.RawRecipe("r", "R", ["Mix it.", "Bake it."])
        doc = corpus.build_document(r)
        assert len(doc.text) not in doc.candidates
        assert len(doc.text) not in doc.step_offsets

    def test_splitter_failure_names_recipe(self):
        def broken(_text):
            raise RuntimeError("boom")

        r = corpus.RawRecipe("rid-9", "R", ["Mix it.", "Bake it."])
        with pytest.raises(DocumentBuildError, match="rid-9"):
            corpus.build_document(r, splitter=broken)

    def test_candidates_follow_terminators(self):
        for doc in helpers.make_documents(5, 20):
            for c in doc.candidates:
                assert doc.text[c - 1] in textproc.TERMINATORS

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_round_trip_property(self, seed):
        rng = random.Random(seed)
        recipe = helpers.make_recipe(rng, "r")
        doc = corpus.build_document(recipe)
        assert doc.step_texts() == recipe.steps
        assert doc.n_steps == len(recipe.steps)
        assert doc.step_offsets == sorted(doc.step_offsets)
        assert all(0 < off < len(doc.text) for off in doc.step_offsets)


class TestMakeSplit:
    def _pools(self):
        annotated = helpers.make_documents(21, 20, prefix="gold", max_sentences_per_step=2)
        unannotated = helpers.make_documents(22, 100, max_sentences_per_step=3)
        return annotated, unannotated

    def test_threshold_rule(self):
        annotated, unannotated = self._pools()
        split = corpus.make_split(annotated, unannotated, seed=1, threshold=1.59)
        for doc in split.train + split.validation:
            assert doc.sentences_per_step <= 1.59
        assert split.test == annotated

    def test_eligibility_boundary(self):
        # ratio 1.5 is eligible at threshold 1.59, ratio 3.0 is not
        gold = helpers.make_documents(31, 1, prefix="gold")
        ok = corpus.Document("ok", "", "x", [1, 2, 3], [], n_sentences=6)
        bad = corpus.Document("bad", "", "x", [1, 2], [], n_sentences=9)
        assert ok.sentences_per_step == 1.5
        assert bad.sentences_per_step == 3.0
        split = corpus.make_split(
            gold, [ok, bad], seed=0, threshold=1.59, ratio=0.5
        )
        ids = {d.id for d in split.train + split.validation}
        assert ids == {"ok"}

    def test_deterministic(self):
        annotated, unannotated = self._pools()
        a = corpus.make_split(annotated, unannotated, seed=42)
        b = corpus.make_split(annotated, unannotated, seed=42)
        assert [d.id for d in a.train] == [d.id for d in b.train]
        assert [d.id for d in a.validation] == [d.id for d in b.validation]

    def test_partitions_disjoint(self):
        annotated, unannotated = self._pools()
        split = corpus.make_split(annotated, unannotated, seed=3)
        train = {d.id for d in split.train}
        val = {d.id for d in split.validation}
        test = {d.id for d in split.test}
        assert not train & val
        assert not train & test
        assert not val & test

    def test_ratio(self):
        gold = helpers.make_documents(31, 5, prefix="gold")
        docs = helpers.make_documents(30, 100, max_sentences_per_step=1)
        split = corpus.make_split(gold, docs, seed=0, ratio=0.82, threshold=10.0)
        assert len(split.train) == 82
        assert len(split.validation) == 18

    def test_empty_pool_errors(self):
        annotated, _ = self._pools()
        with pytest.raises(SplitError):
            corpus.make_split(annotated, [], seed=0, threshold=1.59)


def test_corpus_file_round_trip(tmp_path):
    docs = helpers.make_documents(8, 10)
    path = tmp_path / "corpus.jsonl"
    corpus.save_corpus(docs, path)
    loaded = corpus.load_corpus(path)
    assert [d.id for d in loaded] == [d.id for d in docs]
    assert [d.text for d in loaded] == [d.text for d in docs]
    assert [d.candidates for d in loaded] == [d.candidates for d in docs]
    assert [d.n_sentences for d in loaded] == [d.n_sentences for d in docs]
