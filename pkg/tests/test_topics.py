"""Preprocessing, the Gibbs sampler, TF-IDF ranking, and end-to-end selection."""

import math

import numpy as np
import pytest

from evidencegraph.errors import EmptyCorpusError
from evidencegraph.graph import EntityRef
from evidencegraph.text import DEFAULT_STOPWORDS, preprocess
from evidencegraph.topics import (
    GibbsSampler,
    PropertyDescription,
    SelectionConfig,
    load_articles,
    rank_by_tfidf,
    select_properties,
    top_topic_words,
    train_lda,
)

STOP = DEFAULT_STOPWORDS


def entity(eid):
    return EntityRef(id=eid, label=eid, tokens=(eid.lower(),))


class TestPreprocess:
    def test_plural_and_stopword_handling(self):
        assert preprocess("Offices are rooms.", STOP) == ["office", "room"]

    def test_numeric_tokens_removed(self):
        assert preprocess("2020 2020 2020", STOP) == []

    def test_normal_form_unchanged(self):
        tokens = ["office", "room", "law"]
        assert preprocess(" ".join(tokens), STOP) == tokens

    def test_suffix_rules(self):
        assert preprocess("studies boxes churches laws", STOP) == ["study", "box", "church", "law"]


class TestLoadArticles:
    def test_all_present(self, tmp_path):
        for name in ("Q1", "Q2", "Q3"):
            (tmp_path / f"{name}.txt").write_text(f"article for {name}")
        docs, missing = load_articles([entity("Q1"), entity("Q2"), entity("Q3")], tmp_path)
        assert len(docs) == 3
        assert missing == 0

    def test_missing_file_skipped_with_count(self, tmp_path):
        for name in ("Q1", "Q3"):
            (tmp_path / f"{name}.txt").write_text("text")
        docs, missing = load_articles([entity("Q1"), entity("Q2"), entity("Q3")], tmp_path)
        assert len(docs) == 2
        assert missing == 1

    def test_empty_directory(self, tmp_path):
        docs, missing = load_articles([entity("Q1")], tmp_path)
        assert docs == []
        assert missing == 1


class TestTrainLda:
    def test_single_topic_doc_rows_are_one(self):
        corpus = [["law", "gun", "law"], ["school", "uniform"]]
        model = train_lda(corpus, SelectionConfig(num_topics=1, lda_iterations=5, seed=1))
        assert np.allclose(model.doc_topic, 1.0)

    def test_same_seed_same_model(self):
        corpus = [["law", "gun", "law", "crime"], ["school", "uniform", "dress"]]
        cfg = SelectionConfig(num_topics=2, lda_iterations=30, seed=9)
        a = train_lda(corpus, cfg)
        b = train_lda(corpus, cfg)
        assert np.array_equal(a.topic_word, b.topic_word)
        assert np.array_equal(a.doc_topic, b.doc_topic)

    def test_rows_are_stochastic(self):
        corpus = [["law", "gun"], ["school", "uniform", "school"]]
        model = train_lda(corpus, SelectionConfig(num_topics=3, lda_iterations=10, seed=4))
        assert np.allclose(model.topic_word.sum(axis=1), 1.0, atol=1e-9)
        assert np.allclose(model.doc_topic.sum(axis=1), 1.0, atol=1e-9)
        assert (model.topic_word >= 0).all() and (model.doc_topic >= 0).all()

    def test_separable_corpus_recovers_word_blocks(self):
        """Two documents over disjoint vocabularies must separate into two topics."""
        block_a = ["gun", "law", "crime", "police", "safety"]
        block_b = ["school", "uniform", "dress", "student", "teacher"]
        rng = np.random.default_rng(0)
        corpus = [
            list(rng.choice(block_a, size=60)),
            list(rng.choice(block_b, size=60)),
        ]
        model = train_lda(corpus, SelectionConfig(num_topics=2, lda_iterations=200, seed=3))
        tops = []
        for k in range(2):
            order = np.argsort(-model.topic_word[k])
            tops.append({model.vocabulary[i] for i in order[:5]})
        assert tops[0] in ({*block_a}, {*block_b})
        assert tops[1] in ({*block_a}, {*block_b})
        assert tops[0] != tops[1]

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            train_lda([], SelectionConfig(num_topics=2, lda_iterations=1))
        with pytest.raises(EmptyCorpusError):
            train_lda([[], []], SelectionConfig(num_topics=2, lda_iterations=1))

    def test_sweep_conserves_assignment_counts(self):
        corpus = [["law", "gun", "crime"], ["school", "uniform"]]
        sampler = GibbsSampler(corpus, num_topics=3, seed=5)
        total = sum(len(d) for d in corpus)
        assert sampler.total_assigned == total
        for _ in range(5):
            sampler.sweep()
            assert sampler.total_assigned == total
            assert sampler.n_kt.sum() == total
            assert sampler.n_mk.sum() == total


class TestTopTopicWords:
    def model(self, rows, vocab):
        from evidencegraph.topics import TopicModel

        return TopicModel(
            topic_word=np.asarray(rows, dtype=np.float64),
            doc_topic=np.ones((1, len(rows))) / len(rows),
            vocabulary=vocab,
        )

    def test_single_topic_top_two(self):
        m = self.model([[0.5, 0.3, 0.2]], ["law", "gun", "safety"])
        assert top_topic_words(m, 2, STOP) == ["law", "gun"]

    def test_duplicate_across_topics_appears_once(self):
        m = self.model([[0.6, 0.4, 0.0], [0.7, 0.0, 0.3]], ["law", "gun", "crime"])
        assert top_topic_words(m, 2, STOP) == ["law", "gun", "crime"]

    def test_stopword_excluded_even_when_ranked_first(self):
        m = self.model([[0.9, 0.1]], ["the", "law"])
        assert top_topic_words(m, 1, STOP) == []


DESCRIPTIONS = [
    PropertyDescription("P1", "subclass of", "next class in a hierarchy of items", 5000),
    PropertyDescription("P2", "part of", "object of which the subject is a part", 4000),
    PropertyDescription("P3", "color", "color of the subject", 100),
]


class TestRankByTfidf:
    def test_absent_word_scores_zero(self):
        assert rank_by_tfidf(["zebra"], DESCRIPTIONS, 0.001) == []

    def test_word_in_every_description_scores_zero(self):
        # "subject" occurs in descriptions of P2 and P3; craft one in all three
        descs = [
            PropertyDescription("P1", "x", "alpha beta", 1),
            PropertyDescription("P2", "x", "alpha gamma", 1),
        ]
        assert rank_by_tfidf(["alpha"], descs, 0.001) == []

    def test_hand_computed_threshold_boundary(self):
        """One word twice in one of three documents scores 2 ln 3."""
        descs = [
            PropertyDescription("P1", "", "zebra crossing zebra", 1),
            PropertyDescription("P2", "", "nothing here", 1),
            PropertyDescription("P3", "", "also nothing", 1),
        ]
        expected = 2 * math.log(3)
        assert abs(expected - 2.1972) < 1e-4
        assert rank_by_tfidf(["zebra"], descs, 2.0) == ["zebra"]
        assert rank_by_tfidf(["zebra"], descs, 2.5) == []


class TestSelectProperties:
    def write_articles(self, tmp_path, texts):
        for eid, text in texts.items():
            (tmp_path / f"{eid}.txt").write_text(text)

    def test_no_ranked_word_empty_selection(self, tmp_path):
        self.write_articles(tmp_path, {"Q1": "zebra zebra zebra zebra"})
        cfg = SelectionConfig(
            tfidf_threshold=99.0, count_threshold=10, num_topics=1, lda_iterations=5, seed=1
        )
        got = select_properties([entity("Q1")], DESCRIPTIONS, cfg, tmp_path, STOP)
        assert got == []

    def test_single_matching_property(self, tmp_path):
        self.write_articles(tmp_path, {"Q1": "hierarchy hierarchy class items hierarchy"})
        cfg = SelectionConfig(
            tfidf_threshold=0.1, count_threshold=10, num_topics=1, lda_iterations=5, seed=1
        )
        got = select_properties([entity("Q1")], DESCRIPTIONS, cfg, tmp_path, STOP)
        assert got == ["P1"]

    def test_fixture_count_and_occurrence_filtering(self, tmp_path):
        """8 properties, 5 contain ranked words, 4 clear the count floor."""
        descs = [
            PropertyDescription("P10", "alpha link", "alpha alpha alpha", 100),
            PropertyDescription("P11", "alpha tie", "alpha alpha", 100),
            PropertyDescription("P12", "alpha one", "alpha", 100),
            PropertyDescription("P13", "beta only", "beta beta beta beta", 100),
            PropertyDescription("P14", "alpha poor", "alpha", 5),  # fails count floor
            PropertyDescription("P15", "nothing", "unrelated text", 100),
            PropertyDescription("P16", "empty", "other words", 100),
            PropertyDescription("P17", "misc", "irrelevant", 100),
        ]
        self.write_articles(tmp_path, {"Q1": "alpha alpha alpha beta beta gamma"})
        cfg = SelectionConfig(
            tfidf_threshold=0.1,
            count_threshold=10,
            num_topics=1,
            num_properties=8,
            lda_iterations=10,
            words_per_topic=3,
            seed=2,
        )
        got = select_properties([entity("Q1")], descs, cfg, tmp_path, STOP)
        # occurrences over label+description: P13 5x beta, P10 4x alpha,
        # P11 3x alpha, P12 2x alpha; P14 matches but fails the count floor
        assert got == ["P13", "P10", "P11", "P12"]
        counts = {d.id: d.count for d in descs}
        assert all(counts[p] > cfg.count_threshold for p in got)

    def test_deterministic_across_runs(self, tmp_path):
        self.write_articles(
            tmp_path,
            {
                "Q1": "hierarchy class items part object subject",
                "Q2": "part object subject hierarchy hierarchy",
            },
        )
        cfg = SelectionConfig(
            tfidf_threshold=0.1, count_threshold=10, num_topics=2, lda_iterations=20, seed=7
        )
        runs = [
            select_properties([entity("Q1"), entity("Q2")], DESCRIPTIONS, cfg, tmp_path, STOP)
            for _ in range(5)
        ]
        assert all(r == runs[0] for r in runs)
        assert len(runs[0]) <= cfg.num_properties
