"""Annotation file ingestion and the fallback linker."""

import json

import pytest

from evidencegraph.annotate import AnnotationSource, concept_node_id, load_annotations, naive_link
from evidencegraph.errors import ConfigError


def write(tmp_path, doc):
    path = tmp_path / "ann.json"
    path.write_text(json.dumps(doc))
    return path


class TestLoadAnnotations:
    def test_top_k_by_rank_score(self, tmp_path):
        doc = {
            "topic_concepts": [],
            "sentence_concepts": [
                {"surface": f"w{i}", "entity_id": f"Q{i}", "rank_score": i} for i in range(7)
            ],
        }
        got = load_annotations(write(tmp_path, doc), k_s=5, k_t=2)
        assert len(got) == 5
        assert [a.entity_id for a in got] == ["Q6", "Q5", "Q4", "Q3", "Q2"]

    def test_fewer_than_requested_takes_all(self, tmp_path):
        doc = {
            "topic_concepts": [{"surface": "gun", "entity_id": "Q801", "rank_score": 1.0}],
            "sentence_concepts": [],
        }
        got = load_annotations(write(tmp_path, doc), k_s=5, k_t=2)
        assert len(got) == 1
        assert got[0].source is AnnotationSource.TOPIC

    def test_two_sentence_concepts_fixture(self, tmp_path):
        doc = {
            "topic_concepts": [],
            "sentence_concepts": [
                {"surface": "offices", "entity_id": "Q12823105", "rank_score": 1.0},
                {"surface": "times", "entity_id": "Q11471", "rank_score": 0.9},
            ],
        }
        got = load_annotations(write(tmp_path, doc), k_s=5, k_t=2)
        assert [a.entity_id for a in got] == ["Q12823105", "Q11471"]

    def test_rank_ties_break_by_entity_id(self, tmp_path):
        doc = {
            "topic_concepts": [],
            "sentence_concepts": [
                {"surface": "b", "entity_id": "Q2", "rank_score": 1.0},
                {"surface": "a", "entity_id": "Q1", "rank_score": 1.0},
            ],
        }
        got = load_annotations(write(tmp_path, doc), k_s=1, k_t=0)
        assert got[0].entity_id == "Q1"

    def test_malformed_json_is_typed(self, tmp_path):
        path = tmp_path / "ann.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            load_annotations(path, 5, 2)


class TestNaiveLink:
    TABLE = {"gun": "Q801", "gun control": "Q9999", "control": "Q810"}

    def test_exact_lowercase_match(self):
        got = naive_link("Guns? No: gun control now", self.TABLE, AnnotationSource.SENTENCE)
        surfaces = {a.surface for a in got}
        assert "gun control" in surfaces  # longest match found
        assert "gun" in surfaces
        assert "control" in surfaces

    def test_longer_matches_rank_higher(self):
        got = naive_link("gun control", self.TABLE, AnnotationSource.TOPIC)
        assert got[0].surface == "gun control"
        assert got[0].rank_score == 2.0

    def test_no_match_empty(self):
        assert naive_link("nothing relevant here", self.TABLE, AnnotationSource.SENTENCE) == []


class TestConceptNodeId:
    def test_normalizes_case_and_spacing(self):
        assert concept_node_id("Gun  Control") == concept_node_id("gun control")

    def test_distinct_surfaces_distinct_nodes(self):
        assert concept_node_id("gun") != concept_node_id("guns")
