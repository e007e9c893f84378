"""Dataset parsing/serialization tests: round trips, gold labels, errors."""

import json

import pytest

from paraseg.core import Label, Level
from paraseg.ingest import (
    ChapterRecord,
    DatasetFormatError,
    DatasetRecord,
    ScoreEntry,
    gold_labels,
    labels_from_json,
    labels_to_json,
    parse_plain_text,
    read_jsonl_dataset,
    read_labels_file,
    read_score_file,
    read_split_manifest,
    record_from_json,
    record_to_json,
    render_plain_text,
    resolve_split,
    to_segmented_document,
    write_jsonl_dataset,
    write_labels_file,
    write_score_file,
    write_split_manifest,
)


def single_chapter(*paragraphs):
    return DatasetRecord(
        id="doc", chapters=(ChapterRecord(paragraphs=tuple(paragraphs)),)
    )


class TestPlainText:
    def test_blank_line_splits_paragraphs(self):
        record = parse_plain_text("A. B.\n\nC.")
        assert record.chapters[0].paragraphs == (("A.", "B."), ("C.",))

    def test_single_sentence(self):
        record = parse_plain_text("A.")
        assert record.chapters[0].paragraphs == (("A.",),)

    def test_newline_runs_collapse_to_one_break(self):
        record = parse_plain_text("A.\n\n\n\nB.")
        assert record.chapters[0].paragraphs == (("A.",), ("B.",))

    def test_empty_input_rejected(self):
        with pytest.raises(DatasetFormatError):
            parse_plain_text("\n  \n")

    def test_render_inverts_parse(self):
        for text in ("A. B.\n\nC.", "A.", "A.\n\nB."):
            assert render_plain_text(parse_plain_text(text)) == text

    def test_parse_inverts_render(self):
        record = single_chapter(("One two.", "Three."), ("Four!",))
        assert parse_plain_text(render_plain_text(record), doc_id="doc") == record


class TestJsonl:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert read_jsonl_dataset(path) == []

    def test_canonical_rewrite_is_stable(self, tmp_path):
        record = single_chapter(("A.", "B."), ("C.",))
        path = tmp_path / "data.jsonl"
        write_jsonl_dataset([record], path)
        first = path.read_bytes()
        write_jsonl_dataset(read_jsonl_dataset(path), path)
        assert path.read_bytes() == first

    def test_roundtrip_preserves_records(self, tmp_path):
        records = [
            single_chapter(("A.", "B."), ("C.",)),
            DatasetRecord(
                id="two-chapters",
                chapters=(
                    ChapterRecord(paragraphs=(("X.",),), title="intro"),
                    ChapterRecord(paragraphs=(("Y.", "Z."),), title="body"),
                ),
            ),
        ]
        path = tmp_path / "data.jsonl"
        write_jsonl_dataset(records, path)
        assert read_jsonl_dataset(path) == records

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "ok", "chapters": []}\nnot json\n', encoding="utf-8")
        with pytest.raises(DatasetFormatError) as err:
            read_jsonl_dataset(path)
        assert "line 1" in str(err.value)

    def test_empty_paragraph_rejected(self):
        line = json.dumps({"id": "d", "chapters": [{"title": None, "paragraphs": [[]]}]})
        with pytest.raises(DatasetFormatError):
            record_from_json(line)

    def test_record_json_is_one_line(self):
        record = single_chapter(("A.",))
        encoded = record_to_json(record)
        assert "\n" not in encoded
        assert record_from_json(encoded) == record


class TestGoldLabels:
    def test_paragraph_break_only(self):
        record = single_chapter(("A.", "B."), ("C.",))
        assert gold_labels(record).labels == (Label.NONE, Label.PARA)

    def test_chapter_seam(self):
        record = DatasetRecord(
            id="d",
            chapters=(
                ChapterRecord(paragraphs=(("A.",),)),
                ChapterRecord(paragraphs=(("B.",),)),
            ),
        )
        assert gold_labels(record).labels == (Label.CHAP,)

    def test_no_breaks_inside_paragraph(self):
        record = single_chapter(("A.", "B.", "C."),)
        assert gold_labels(record).labels == (Label.NONE, Label.NONE)

    def test_break_count_matches_paragraph_count(self):
        record = DatasetRecord(
            id="d",
            chapters=(
                ChapterRecord(paragraphs=(("A.", "B."), ("C.",))),
                ChapterRecord(paragraphs=(("D.",), ("E.", "F."))),
            ),
        )
        gold = gold_labels(record)
        paragraphs = sum(len(ch.paragraphs) for ch in record.chapters)
        assert len(gold.positive_positions(Level.PARAGRAPH)) == paragraphs - 1

    def test_segmented_document_assembly(self):
        record = DatasetRecord(
            id="d",
            chapters=(
                ChapterRecord(paragraphs=(("A.", "B."),), title="one"),
                ChapterRecord(paragraphs=(("C.",),), title="two"),
            ),
        )
        doc = to_segmented_document(record)
        assert doc.transcript.num_sentences == 3
        assert [(s.start, s.end) for s in doc.chapters] == [(0, 2), (2, 3)]
        assert doc.gold.labels == (Label.NONE, Label.CHAP)


class TestLabelsFile:
    def test_roundtrip(self, tmp_path):
        labels = [
            labels_from_json(
                json.dumps({"id": "a", "level": "paragraph", "labels": [0, 1, 0]})
            ),
            labels_from_json(
                json.dumps({"id": "b", "level": "hierarchical", "labels": [2, 0]})
            ),
        ]
        path = tmp_path / "labels.jsonl"
        write_labels_file(labels, path)
        loaded = read_labels_file(path)
        assert loaded["a"].labels == (Label.NONE, Label.PARA, Label.NONE)
        assert loaded["b"].level == Level.HIERARCHICAL

    def test_bad_label_value(self):
        with pytest.raises(DatasetFormatError):
            labels_from_json(json.dumps({"id": "a", "level": "paragraph", "labels": [3]}))

    def test_json_is_canonical(self):
        line = json.dumps(
            {"id": "a", "labels": [0, 1], "level": "paragraph"},
            sort_keys=True,
            separators=(",", ":"),
        )
        assert labels_to_json(labels_from_json(line)) == line


class TestScoreFile:
    def test_roundtrip(self, tmp_path):
        entries = [ScoreEntry("a", Level.PARAGRAPH, (0.1, 0.9, 0.5))]
        path = tmp_path / "scores.jsonl"
        write_score_file(entries, path)
        assert read_score_file(path)["a"].scores == (0.1, 0.9, 0.5)

    def test_score_range_enforced(self):
        with pytest.raises(DatasetFormatError):
            ScoreEntry("a", Level.PARAGRAPH, (1.2,))

    def test_hierarchical_scores_rejected(self):
        with pytest.raises(DatasetFormatError):
            ScoreEntry("a", Level.HIERARCHICAL, (0.5,))


class TestSplitManifest:
    def test_roundtrip_and_resolution(self, tmp_path):
        manifest = {"train": ["a"], "test": ["b"]}
        path = tmp_path / "split.json"
        write_split_manifest(manifest, path)
        loaded = read_split_manifest(path)
        assert loaded == manifest
        records = [
            DatasetRecord(id=i, chapters=(ChapterRecord(paragraphs=(("X.",),)),))
            for i in ("a", "b")
        ]
        assert [r.id for r in resolve_split(loaded, "test", records)] == ["b"]

    def test_overlapping_partitions_rejected(self, tmp_path):
        path = tmp_path / "split.json"
        path.write_text(json.dumps({"train": ["a"], "test": ["a"]}), encoding="utf-8")
        with pytest.raises(DatasetFormatError):
            read_split_manifest(path)

    def test_unresolved_ids_rejected(self):
        with pytest.raises(DatasetFormatError):
            resolve_split({"train": ["ghost"]}, "train", [])
