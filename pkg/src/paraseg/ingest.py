"""Parsing and serialization: datasets, labels, score files, split manifests.

All on-disk formats are UTF-8. Datasets, labels, and scores are
line-delimited JSON (one document per line); split manifests are a single
JSON document. Sentences are stored pre-tokenized so evaluation never
depends on tokenizer drift.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .core import (
    BoundaryLabels,
    ChapterSpan,
    Label,
    Level,
    SegmentedDocument,
    Transcript,
)
from .senttok import AbbreviationList, DEFAULT_ABBREVIATION_LIST, tokenize_sentences

_PARAGRAPH_SPLIT = re.compile(r"\n\s*\n\s*")


class DatasetFormatError(ValueError):
    """A file or record violates the dataset schema."""

    def __init__(self, message: str, line: int | None = None, doc_id: str | None = None):
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if doc_id is not None:
            prefix += f"doc {doc_id!r}: "
        super().__init__(prefix + message)
        self.line = line
        self.doc_id = doc_id


@dataclass(frozen=True, slots=True)
class ChapterRecord:
    """One chapter: an optional title and its paragraphs as sentence lists."""

    paragraphs: tuple[tuple[str, ...], ...]
    title: str | None = None

    def __post_init__(self) -> None:
        if not self.paragraphs:
            raise DatasetFormatError("chapter has no paragraphs")
        for para in self.paragraphs:
            if not para:
                raise DatasetFormatError("paragraph has no sentences")
            for sentence in para:
                if not sentence or not sentence.strip():
                    raise DatasetFormatError("empty sentence")


@dataclass(frozen=True, slots=True)
class DatasetRecord:
    """A document with gold paragraph (and possibly chapter) structure."""

    id: str
    chapters: tuple[ChapterRecord, ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise DatasetFormatError("record id is empty")
        if not self.chapters:
            raise DatasetFormatError("record has no chapters", doc_id=self.id)

    def sentence_texts(self) -> list[str]:
        return [s for ch in self.chapters for para in ch.paragraphs for s in para]

    @property
    def num_sentences(self) -> int:
        return len(self.sentence_texts())


def parse_plain_text(
    text: str,
    doc_id: str = "doc",
    abbreviations: AbbreviationList = DEFAULT_ABBREVIATION_LIST,
) -> DatasetRecord:
    """Parse a plain-text transcript into a single-chapter record.

    Any run of two or more newlines (blank lines may carry spaces) is one
    paragraph break; sentences come from the rule-based tokenizer.
    """
    if not text.strip():
        raise DatasetFormatError("empty document", doc_id=doc_id)
    paragraphs = []
    for block in _PARAGRAPH_SPLIT.split(text.strip()):
        if not block.strip():
            continue
        sentences = tokenize_sentences(block, abbreviations=abbreviations)
        paragraphs.append(tuple(s.text for s in sentences))
    return DatasetRecord(id=doc_id, chapters=(ChapterRecord(paragraphs=tuple(paragraphs)),))


def render_plain_text(record: DatasetRecord) -> str:
    """Render a record with sentences space-joined and paragraphs "\\n\\n"-joined.

    Chapter boundaries render as paragraph breaks; titles are not emitted
    (the plain-text format carries no chapter structure).
    """
    paragraphs = [
        " ".join(para) for ch in record.chapters for para in ch.paragraphs
    ]
    return "\n\n".join(paragraphs)


def record_to_json(record: DatasetRecord) -> str:
    """Canonical single-line JSON for a record (stable byte-for-byte)."""
    payload = {
        "id": record.id,
        "chapters": [
            {"title": ch.title, "paragraphs": [list(p) for p in ch.paragraphs]}
            for ch in record.chapters
        ],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def record_from_json(line: str, line_no: int | None = None) -> DatasetRecord:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"invalid JSON ({exc.msg})", line=line_no) from exc
    doc_id = payload.get("id") if isinstance(payload, dict) else None
    if not isinstance(payload, dict) or not isinstance(doc_id, str):
        raise DatasetFormatError("record must be an object with a string 'id'", line=line_no)
    chapters_raw = payload.get("chapters")
    if not isinstance(chapters_raw, list):
        raise DatasetFormatError("'chapters' must be a list", line=line_no, doc_id=doc_id)
    try:
        chapters = tuple(
            ChapterRecord(
                title=ch.get("title"),
                paragraphs=tuple(tuple(p) for p in ch.get("paragraphs", [])),
            )
            for ch in chapters_raw
        )
        return DatasetRecord(id=doc_id, chapters=chapters)
    except DatasetFormatError as exc:
        raise DatasetFormatError(str(exc), line=line_no, doc_id=doc_id) from exc
    except (AttributeError, TypeError) as exc:
        raise DatasetFormatError(f"malformed chapter structure: {exc}", line=line_no, doc_id=doc_id) from exc


def read_jsonl_dataset(path: str | Path) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if line.strip():
                records.append(record_from_json(line, line_no=line_no))
    return records


def write_jsonl_dataset(records: Iterable[DatasetRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record_to_json(record))
            handle.write("\n")


def gold_labels(record: DatasetRecord) -> BoundaryLabels:
    """Hierarchical gold labels: CHAP at chapter starts, PARA at paragraph starts."""
    labels: list[Label] = []
    first = True
    for chapter in record.chapters:
        first_para = True
        for para in chapter.paragraphs:
            if not first:
                labels.append(Label.CHAP if first_para else Label.PARA)
            first = False
            first_para = False
            labels.extend([Label.NONE] * (len(para) - 1))
    return BoundaryLabels(doc_id=record.id, level=Level.HIERARCHICAL, labels=tuple(labels))


def to_segmented_document(record: DatasetRecord) -> SegmentedDocument:
    """Assemble the in-memory document: transcript, gold labels, chapter spans."""
    transcript = Transcript.from_sentence_texts(record.id, record.sentence_texts())
    spans = []
    start = 0
    for chapter in record.chapters:
        size = sum(len(p) for p in chapter.paragraphs)
        spans.append(ChapterSpan(start=start, end=start + size, title=chapter.title))
        start += size
    return SegmentedDocument(
        transcript=transcript, gold=gold_labels(record), chapters=tuple(spans)
    )


# --- hypothesis labels interchange -------------------------------------------

def labels_to_json(labels: BoundaryLabels) -> str:
    payload = {
        "id": labels.doc_id,
        "level": labels.level.value,
        "labels": [int(lab) for lab in labels.labels],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def labels_from_json(line: str, line_no: int | None = None) -> BoundaryLabels:
    try:
        payload = json.loads(line)
        return BoundaryLabels(
            doc_id=payload["id"],
            level=Level(payload["level"]),
            labels=tuple(Label(v) for v in payload["labels"]),
        )
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise DatasetFormatError(f"malformed labels record: {exc}", line=line_no) from exc


def read_labels_file(path: str | Path) -> dict[str, BoundaryLabels]:
    out: dict[str, BoundaryLabels] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if line.strip():
                labels = labels_from_json(line, line_no=line_no)
                out[labels.doc_id] = labels
    return out


def write_labels_file(labels: Iterable[BoundaryLabels], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for item in labels:
            handle.write(labels_to_json(item))
            handle.write("\n")


# --- external model scores ----------------------------------------------------

@dataclass(frozen=True, slots=True)
class ScoreEntry:
    """Per-boundary break probabilities emitted by an external model."""

    doc_id: str
    level: Level
    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.level == Level.HIERARCHICAL:
            raise DatasetFormatError("score files are per binary level", doc_id=self.doc_id)
        for value in self.scores:
            if not 0.0 <= value <= 1.0:
                raise DatasetFormatError(
                    f"score {value} outside [0, 1]", doc_id=self.doc_id
                )


def read_score_file(path: str | Path) -> dict[str, ScoreEntry]:
    out: dict[str, ScoreEntry] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
                entry = ScoreEntry(
                    doc_id=payload["id"],
                    level=Level(payload["level"]),
                    scores=tuple(float(v) for v in payload["scores"]),
                )
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise DatasetFormatError(f"malformed score record: {exc}", line=line_no) from exc
            out[entry.doc_id] = entry
    return out


def write_score_file(entries: Iterable[ScoreEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            payload = {
                "id": entry.doc_id,
                "level": entry.level.value,
                "scores": list(entry.scores),
            }
            handle.write(json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":")))
            handle.write("\n")


# --- split manifests -----------------------------------------------------------

def read_split_manifest(path: str | Path) -> dict[str, list[str]]:
    """Load {partition: [doc ids]}; partitions must be disjoint."""
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise DatasetFormatError("split manifest must be a JSON object")
    manifest: dict[str, list[str]] = {}
    seen: dict[str, str] = {}
    for partition, ids in payload.items():
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise DatasetFormatError(f"partition {partition!r} must list string ids")
        for doc_id in ids:
            if doc_id in seen:
                raise DatasetFormatError(
                    f"doc {doc_id!r} appears in partitions {seen[doc_id]!r} and {partition!r}"
                )
            seen[doc_id] = partition
        manifest[partition] = list(ids)
    return manifest


def write_split_manifest(manifest: dict[str, list[str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")


def resolve_split(
    manifest: dict[str, list[str]], partition: str, records: list[DatasetRecord]
) -> list[DatasetRecord]:
    """Records of one partition, in manifest order; unknown ids are errors."""
    if partition not in manifest:
        raise DatasetFormatError(f"unknown partition {partition!r}")
    by_id = {r.id: r for r in records}
    missing = [i for i in manifest[partition] if i not in by_id]
    if missing:
        raise DatasetFormatError(f"ids not in dataset: {missing}")
    return [by_id[i] for i in manifest[partition]]
