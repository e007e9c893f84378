"""Shared data model: transcripts, sentences, and boundary labels.

All modules use the same boundary indexing: the gap between sentences
``i`` and ``i + 1`` is boundary position ``i`` (0-based), so a document
with ``m`` sentences has ``m - 1`` boundary positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

PARAGRAPH_DELIMITER = "\n\n"


class Level(str, Enum):
    """Granularity of a segmentation."""

    PARAGRAPH = "paragraph"
    CHAPTER = "chapter"
    HIERARCHICAL = "hierarchical"


class Label(IntEnum):
    """Per-boundary decision. CHAP implies a paragraph break when projected."""

    NONE = 0
    PARA = 1
    CHAP = 2


class LevelMismatchError(ValueError):
    """Raised when labels cannot be read at the requested level."""


def normalize_whitespace(text: str) -> str:
    """Collapse every whitespace run to a single space and strip the ends."""
    return " ".join(text.split())


@dataclass(frozen=True, slots=True)
class Sentence:
    """One sentence of a transcript.

    ``final_punct`` is the terminal punctuation character when the sentence
    ends in one (possibly a closing quote/paren carried by a terminal), else
    ``None`` for unpunctuated ASR-style sentences.
    """

    text: str
    index: int
    final_punct: str | None = None

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise ValueError(f"sentence {self.index} is empty")
        if PARAGRAPH_DELIMITER in self.text:
            raise ValueError(f"sentence {self.index} contains a paragraph delimiter")
        if self.text != self.text.strip():
            raise ValueError(f"sentence {self.index} has leading/trailing whitespace")
        if self.final_punct is not None and self.final_punct != self.text[-1]:
            raise ValueError(
                f"sentence {self.index}: final_punct {self.final_punct!r} does not "
                f"match last character {self.text[-1]!r}"
            )
        if self.index < 0:
            raise ValueError("sentence index must be non-negative")


@dataclass(frozen=True, slots=True)
class Transcript:
    """Verbatim transcript text plus its sentence tokenization."""

    id: str
    text: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self) -> None:
        if self.text.strip() and not self.sentences:
            raise ValueError(f"transcript {self.id!r} has text but no sentences")
        joined = normalize_whitespace(" ".join(s.text for s in self.sentences))
        if joined != normalize_whitespace(self.text):
            raise ValueError(
                f"transcript {self.id!r}: sentence concatenation does not "
                "reproduce the whitespace-normalized text"
            )
        for i, sentence in enumerate(self.sentences):
            if sentence.index != i:
                raise ValueError(f"transcript {self.id!r}: sentence indices not contiguous")

    @classmethod
    def from_sentence_texts(cls, doc_id: str, texts: list[str] | tuple[str, ...]) -> Transcript:
        """Build a transcript whose text is the single-space join of ``texts``."""
        from .senttok import final_punct_of  # deferred: senttok imports core

        sentences = tuple(
            Sentence(text=t.strip(), index=i, final_punct=final_punct_of(t.strip()))
            for i, t in enumerate(texts)
        )
        return cls(id=doc_id, text=" ".join(s.text for s in sentences), sentences=sentences)

    @property
    def num_sentences(self) -> int:
        return len(self.sentences)

    @property
    def num_boundaries(self) -> int:
        return max(0, len(self.sentences) - 1)


_ALLOWED = {
    Level.PARAGRAPH: {Label.NONE, Label.PARA},
    Level.CHAPTER: {Label.NONE, Label.CHAP},
    Level.HIERARCHICAL: {Label.NONE, Label.PARA, Label.CHAP},
}


@dataclass(frozen=True, slots=True)
class BoundaryLabels:
    """A segmentation: one label per boundary position of a document."""

    doc_id: str
    level: Level
    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        allowed = _ALLOWED[self.level]
        for pos, label in enumerate(self.labels):
            if label not in allowed:
                raise ValueError(
                    f"doc {self.doc_id!r}: label {label.name} at position {pos} "
                    f"not allowed at level {self.level.value}"
                )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def num_sentences(self) -> int:
        return len(self.labels) + 1

    def positive_positions(self, level: Level | None = None) -> tuple[int, ...]:
        """Boundary positions that are breaks at ``level`` (default: own level)."""
        level = self.level if level is None else level
        positive = _positive_predicate(self.level, level)
        return tuple(i for i, lab in enumerate(self.labels) if positive(lab))


def _positive_predicate(own: Level, requested: Level):
    """Which labels count as breaks when reading ``own``-level labels at ``requested``."""
    if requested == own:
        return lambda lab: lab != Label.NONE
    if own == Level.HIERARCHICAL:
        if requested == Level.PARAGRAPH:
            return lambda lab: lab != Label.NONE  # CHAP projects to a paragraph break
        if requested == Level.CHAPTER:
            return lambda lab: lab == Label.CHAP
    raise LevelMismatchError(
        f"cannot read {own.value}-level labels at level {requested.value}"
    )


def labels_to_masses(labels: BoundaryLabels, level: Level | None = None) -> list[int]:
    """Segment lengths (in sentences) induced by the breaks at ``level``.

    Masses sum to the sentence count; a document with B breaks yields
    B + 1 masses. A single-sentence document ([] labels) yields [1].
    """
    level = labels.level if level is None else level
    breaks = labels.positive_positions(level)
    masses: list[int] = []
    prev = -1
    for pos in breaks:
        masses.append(pos - prev)
        prev = pos
    masses.append(labels.num_sentences - 1 - prev)
    return masses


def masses_to_labels(
    masses: list[int] | tuple[int, ...], level: Level, doc_id: str = ""
) -> BoundaryLabels:
    """Inverse of :func:`labels_to_masses` for a binary level."""
    if level == Level.HIERARCHICAL:
        raise LevelMismatchError("masses are binary; use paragraph or chapter level")
    if not masses:
        raise ValueError("mass sequence must be non-empty")
    if any(m < 1 for m in masses):
        raise ValueError("every mass must be at least 1")
    positive = Label.PARA if level == Level.PARAGRAPH else Label.CHAP
    total = sum(masses)
    labels = [Label.NONE] * (total - 1)
    position = -1
    for mass in masses[:-1]:
        position += mass
        labels[position] = positive
    return BoundaryLabels(doc_id=doc_id, level=level, labels=tuple(labels))


def project_hierarchical(labels: BoundaryLabels, target_level: Level) -> BoundaryLabels:
    """Project a 3-class hierarchical segmentation onto one binary level.

    Chapter view keeps only CHAP; paragraph view maps both PARA and CHAP
    to breaks (a chapter start is also a paragraph start).
    """
    if labels.level != Level.HIERARCHICAL:
        raise LevelMismatchError("projection requires hierarchical labels")
    if target_level == Level.HIERARCHICAL:
        return labels
    positive = Label.PARA if target_level == Level.PARAGRAPH else Label.CHAP
    projected = tuple(
        positive if _positive_predicate(Level.HIERARCHICAL, target_level)(lab) else Label.NONE
        for lab in labels.labels
    )
    return BoundaryLabels(doc_id=labels.doc_id, level=target_level, labels=projected)


@dataclass(frozen=True, slots=True)
class ChapterSpan:
    """A chapter as a half-open sentence index range."""

    start: int
    end: int
    title: str | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid chapter range [{self.start}, {self.end})")


@dataclass(frozen=True, slots=True)
class SegmentedDocument:
    """A transcript together with optional gold labels and chapter spans."""

    transcript: Transcript
    gold: BoundaryLabels | None = None
    chapters: tuple[ChapterSpan, ...] | None = None

    def __post_init__(self) -> None:
        m = self.transcript.num_sentences
        if self.gold is not None and len(self.gold) != max(0, m - 1):
            raise ValueError(
                f"doc {self.transcript.id!r}: {len(self.gold)} labels for {m} sentences"
            )
        if self.chapters is not None:
            if not self.chapters:
                raise ValueError("chapter list, when present, must be non-empty")
            expected_start = 0
            for span in self.chapters:
                if span.start != expected_start:
                    raise ValueError("chapters must be contiguous and non-overlapping")
                expected_start = span.end
            if expected_start != m:
                raise ValueError(f"chapters cover [0, {expected_start}) but document has {m} sentences")
            if self.gold is not None:
                para_breaks = set(self.gold.positive_positions(Level.PARAGRAPH))
                for span in self.chapters[1:]:
                    if span.start - 1 not in para_breaks:
                        raise ValueError(
                            f"chapter start at sentence {span.start} has no gold break"
                        )
