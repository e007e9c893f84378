"""Reference segmenters: random, fixed-period, cue isolation, thresholding.

All randomized baselines draw from ``random.Random(seed)`` (Mersenne
Twister) so identical seeds reproduce identical labels on any platform.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import BoundaryLabels, Label, Level, Transcript
from .ingest import DatasetRecord, ScoreEntry

RNG_ALGORITHM = "mersenne-twister"

DEFAULT_CUES = ("(Laughter)", "(Applause)", "(Music)", "(Cheering)")


@dataclass(frozen=True, slots=True)
class RulePeriod:
    """Fixed paragraph period in sentences."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"period must be >= 1, got {self.n}")


@dataclass(frozen=True, slots=True)
class Threshold:
    """Break-score cutoff; comparison is inclusive (score >= tau breaks)."""

    tau: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"threshold {self.tau} outside [0, 1]")


@dataclass(frozen=True)
class CueLexicon:
    """Standalone paralinguistic cues, matched case-insensitively.

    A sentence is a cue sentence when every whitespace-separated token is
    one of the patterns, so repeated cues like "(Laughter) (Applause)"
    also match.
    """

    patterns: tuple[str, ...] = DEFAULT_CUES
    _lowered: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError("cue lexicon is empty")
        for pattern in self.patterns:
            if not re.fullmatch(r"\([^()\s][^()]*\)", pattern):
                raise ValueError(f"cue {pattern!r} must be fully parenthesized")
        object.__setattr__(self, "_lowered", frozenset(p.lower() for p in self.patterns))

    def is_cue_sentence(self, text: str) -> bool:
        tokens = text.split()
        return bool(tokens) and all(t.lower() in self._lowered for t in tokens)

    @classmethod
    def from_file(cls, path: str) -> "CueLexicon":
        """One cue per line; blank lines and #-comments ignored."""
        patterns = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                entry = line.strip()
                if entry and not entry.startswith("#"):
                    patterns.append(entry)
        return cls(patterns=tuple(patterns))


def random_baseline(doc_id: str, m: int, break_count: int, seed: int) -> BoundaryLabels:
    """Exactly ``break_count`` breaks placed uniformly without replacement."""
    if m < 1:
        raise ValueError(f"document needs >= 1 sentence, got {m}")
    if not 0 <= break_count <= m - 1:
        raise ValueError(f"break count {break_count} outside [0, {m - 1}]")
    rng = random.Random(seed)
    positions = set(rng.sample(range(m - 1), break_count))
    labels = tuple(Label.PARA if i in positions else Label.NONE for i in range(m - 1))
    return BoundaryLabels(doc_id=doc_id, level=Level.PARAGRAPH, labels=labels)


def rule_baseline(doc_id: str, m: int, period: RulePeriod | int) -> BoundaryLabels:
    """Breaks after sentence n, 2n, ... strictly inside the document."""
    if m < 1:
        raise ValueError(f"document needs >= 1 sentence, got {m}")
    n = period.n if isinstance(period, RulePeriod) else RulePeriod(period).n
    positions = set(range(n - 1, m - 1, n))
    labels = tuple(Label.PARA if i in positions else Label.NONE for i in range(m - 1))
    return BoundaryLabels(doc_id=doc_id, level=Level.PARAGRAPH, labels=labels)


def mean_paragraph_length(corpus: Iterable[DatasetRecord]) -> tuple[float, RulePeriod]:
    """Corpus-wide mean sentences per paragraph, with its half-up rounding."""
    lengths = [
        len(para)
        for record in corpus
        for chapter in record.chapters
        for para in chapter.paragraphs
    ]
    if not lengths:
        raise ValueError("corpus has no paragraphs")
    mean = sum(lengths) / len(lengths)
    return mean, RulePeriod(int(math.floor(mean + 0.5)))


def apply_pbr(
    labels: BoundaryLabels,
    transcript: Transcript,
    lexicon: CueLexicon = CueLexicon(),
) -> BoundaryLabels:
    """Isolate standalone paralinguistic cues as their own paragraphs.

    Each maximal run of cue sentences gets a PARA boundary immediately
    before and after it (document edges excepted); a boundary already
    marked is left alone, so the rule is idempotent and never removes
    breaks.
    """
    if len(labels) != transcript.num_boundaries:
        raise ValueError("labels do not align with transcript")
    is_cue = [lexicon.is_cue_sentence(s.text) for s in transcript.sentences]
    out = list(labels.labels)
    m = transcript.num_sentences
    i = 0
    while i < m:
        if not is_cue[i]:
            i += 1
            continue
        run_end = i
        while run_end + 1 < m and is_cue[run_end + 1]:
            run_end += 1
        if i > 0 and out[i - 1] == Label.NONE:
            out[i - 1] = Label.PARA
        if run_end < m - 1 and out[run_end] == Label.NONE:
            out[run_end] = Label.PARA
        i = run_end + 1
    return BoundaryLabels(doc_id=labels.doc_id, level=labels.level, labels=tuple(out))


def apply_threshold(entry: ScoreEntry, tau: Threshold | float) -> BoundaryLabels:
    """Break at every position whose score reaches the cutoff."""
    cutoff = tau.tau if isinstance(tau, Threshold) else Threshold(tau).tau
    positive = Label.CHAP if entry.level == Level.CHAPTER else Label.PARA
    labels = tuple(
        positive if score >= cutoff else Label.NONE for score in entry.scores
    )
    return BoundaryLabels(doc_id=entry.doc_id, level=entry.level, labels=labels)


def tune_threshold(
    corpus: Sequence[tuple[ScoreEntry, BoundaryLabels]],
) -> tuple[Threshold, float]:
    """Exhaustively pick the cutoff maximizing macro-averaged boundary F1.

    Candidates are every distinct score plus {0, 1}; F1 is piecewise
    constant between consecutive scores, so this search is exact. Ties go
    to the smallest cutoff. Returns (threshold, best F1).
    """
    from .metrics import boundary_f1

    if not corpus:
        raise ValueError("cannot tune on an empty corpus")
    candidates = sorted(
        {0.0, 1.0} | {s for entry, _ in corpus for s in entry.scores}
    )
    best_tau = None
    best_f1 = -1.0
    for tau in candidates:
        total = 0.0
        for entry, gold in corpus:
            hyp = apply_threshold(entry, Threshold(tau))
            total += boundary_f1(gold, hyp, level=entry.level)[2]
        macro = total / len(corpus)
        if macro > best_f1:
            best_f1 = macro
            best_tau = tau
    assert best_tau is not None
    return Threshold(best_tau), best_f1


def hierarchical_random(
    doc_id: str,
    m: int,
    chapter_count: int,
    paragraph_rate: float,
    seed: int,
) -> BoundaryLabels:
    """Uniform chapter seams, then PARA elsewhere with the given rate."""
    if m < 1:
        raise ValueError(f"document needs >= 1 sentence, got {m}")
    if not 1 <= chapter_count <= m:
        raise ValueError(f"chapter count {chapter_count} outside [1, {m}]")
    if not 0.0 <= paragraph_rate <= 1.0:
        raise ValueError(f"paragraph rate {paragraph_rate} outside [0, 1]")
    rng = random.Random(seed)
    seams = set(rng.sample(range(m - 1), chapter_count - 1))
    labels = []
    for i in range(m - 1):
        if i in seams:
            labels.append(Label.CHAP)
        elif rng.random() < paragraph_rate:
            labels.append(Label.PARA)
        else:
            labels.append(Label.NONE)
    return BoundaryLabels(doc_id=doc_id, level=Level.HIERARCHICAL, labels=tuple(labels))
