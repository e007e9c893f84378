"""Transcript-preservation checks at four progressively relaxed levels.

Level 0 (exact) tolerates only inserted paragraph delimiters; level 1 also
ignores whitespace; level 2 additionally ignores punctuation and casing;
level 3 only bounds character-length drift at 5%. Each level passing
implies the next passes, enforced by closure when building a report.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

# Any whitespace run containing two or more newlines is a paragraph delimiter.
_DELIMITER_RUN = re.compile(r"[^\S\n]*\n(?:[^\S\n]*\n)+[^\S\n]*")
LENGTH_TOLERANCE = 0.05


@dataclass(frozen=True, slots=True)
class FidelityReport:
    """Pass/fail at each relaxation level plus the raw length ratio."""

    exact: bool
    whitespace: bool
    punct_case: bool
    length_5pct: bool
    length_ratio: float

    def __post_init__(self) -> None:
        levels = (self.exact, self.whitespace, self.punct_case, self.length_5pct)
        for stricter, looser in zip(levels, levels[1:]):
            if stricter and not looser:
                raise ValueError("fidelity levels must be monotone")

    def as_tuple(self) -> tuple[bool, bool, bool, bool]:
        return (self.exact, self.whitespace, self.punct_case, self.length_5pct)


def collapse_delimiters(text: str) -> str:
    """Replace every newline-bearing whitespace run with a single space."""
    return _DELIMITER_RUN.sub(" ", text).strip()


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


def strip_punct_case(text: str) -> str:
    """Lowercase and drop all Unicode punctuation, renormalizing whitespace."""
    kept = "".join(
        ch for ch in text if not unicodedata.category(ch).startswith("P")
    )
    return normalize_whitespace(kept.lower())


def check_fidelity(source: str, output: str) -> FidelityReport:
    """Compare a formatted output against its source transcript.

    The source must be non-empty after whitespace normalization (the length
    ratio is undefined otherwise).
    """
    source_norm = normalize_whitespace(source)
    output_norm = normalize_whitespace(output)
    if not source_norm:
        raise ValueError("source transcript is empty")

    exact = collapse_delimiters(output) == collapse_delimiters(source)
    whitespace = exact or output_norm == source_norm
    punct_case = whitespace or strip_punct_case(output) == strip_punct_case(source)
    length_ratio = len(output_norm) / len(source_norm)
    length_5pct = punct_case or abs(length_ratio - 1.0) <= LENGTH_TOLERANCE
    return FidelityReport(
        exact=exact,
        whitespace=whitespace,
        punct_case=punct_case,
        length_5pct=length_5pct,
        length_ratio=length_ratio,
    )


@dataclass(frozen=True, slots=True)
class FidelityTable:
    """Proportion of documents passing each level, plus the mean length ratio."""

    exact: float
    whitespace: float
    punct_case: float
    length_5pct: float
    mean_length_ratio: float
    n: int

    def __post_init__(self) -> None:
        levels = (self.exact, self.whitespace, self.punct_case, self.length_5pct)
        for value in levels:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"proportion {value} outside [0, 1]")
        for stricter, looser in zip(levels, levels[1:]):
            if stricter > looser:
                raise ValueError("level proportions must be monotone")


def fidelity_table(reports: Sequence[FidelityReport] | Iterable[FidelityReport]) -> FidelityTable:
    """Aggregate per-document reports into per-level pass proportions."""
    reports = list(reports)
    if not reports:
        raise ValueError("cannot aggregate an empty corpus")
    n = len(reports)
    return FidelityTable(
        exact=sum(r.exact for r in reports) / n,
        whitespace=sum(r.whitespace for r in reports) / n,
        punct_case=sum(r.punct_case for r in reports) / n,
        length_5pct=sum(r.length_5pct for r in reports) / n,
        mean_length_ratio=sum(r.length_ratio for r in reports) / n,
        n=n,
    )
