"""Deterministic rule-based sentence boundary detection.

A boundary is emitted after a token ending in terminal punctuation (not
preceded by a known abbreviation) when the next token starts a sentence
(uppercase letter, digit, or opening quote/paren). Standalone parenthesized
cues such as "(Laughter)" always form their own sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .core import Sentence

TERMINAL_CHARS = (".", "!", "?", "…")
CLOSERS = ('"', "'", ")", "]", "”", "’")
OPENERS = ('"', "'", "(", "[", "“", "‘")

# Lowercase, no trailing period. Covers titles, latin shorthands, and common
# measure/ordinal carriers seen in talk transcripts.
DEFAULT_ABBREVIATIONS = (
    "dr", "mr", "mrs", "ms", "prof", "rev", "gen", "sen", "rep", "hon",
    "jr", "sr", "st", "mt", "capt", "col", "sgt", "lt",
    "e.g", "i.e", "etc", "vs", "cf", "al", "approx",
    "u.s", "u.k", "u.n", "d.c", "a.m", "p.m", "b.c", "a.d",
    "no", "nos", "fig", "figs", "vol", "ch", "sec", "dept", "univ",
    "inc", "ltd", "co", "corp",
)

_STANDALONE_PAREN = re.compile(r"^\([^()\s][^()]*\)$")


@dataclass(frozen=True, slots=True)
class PunctuationSet:
    """Terminal punctuation plus the closing characters that may carry it."""

    terminals: tuple[str, ...] = TERMINAL_CHARS
    closers: tuple[str, ...] = CLOSERS

    def __post_init__(self) -> None:
        if not self.terminals or "." not in self.terminals:
            raise ValueError("terminal punctuation set must contain '.'")

    def final_punct(self, text: str) -> str | None:
        """Terminal punctuation character ending ``text``, if any.

        A closer (quote/paren) counts when it directly follows a terminal,
        so sentences like ``He said "Stop."`` report the closing quote.
        """
        stripped = text.rstrip()
        if not stripped:
            return None
        last = stripped[-1]
        if last in self.terminals:
            return last
        if last in self.closers and len(stripped) >= 2 and stripped[-2] in self.terminals:
            return last
        return None


DEFAULT_PUNCTUATION = PunctuationSet()


def final_punct_of(text: str) -> str | None:
    return DEFAULT_PUNCTUATION.final_punct(text)


@dataclass(frozen=True)
class AbbreviationList:
    """Lowercase abbreviations that suppress a boundary after their period."""

    entries: frozenset[str] = field(
        default_factory=lambda: frozenset(DEFAULT_ABBREVIATIONS)
    )

    def __post_init__(self) -> None:
        for entry in self.entries:
            if not entry or any(c.isspace() for c in entry):
                raise ValueError(f"abbreviation entry {entry!r} contains whitespace")

    @classmethod
    def from_file(cls, path: str | Path) -> AbbreviationList:
        """One entry per line; blank lines and '#' comment lines are skipped."""
        entries = set()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip().lower()
            if line and not line.startswith("#"):
                entries.add(line.rstrip("."))
        return cls(entries=frozenset(entries))

    def __contains__(self, word: str) -> bool:
        return word in self.entries


DEFAULT_ABBREVIATION_LIST = AbbreviationList()


def _is_standalone_paren(token: str) -> bool:
    return bool(_STANDALONE_PAREN.match(token))


def _core_word(token: str) -> str:
    """Token minus surrounding punctuation, minus its final period run."""
    word = token.strip("".join(OPENERS) + "".join(CLOSERS) + ",;:")
    return word.rstrip(".").lower()


def _ends_terminal(token: str, punctuation: PunctuationSet) -> str | None:
    """The terminal character the token ends with (closers stripped), or None."""
    body = token
    while body and body[-1] in punctuation.closers:
        body = body[:-1]
    if body and body[-1] in punctuation.terminals:
        return body[-1]
    return None


def _starts_sentence(token: str) -> bool:
    first = token[0]
    return first.isupper() or first.isdigit() or first in OPENERS


def tokenize_sentences(
    text: str,
    abbreviations: AbbreviationList = DEFAULT_ABBREVIATION_LIST,
    punctuation: PunctuationSet = DEFAULT_PUNCTUATION,
) -> list[Sentence]:
    """Split ``text`` into sentences.

    Whitespace runs inside a sentence are normalized to single spaces, so
    joining the result with single spaces reproduces the input up to
    whitespace normalization. The worst case is a single sentence; the
    function never drops or rewrites characters outside whitespace.
    """
    if not text.strip():
        raise ValueError("cannot tokenize empty text")
    tokens = text.split()
    boundaries: set[int] = set()  # break after token index i
    for i, token in enumerate(tokens[:-1]):
        nxt = tokens[i + 1]
        if _is_standalone_paren(token) or _is_standalone_paren(nxt):
            boundaries.add(i)
            continue
        terminal = _ends_terminal(token, punctuation)
        if terminal is None:
            continue
        if terminal == "." and not token.endswith(".."):
            core = _core_word(token)
            if core in abbreviations:
                continue
            if (
                len(core) == 1
                and core.isalpha()
                and _ends_terminal(nxt, punctuation) is None
            ):
                # "J. Smith": a bare initial before a name, not a sentence end.
                continue
        if _starts_sentence(nxt):
            boundaries.add(i)

    sentences: list[Sentence] = []
    start = 0
    for i in sorted(boundaries | {len(tokens) - 1}):
        chunk = " ".join(tokens[start : i + 1])
        sentences.append(
            Sentence(
                text=chunk,
                index=len(sentences),
                final_punct=punctuation.final_punct(chunk),
            )
        )
        start = i + 1
    return sentences
