"""Sentence-wise constrained decoding.

At each boundary between consecutive sentences the partially formatted
output ends with the sentence's final punctuation mark p. That mark is
stripped, the model scores p (continue) against p plus the paragraph
delimiter (break), and the higher-scoring continuation is appended. The
transcript text itself is never regenerated, so output always matches the
source up to inserted delimiters, regardless of model behavior.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import requests

from .core import (
    PARAGRAPH_DELIMITER,
    BoundaryLabels,
    Label,
    Level,
    SegmentedDocument,
    Transcript,
)

IMPLICIT_PUNCT = "."
MAX_ATTEMPTS = 3

DEFAULT_SYSTEM = "You are an AI assistant that helps users insert paragraphs into text."

DEFAULT_USER = """You are tasked with inserting paragraphs into a given text. The text will be provided to you, and your job is to break it up into coherent paragraphs. Here's the text you'll be working with:

{input}

Your task is to insert paragraph breaks into this text. A paragraph break should be signified by two newline characters.

A paragraph is a functionally or semantically coherent segment of text. This means that each paragraph should focus on a single main idea, topic, or function within the overall text. To identify where to insert paragraph breaks, consider the following guidelines:

1. Look for shifts in topic or focus

2. Identify transitions between different ideas or themes

3. Recognize changes in time, place, or perspective

4. Consider the length of the current segment (very long segments might benefit from being broken up)

5. Pay attention to transitional phrases or words that might signal a new paragraph

Please provide your final output with the inserted paragraph breaks. Ensure that you maintain the original text exactly as it was given, only adding the paragraph breaks where appropriate."""

DEFAULT_PREFILL = (
    "Here is the segmentation of the video transcription into paragraphs:\n\n"
)


@dataclass(frozen=True, slots=True)
class PromptTemplate:
    """System/user/prefill triple; the user text carries one {input} slot."""

    system: str = DEFAULT_SYSTEM
    user: str = DEFAULT_USER
    prefill: str = DEFAULT_PREFILL

    def __post_init__(self) -> None:
        if self.user.count("{input}") != 1:
            raise ValueError("user text must contain exactly one {input} placeholder")
        if not self.prefill.endswith(PARAGRAPH_DELIMITER):
            raise ValueError("prefill must end with the paragraph delimiter")

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        try:
            return cls(
                system=payload["system"],
                user=payload["user"],
                prefill=payload["prefill"],
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"template file needs system/user/prefill fields: {exc}") from exc


DEFAULT_TEMPLATE = PromptTemplate()


def build_prompt(
    template: PromptTemplate, transcript_text: str, output_so_far: str
) -> list[dict[str, str]]:
    """Messages for one boundary decision; the prefill absorbs the output."""
    return [
        {"role": "system", "content": template.system},
        {"role": "user", "content": template.user.replace("{input}", transcript_text)},
        {"role": "assistant", "content": template.prefill + output_so_far},
    ]


def break_candidates(punct: str) -> tuple[str, ...]:
    """Continuations that realize a paragraph break after punctuation."""
    return (punct + PARAGRAPH_DELIMITER,)


class LmClient(Protocol):
    """Scores candidate continuations and generates free-form completions."""

    def score(
        self, messages: Sequence[Mapping[str, str]], candidates: Sequence[str]
    ) -> dict[str, float]: ...

    def generate(
        self, messages: Sequence[Mapping[str, str]], max_tokens: int
    ) -> str: ...


class LmTransportError(RuntimeError):
    """The model endpoint stayed unreachable or malformed after retries."""


class DecodeError(RuntimeError):
    """Decoding aborted; decisions made before the failure are attached."""

    def __init__(self, message: str, partial: tuple[Label, ...]):
        super().__init__(message)
        self.partial = partial


class HttpLmClient:
    """Client for the scoring/generation HTTP endpoints.

    POST /score with {messages, candidates} returns {scores: {candidate:
    logprob}}; POST /generate with {messages, max_tokens} returns {text}.
    Transient failures are retried with exponential backoff.
    """

    def __init__(
        self,
        base_url: str,
        timeout: float = 120.0,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.backoff = backoff
        self.session = session or requests.Session()
        self.call_count = 0

    def _post(self, endpoint: str, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(MAX_ATTEMPTS):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self.session.post(
                    f"{self.base_url}/{endpoint}", json=payload, timeout=self.timeout
                )
                response.raise_for_status()
                return response.json()
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
        raise LmTransportError(
            f"{endpoint} failed after {MAX_ATTEMPTS} attempts: {last_error}"
        ) from last_error

    def score(
        self, messages: Sequence[Mapping[str, str]], candidates: Sequence[str]
    ) -> dict[str, float]:
        payload = self._post(
            "score", {"messages": list(messages), "candidates": list(candidates)}
        )
        self.call_count += 1
        scores = payload.get("scores")
        if not isinstance(scores, dict):
            raise LmTransportError("score response lacks a 'scores' object")
        missing = [c for c in candidates if c not in scores]
        if missing:
            raise LmTransportError(f"score response missing candidates: {missing!r}")
        out = {c: float(scores[c]) for c in candidates}
        bad = {c: v for c, v in out.items() if v > 0}
        if bad:
            raise LmTransportError(f"log-probabilities above zero: {bad}")
        return out

    def generate(self, messages: Sequence[Mapping[str, str]], max_tokens: int) -> str:
        payload = self._post(
            "generate", {"messages": list(messages), "max_tokens": max_tokens}
        )
        self.call_count += 1
        text = payload.get("text")
        if not isinstance(text, str):
            raise LmTransportError("generate response lacks a 'text' string")
        return text


@dataclass(frozen=True, slots=True)
class ScriptedPolicy:
    """Break/continue script for the mock model, keyed by boundary index.

    Entries are either the literal decisions "break"/"continue" or a
    (continue logprob, break logprob) pair. Boundaries not listed fall back
    to the default entry.
    """

    boundaries: Mapping[int, str | tuple[float, float]] = field(default_factory=dict)
    default: str | tuple[float, float] = "continue"
    generation: str = ""

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedPolicy":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        boundaries = {
            int(index): _parse_policy_entry(entry)
            for index, entry in payload.get("boundaries", {}).items()
        }
        return cls(
            boundaries=boundaries,
            default=_parse_policy_entry(payload.get("default", "continue")),
            generation=payload.get("generation", ""),
        )

    def scores_for(self, index: int) -> tuple[float, float]:
        entry = self.boundaries.get(index, self.default)
        if entry == "break":
            return (-1.0, -0.5)
        if entry == "continue":
            return (-0.5, -1.0)
        punct_lp, break_lp = entry
        return (float(punct_lp), float(break_lp))


def _parse_policy_entry(entry: object) -> str | tuple[float, float]:
    if entry in ("break", "continue"):
        return entry  # type: ignore[return-value]
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return (float(entry[0]), float(entry[1]))
    raise ValueError(f"policy entry must be 'break', 'continue', or a score pair: {entry!r}")


class ScriptedLm:
    """In-process mock model driven by a :class:`ScriptedPolicy`.

    The boundary index is inferred from the call sequence, so use one
    instance per decoded document (or call :meth:`reset` between runs).
    """

    def __init__(self, policy: ScriptedPolicy | None = None):
        self.policy = policy or ScriptedPolicy()
        self.call_count = 0

    def reset(self) -> None:
        self.call_count = 0

    def score(
        self, messages: Sequence[Mapping[str, str]], candidates: Sequence[str]
    ) -> dict[str, float]:
        punct_lp, break_lp = self.policy.scores_for(self.call_count)
        self.call_count += 1
        return {
            c: break_lp if c.endswith(PARAGRAPH_DELIMITER) else punct_lp
            for c in candidates
        }

    def generate(self, messages: Sequence[Mapping[str, str]], max_tokens: int) -> str:
        self.call_count += 1
        return self.policy.generation


@dataclass(slots=True)
class DecoderState:
    """Mutable loop state: output so far and the decision trail."""

    output: str = ""
    next_index: int = 0
    decisions: list[Label] = field(default_factory=list)
    call_count: int = 0


def decide_boundary(
    state: DecoderState,
    punct: str,
    lm: LmClient,
    template: PromptTemplate,
    transcript_text: str,
    strip_punct: bool,
) -> str | None:
    """Score continue vs break at the current boundary with one model query.

    Returns the chosen break continuation, or None to continue. A break
    requires strictly higher log-probability; ties keep the sentence in the
    running paragraph.
    """
    stripped = state.output[: -len(punct)] if strip_punct else state.output
    messages = build_prompt(template, transcript_text, stripped)
    continue_candidate = punct
    breaks = break_candidates(punct)
    scores = lm.score(messages, [continue_candidate, *breaks])
    state.call_count += 1
    p_punct = scores[continue_candidate]
    best_break = max(breaks, key=lambda c: (scores[c], -breaks.index(c)))
    if scores[best_break] > p_punct:
        return best_break
    return None


def insert_paragraphs(
    transcript: Transcript,
    lm: LmClient,
    template: PromptTemplate = DEFAULT_TEMPLATE,
) -> tuple[str, BoundaryLabels]:
    """Decode one document: m-1 model queries, one per sentence boundary."""
    sentences = transcript.sentences
    state = DecoderState(output=sentences[0].text if sentences else "")
    for i in range(transcript.num_boundaries):
        current = sentences[i]
        punct = current.final_punct or IMPLICIT_PUNCT
        strip_punct = current.final_punct is not None
        try:
            chosen = decide_boundary(
                state, punct, lm, template, transcript.text, strip_punct
            )
        except LmTransportError as exc:
            raise DecodeError(
                f"doc {transcript.id!r}: boundary {i}: {exc}",
                partial=tuple(state.decisions),
            ) from exc
        if chosen is None:
            state.decisions.append(Label.NONE)
            state.output += " " + sentences[i + 1].text
        else:
            state.decisions.append(Label.PARA)
            state.output += PARAGRAPH_DELIMITER + sentences[i + 1].text
        state.next_index = i + 1
    labels = BoundaryLabels(
        doc_id=transcript.id, level=Level.PARAGRAPH, labels=tuple(state.decisions)
    )
    return state.output, labels


def insert_paragraphs_sectionwise(
    doc: SegmentedDocument,
    lm: LmClient,
    template: PromptTemplate = DEFAULT_TEMPLATE,
) -> BoundaryLabels:
    """Decode each chapter independently; seams between chapters are CHAP.

    Prompts contain only the chapter's own text, and no decision can move
    a sentence across a chapter edge.
    """
    if not doc.chapters:
        raise ValueError("section-wise decoding requires chapter spans")
    transcript = doc.transcript
    labels: list[Label] = []
    for span_index, span in enumerate(doc.chapters):
        chunk = transcript.sentences[span.start : span.end]
        sub = Transcript.from_sentence_texts(
            f"{transcript.id}#{span_index}", [s.text for s in chunk]
        )
        _, sub_labels = insert_paragraphs(sub, lm, template)
        if span_index > 0:
            labels.append(Label.CHAP)
        labels.extend(sub_labels.labels)
    return BoundaryLabels(
        doc_id=transcript.id, level=Level.HIERARCHICAL, labels=tuple(labels)
    )


def render_labels(transcript: Transcript, labels: BoundaryLabels) -> str:
    """Reassemble text from sentences and break decisions."""
    if len(labels) != transcript.num_boundaries:
        raise ValueError("labels do not align with transcript")
    parts = [transcript.sentences[0].text] if transcript.sentences else []
    for i, label in enumerate(labels.labels):
        joiner = " " if label == Label.NONE else PARAGRAPH_DELIMITER
        parts.append(joiner + transcript.sentences[i + 1].text)
    return "".join(parts)


def naive_rewrite(
    transcript: Transcript,
    lm: LmClient,
    template: PromptTemplate = DEFAULT_TEMPLATE,
    max_tokens: int | None = None,
) -> str:
    """Free-running rewrite of the whole document; no fidelity guarantee."""
    if max_tokens is None:
        max_tokens = 2 * len(transcript.text) + 64
    messages = build_prompt(template, transcript.text, "")
    return lm.generate(messages, max_tokens)
