"""Human study backend: judgments, balanced trial sampling, aggregation.

Judgments live in an append-only line-delimited store; every aggregate is
a pure fold over that store, so a crash or restart never loses state
beyond unanswered trials. Sampling balances exposure with inverse
frequency weights and never repeats a combination for a participant.
"""

from __future__ import annotations

import json
import os
import random
import statistics
import threading
import time
import uuid
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

MODE_AB = "ab"
MODE_LIKERT = "likert"
AB_RESPONSES = ("A", "B", "TIE")
ELO_K = 32.0
ELO_INITIAL = 1000.0


@dataclass(frozen=True, slots=True)
class Judgment:
    """One recorded response to an issued trial."""

    trial_id: str
    participant: str
    mode: str
    doc_id: str
    systems: tuple[str, ...]
    response: str | int
    timestamp: float

    def __post_init__(self) -> None:
        if not self.trial_id:
            raise ValueError("trial_id is empty")
        if not self.participant:
            raise ValueError("participant is empty")
        if self.mode == MODE_AB:
            if len(self.systems) != 2 or self.systems[0] == self.systems[1]:
                raise ValueError("ab judgments need two distinct systems")
            if self.response not in AB_RESPONSES:
                raise ValueError(f"ab response must be one of {AB_RESPONSES}")
        elif self.mode == MODE_LIKERT:
            if len(self.systems) != 1:
                raise ValueError("likert judgments rate exactly one system")
            if isinstance(self.response, bool) or not isinstance(self.response, int):
                raise ValueError("likert response must be an integer")
            if not 1 <= self.response <= 5:
                raise ValueError(f"likert response {self.response} outside [1, 5]")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    def to_json(self) -> str:
        payload = {
            "trial_id": self.trial_id,
            "participant": self.participant,
            "mode": self.mode,
            "doc_id": self.doc_id,
            "systems": list(self.systems),
            "response": self.response,
            "timestamp": self.timestamp,
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "Judgment":
        payload = json.loads(line)
        return cls(
            trial_id=payload["trial_id"],
            participant=payload["participant"],
            mode=payload["mode"],
            doc_id=payload["doc_id"],
            systems=tuple(payload["systems"]),
            response=payload["response"],
            timestamp=float(payload["timestamp"]),
        )


class DuplicateJudgmentError(ValueError):
    """A judgment for this trial_id is already stored."""


class JudgmentStore:
    """Append-only JSONL persistence with single-writer discipline.

    Appends are serialized behind a lock and flushed to disk before the
    call returns; reads load an immutable snapshot.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._trial_ids = {j.trial_id for j in self.load()}

    def load(self) -> list[Judgment]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    out.append(Judgment.from_json(line))
        return out

    def append(self, judgment: Judgment) -> None:
        with self._lock:
            if judgment.trial_id in self._trial_ids:
                raise DuplicateJudgmentError(
                    f"trial {judgment.trial_id!r} already judged"
                )
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(judgment.to_json())
                handle.write("\n")
                handle.flush()
                os.fsync(handle.fileno())
            self._trial_ids.add(judgment.trial_id)

    def __len__(self) -> int:
        return len(self._trial_ids)

    def __contains__(self, trial_id: str) -> bool:
        return trial_id in self._trial_ids

    def trial_ids(self) -> frozenset[str]:
        return frozenset(self._trial_ids)


# --- rating aggregation ---------------------------------------------------------

@dataclass(slots=True)
class EloState:
    """Ratings under sequential logistic updates; the sum is conserved."""

    ratings: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    k: float = ELO_K
    initial: float = ELO_INITIAL

    def rating(self, system: str) -> float:
        return self.ratings.get(system, self.initial)


def expected_score(rating_a: float, rating_b: float) -> float:
    return 1.0 / (1.0 + 10.0 ** ((rating_b - rating_a) / 400.0))


def compute_elo(
    judgments: Iterable[Judgment], k: float = ELO_K, initial: float = ELO_INITIAL
) -> EloState:
    """Replay pairwise judgments in (timestamp, trial_id) order."""
    state = EloState(k=k, initial=initial)
    ordered = sorted(judgments, key=lambda j: (j.timestamp, j.trial_id))
    for judgment in ordered:
        if judgment.mode != MODE_AB:
            raise ValueError(f"trial {judgment.trial_id!r} is not an ab judgment")
        side_a, side_b = judgment.systems
        r_a = state.rating(side_a)
        r_b = state.rating(side_b)
        e_a = expected_score(r_a, r_b)
        s_a = {"A": 1.0, "B": 0.0, "TIE": 0.5}[str(judgment.response)]
        # One shared delta keeps the rating sum conserved to the last bit.
        delta = k * (s_a - e_a)
        state.ratings[side_a] = r_a + delta
        state.ratings[side_b] = r_b - delta
        state.counts[side_a] = state.counts.get(side_a, 0) + 1
        state.counts[side_b] = state.counts.get(side_b, 0) + 1
    return state


@dataclass(frozen=True, slots=True)
class LikertSummary:
    mean: float
    std: float
    n: int


def compute_likert(judgments: Iterable[Judgment]) -> dict[str, LikertSummary]:
    """Per-system mean and sample standard deviation of 1-5 ratings."""
    by_system: dict[str, list[int]] = {}
    for judgment in judgments:
        if judgment.mode != MODE_LIKERT:
            raise ValueError(f"trial {judgment.trial_id!r} is not a likert judgment")
        by_system.setdefault(judgment.systems[0], []).append(int(judgment.response))
    return {
        system: LikertSummary(
            mean=statistics.fmean(values),
            std=statistics.stdev(values) if len(values) > 1 else 0.0,
            n=len(values),
        )
        for system, values in sorted(by_system.items())
    }


# --- balanced online sampling ---------------------------------------------------

@dataclass(frozen=True, slots=True)
class Trial:
    """An issued, not-yet-answered unit of work for one participant."""

    trial_id: str
    participant: str
    mode: str
    doc_id: str
    systems: tuple[str, ...]
    issued_at: float


class PoolExhausted(Exception):
    """The participant has judged every available combination."""


Combo = tuple[str, str, tuple[str, ...]]  # (mode, doc_id, canonical systems)


class BalancedSampler:
    """Inverse-frequency trial selection without per-participant repeats.

    A combination is (mode, document, system set). Its exposure count is
    the number of stored judgments plus in-flight trials that use it;
    selection weight is 1 / (1 + count). Side order for pairwise trials is
    uniform. Not thread-safe by itself; callers serialize mutations.
    """

    def __init__(
        self,
        systems: Sequence[str],
        doc_ids: Sequence[str],
        seed: int | None = None,
        trial_timeout: float | None = None,
    ):
        if len(set(systems)) != len(systems) or len(set(doc_ids)) != len(doc_ids):
            raise ValueError("systems and documents must be unique")
        if len(systems) < 1 or len(doc_ids) < 1:
            raise ValueError("need at least one system and one document")
        self.systems = tuple(systems)
        self.doc_ids = tuple(doc_ids)
        self._rng = random.Random(seed)
        self.trial_timeout = trial_timeout
        self._exposure: dict[Combo, int] = {}
        self._seen: dict[str, set[Combo]] = {}
        self._pending: dict[str, Trial] = {}

    def _combos(self, mode: str) -> list[Combo]:
        if mode == MODE_AB:
            if len(self.systems) < 2:
                raise ValueError("pairwise mode needs at least two systems")
            pairs = [tuple(sorted(p)) for p in combinations(self.systems, 2)]
            return [(MODE_AB, d, p) for d in self.doc_ids for p in pairs]
        if mode == MODE_LIKERT:
            return [(MODE_LIKERT, d, (s,)) for d in self.doc_ids for s in self.systems]
        raise ValueError(f"unknown mode {mode!r}")

    @staticmethod
    def _combo_of(mode: str, doc_id: str, systems: Sequence[str]) -> Combo:
        return (mode, doc_id, tuple(sorted(systems)))

    def observe(self, judgment: Judgment) -> None:
        """Fold one stored judgment into exposure and seen state."""
        combo = self._combo_of(judgment.mode, judgment.doc_id, judgment.systems)
        self._exposure[combo] = self._exposure.get(combo, 0) + 1
        self._seen.setdefault(judgment.participant, set()).add(combo)

    def replay(self, judgments: Iterable[Judgment]) -> None:
        for judgment in judgments:
            self.observe(judgment)

    def sweep_expired(self, now: float | None = None) -> list[Trial]:
        """Return abandoned trials to the pool after the idle timeout."""
        if self.trial_timeout is None:
            return []
        now = time.monotonic() if now is None else now
        expired = [
            t for t in self._pending.values()
            if now - t.issued_at > self.trial_timeout
        ]
        for trial in expired:
            self.expire(trial.trial_id)
        return expired

    def next_trial(self, participant: str, mode: str) -> Trial:
        """Issue a trial; raises :class:`PoolExhausted` when none remain."""
        if not participant:
            raise ValueError("participant id is empty")
        self.sweep_expired()
        seen = self._seen.setdefault(participant, set())
        available = [c for c in self._combos(mode) if c not in seen]
        if not available:
            raise PoolExhausted(participant)
        weights = [1.0 / (1.0 + self._exposure.get(c, 0)) for c in available]
        combo = self._rng.choices(available, weights=weights, k=1)[0]
        _, doc_id, systems = combo
        if mode == MODE_AB and self._rng.random() < 0.5:
            systems = (systems[1], systems[0])
        trial = Trial(
            trial_id=uuid.UUID(int=self._rng.getrandbits(128), version=4).hex,
            participant=participant,
            mode=mode,
            doc_id=doc_id,
            systems=systems,
            issued_at=time.monotonic(),
        )
        self._exposure[combo] = self._exposure.get(combo, 0) + 1
        seen.add(combo)
        self._pending[trial.trial_id] = trial
        return trial

    def pending(self, trial_id: str) -> Trial | None:
        return self._pending.get(trial_id)

    def complete(self, trial_id: str) -> Trial:
        """Mark an issued trial as answered; its exposure stays counted."""
        if trial_id not in self._pending:
            raise KeyError(f"trial {trial_id!r} is not pending")
        return self._pending.pop(trial_id)

    def expire(self, trial_id: str) -> None:
        """Un-issue a trial: exposure and the participant's seen mark revert."""
        trial = self._pending.pop(trial_id, None)
        if trial is None:
            return
        combo = self._combo_of(trial.mode, trial.doc_id, trial.systems)
        self._exposure[combo] = max(0, self._exposure.get(combo, 0) - 1)
        self._seen.get(trial.participant, set()).discard(combo)


def record_judgment(judgment: Judgment, store: JudgmentStore) -> None:
    """Durably append; duplicates raise :class:`DuplicateJudgmentError`."""
    store.append(judgment)
