"""Segmentation scoring: boundary F1, P_k, Boundary Similarity, aggregation.

P_k and Boundary Similarity operate on mass sequences (segment lengths in
sentences). Boundary F1 operates on labeled boundary positions. Corpus
results are unweighted macro-averages over documents.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterator, Sequence

from .core import BoundaryLabels, Level, labels_to_masses

DEFAULT_TRANSPOSITION_WINDOW = 2


@dataclass(frozen=True, slots=True)
class PkWindow:
    """Probe distance k for P_k, in sentences."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True, slots=True)
class TranspositionWindow:
    """Maximum near-miss distance for Boundary Similarity (offsets < n_t)."""

    n_t: int = DEFAULT_TRANSPOSITION_WINDOW

    def __post_init__(self) -> None:
        if self.n_t < 2:
            raise ValueError(f"n_t must be >= 2, got {self.n_t}")


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Per-document (or macro-averaged) segmentation scores."""

    precision: float
    recall: float
    f1: float
    pk: float
    boundary_similarity: float
    k: PkWindow | None = None

    def __post_init__(self) -> None:
        for name in ("precision", "recall", "f1", "pk", "boundary_similarity"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")


def boundary_f1(
    ref: BoundaryLabels, hyp: BoundaryLabels, level: Level | None = None
) -> tuple[float, float, float]:
    """Precision, recall, F1 of exact boundary-position matches.

    When both sides have no positive boundaries all three are 1.0; a
    one-sided empty set yields 0.0 for the undefined ratio.
    """
    if len(ref) != len(hyp):
        raise ValueError(f"label length mismatch: {len(ref)} vs {len(hyp)}")
    if level is None and ref.level != hyp.level:
        raise ValueError(f"level mismatch: {ref.level} vs {hyp.level}")
    ref_pos = set(ref.positive_positions(level))
    hyp_pos = set(hyp.positive_positions(level))
    tp = len(ref_pos & hyp_pos)
    if not ref_pos and not hyp_pos:
        return 1.0, 1.0, 1.0
    precision = tp / len(hyp_pos) if hyp_pos else 0.0
    recall = tp / len(ref_pos) if ref_pos else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def default_pk_window(ref_masses: Sequence[int]) -> PkWindow:
    """Half the mean reference segment length, rounded, floor 1."""
    total = sum(ref_masses)
    return PkWindow(max(1, int(round(total / (2 * len(ref_masses))))))


def _check_masses(masses: Sequence[int], name: str) -> None:
    if not masses:
        raise ValueError(f"{name} masses are empty")
    for mass in masses:
        if mass < 1:
            raise ValueError(f"{name} contains non-positive mass {mass}")


def _internal_boundaries(masses: Sequence[int]) -> list[int]:
    """Cumulative sums minus the total: a boundary sits after unit c-1."""
    return list(accumulate(masses))[:-1]


def pk(
    ref_masses: Sequence[int],
    hyp_masses: Sequence[int],
    k: PkWindow | int | None = None,
) -> float:
    """Fraction of probe pairs (i, i+k) with same-segment disagreement.

    Probes run over i in [0, L-k-1]; units i and j share a segment when no
    boundary falls strictly between them. k defaults from the reference, so
    the measure is not symmetric in its arguments.
    """
    _check_masses(ref_masses, "reference")
    _check_masses(hyp_masses, "hypothesis")
    total = sum(ref_masses)
    if sum(hyp_masses) != total:
        raise ValueError(
            f"total mass mismatch: {total} vs {sum(hyp_masses)}"
        )
    if k is None:
        k = default_pk_window(ref_masses)
    window = k.k if isinstance(k, PkWindow) else PkWindow(k).k
    if total <= window:
        raise ValueError(f"document length {total} must exceed k={window}")

    ref_cuts = _internal_boundaries(ref_masses)
    hyp_cuts = _internal_boundaries(hyp_masses)

    def same_segment(cuts: list[int], i: int) -> bool:
        # no cut c with i < c <= i + window
        return bisect_right(cuts, i + window) == bisect_right(cuts, i)

    disagreements = sum(
        same_segment(ref_cuts, i) != same_segment(hyp_cuts, i)
        for i in range(total - window)
    )
    return disagreements / (total - window)


def _min_offset_by_size(
    ref_cuts: Sequence[int], hyp_cuts: Sequence[int], window: int
) -> list[int]:
    """Least total |offset| of a boundary pairing, for every pairing size.

    Pairs must sit closer than ``window``. Entry m of the result is the
    minimum offset sum over all pairings of exactly m boundaries from each
    side, found by successive shortest augmenting paths on the bipartite
    proximity graph (all arithmetic stays integral, so the minima are
    exact). The list ends at the maximum feasible pairing size.
    """
    n_left, n_right = len(ref_cuts), len(hyp_cuts)
    adjacency: list[list[tuple[int, int]]] = []
    for r in ref_cuts:
        lo = bisect_left(hyp_cuts, r - window + 1)
        hi = bisect_right(hyp_cuts, r + window - 1)
        adjacency.append([(j, abs(r - hyp_cuts[j])) for j in range(lo, hi)])

    unreachable = float("inf")
    match_left = [-1] * n_left
    match_right = [-1] * n_right
    # Node potentials keep residual reduced costs non-negative for Dijkstra.
    phi_left = [0] * n_left
    phi_right = [0] * n_right
    sums = [0]
    total = 0
    while True:
        dist_left: list[float] = [unreachable] * n_left
        dist_right: list[float] = [unreachable] * n_right
        parent_right = [-1] * n_right
        heap: list[tuple[float, int, int]] = []
        for i in range(n_left):
            if match_left[i] == -1:
                dist_left[i] = 0
                heap.append((0, 0, i))
        heapq.heapify(heap)
        done_left = [False] * n_left
        done_right = [False] * n_right
        target = -1
        target_dist: float = unreachable
        while heap:
            d, side, node = heapq.heappop(heap)
            if side == 0:
                if done_left[node]:
                    continue
                done_left[node] = True
                for j, cost in adjacency[node]:
                    if match_left[node] == j:
                        continue
                    reduced = d + cost + phi_left[node] - phi_right[j]
                    if reduced < dist_right[j]:
                        dist_right[j] = reduced
                        parent_right[j] = node
                        heapq.heappush(heap, (reduced, 1, j))
            else:
                if done_right[node]:
                    continue
                done_right[node] = True
                partner = match_right[node]
                if partner == -1:
                    target = node
                    target_dist = d
                    break
                # Matched edges run right-to-left at zero reduced cost.
                if d < dist_left[partner]:
                    dist_left[partner] = d
                    heapq.heappush(heap, (d, 0, partner))
        if target == -1:
            return sums
        for i in range(n_left):
            phi_left[i] += int(min(dist_left[i], target_dist))
        for j in range(n_right):
            phi_right[j] += int(min(dist_right[j], target_dist))
        j = target
        while j != -1:
            i = parent_right[j]
            previous = match_left[i]
            match_left[i] = j
            match_right[j] = i
            j = previous
        total = sum(
            abs(ref_cuts[i] - hyp_cuts[match_left[i]])
            for i in range(n_left)
            if match_left[i] != -1
        )
        sums.append(total)


def boundary_similarity(
    ref_masses: Sequence[int],
    hyp_masses: Sequence[int],
    n_t: TranspositionWindow | int = DEFAULT_TRANSPOSITION_WINDOW,
) -> float:
    """One minus normalized boundary edit distance.

    Boundaries pair up either as exact position matches or as
    transpositions (offset below n_t, costing |offset| / n_t); unpaired
    boundaries count as whole additions/deletions. The pairing is chosen
    to minimize the normalized distance itself: a minimum-offset pairing
    is computed at every feasible pairing count and the best resulting
    score is returned, so no greedy choice can shortchange either side.
    """
    _check_masses(ref_masses, "reference")
    _check_masses(hyp_masses, "hypothesis")
    if sum(ref_masses) != sum(hyp_masses):
        raise ValueError(
            f"total mass mismatch: {sum(ref_masses)} vs {sum(hyp_masses)}"
        )
    window = n_t.n_t if isinstance(n_t, TranspositionWindow) else TranspositionWindow(n_t).n_t

    ref_cuts = _internal_boundaries(ref_masses)
    hyp_cuts = _internal_boundaries(hyp_masses)
    boundary_count = len(ref_cuts) + len(hyp_cuts)
    if boundary_count == 0:
        return 1.0
    best = 0.0
    for size, offset_sum in enumerate(_min_offset_by_size(ref_cuts, hyp_cuts, window)):
        numerator = (boundary_count - 2 * size) + offset_sum / window
        denominator = boundary_count - size
        best = max(best, 1.0 - numerator / denominator)
    return best


def evaluate_pair(
    ref: BoundaryLabels,
    hyp: BoundaryLabels,
    level: Level | None = None,
    k: PkWindow | int | None = None,
    n_t: TranspositionWindow | int = DEFAULT_TRANSPOSITION_WINDOW,
) -> EvalReport:
    """Score one hypothesis against its reference at one level."""
    precision, recall, f1 = boundary_f1(ref, hyp, level=level)
    ref_masses = labels_to_masses(ref, level)
    hyp_masses = labels_to_masses(hyp, level)
    window = default_pk_window(ref_masses) if k is None else (
        k if isinstance(k, PkWindow) else PkWindow(k)
    )
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        pk=pk(ref_masses, hyp_masses, window),
        boundary_similarity=boundary_similarity(ref_masses, hyp_masses, n_t),
        k=window,
    )


@dataclass(frozen=True, slots=True)
class CorpusReport:
    """Macro-averaged scores plus the per-document breakdown."""

    overall: EvalReport
    per_document: tuple[tuple[str, EvalReport], ...]

    def __iter__(self) -> Iterator[tuple[str, EvalReport]]:
        return iter(self.per_document)


def evaluate_corpus(
    pairs: Sequence[tuple[BoundaryLabels, BoundaryLabels]],
    level: Level | None = None,
    n_t: TranspositionWindow | int = DEFAULT_TRANSPOSITION_WINDOW,
) -> CorpusReport:
    """Unweighted document mean of each metric over (reference, hypothesis) pairs."""
    if not pairs:
        raise ValueError("cannot evaluate an empty corpus")
    per_document = []
    for ref, hyp in pairs:
        if ref.doc_id != hyp.doc_id:
            raise ValueError(f"document id mismatch: {ref.doc_id!r} vs {hyp.doc_id!r}")
        per_document.append((ref.doc_id, evaluate_pair(ref, hyp, level=level, n_t=n_t)))
    count = len(per_document)
    overall = EvalReport(
        precision=sum(r.precision for _, r in per_document) / count,
        recall=sum(r.recall for _, r in per_document) / count,
        f1=sum(r.f1 for _, r in per_document) / count,
        pk=sum(r.pk for _, r in per_document) / count,
        boundary_similarity=sum(r.boundary_similarity for _, r in per_document) / count,
        k=None,
    )
    return CorpusReport(overall=overall, per_document=tuple(per_document))
