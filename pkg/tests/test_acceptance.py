"""Acceptance suite: one test per headline guarantee, one PASS line each.

The brute-force scorers defined here share no code with the library; they
re-derive every expected value from first principles so the two
implementations can only agree by computing the same thing.
"""

import json
import random
import statistics
import time
from pathlib import Path

import pytest

from paraseg.baselines import (
    RulePeriod,
    Threshold,
    apply_pbr,
    apply_threshold,
    hierarchical_random,
    mean_paragraph_length,
    random_baseline,
    rule_baseline,
    tune_threshold,
)
from paraseg.core import (
    BoundaryLabels,
    ChapterSpan,
    Label,
    Level,
    SegmentedDocument,
    Transcript,
    labels_to_masses,
    project_hierarchical,
)
from paraseg.decode import (
    PromptTemplate,
    ScriptedLm,
    ScriptedPolicy,
    insert_paragraphs,
    insert_paragraphs_sectionwise,
)
from paraseg.fidelity import check_fidelity
from paraseg.humaneval import Judgment, compute_elo
from paraseg.ingest import ScoreEntry, gold_labels, read_jsonl_dataset
from paraseg.metrics import boundary_similarity, evaluate_corpus, evaluate_pair, pk

E2E_DIR = Path(__file__).parent / "data" / "e2e"

WORDS = "we saw the results move past every early claim about scale".split()


def _pass(message: str) -> None:
    print(f"PASS {message}")


# --- independent scorers ----------------------------------------------------------

def cuts_of(masses):
    out = []
    total = 0
    for mass in masses[:-1]:
        total += mass
        out.append(total)
    return out


def pk_oracle(ref_masses, hyp_masses, k):
    def segment_ids(masses):
        ids = []
        for index, mass in enumerate(masses):
            ids.extend([index] * mass)
        return ids

    ref_ids = segment_ids(ref_masses)
    hyp_ids = segment_ids(hyp_masses)
    length = len(ref_ids)
    disagreements = 0
    for i in range(length - k):
        ref_same = ref_ids[i] == ref_ids[i + k]
        hyp_same = hyp_ids[i] == hyp_ids[i + k]
        disagreements += ref_same != hyp_same
    return disagreements / (length - k)


def default_window_oracle(ref_masses):
    return max(1, int(round(sum(ref_masses) / (2 * len(ref_masses)))))


def bs_oracle(ref_masses, hyp_masses, window=2):
    """Best score over every legal pairing of reference and hypothesis cuts."""
    ref_cuts = cuts_of(ref_masses)
    hyp_cuts = cuts_of(hyp_masses)
    total = len(ref_cuts) + len(hyp_cuts)
    if total == 0:
        return 1.0
    best = 0.0

    def extend(i, used, size, offset):
        nonlocal best
        if i == len(ref_cuts):
            numerator = (total - 2 * size) + offset / window
            best = max(best, 1.0 - numerator / (total - size))
            return
        extend(i + 1, used, size, offset)
        for j, hyp_cut in enumerate(hyp_cuts):
            if j not in used and abs(ref_cuts[i] - hyp_cut) < window:
                extend(i + 1, used | {j}, size + 1, offset + abs(ref_cuts[i] - hyp_cut))

    extend(0, frozenset(), 0, 0)
    return best


def boundary_f1_oracle(ref_positions, hyp_positions):
    ref_set, hyp_set = set(ref_positions), set(hyp_positions)
    if not ref_set and not hyp_set:
        return 1.0
    tp = len(ref_set & hyp_set)
    precision = tp / len(hyp_set) if hyp_set else 0.0
    recall = tp / len(ref_set) if ref_set else 0.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


# --- fixture builders -------------------------------------------------------------

def random_sentence(rng):
    text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 8)))
    text = text[0].upper() + text[1:]
    roll = rng.random()
    if roll < 0.15:
        return text  # no terminal punctuation
    if roll < 0.3:
        return text + rng.choice("?!")
    return text + "."


def random_policy(rng, boundary_count):
    boundaries = {
        i: (rng.uniform(-3.0, -0.01), rng.uniform(-3.0, -0.01))
        for i in range(boundary_count)
    }
    return ScriptedPolicy(boundaries=boundaries)


def masses_to_labels(doc_id, masses):
    positions = set(cuts_of(masses))
    total = sum(masses)
    return BoundaryLabels(
        doc_id=doc_id,
        level=Level.PARAGRAPH,
        labels=tuple(
            Label.PARA if i + 1 in positions else Label.NONE for i in range(total - 1)
        ),
    )


def random_masses(rng, total):
    cut_count = rng.randint(0, total - 1)
    positions = sorted(rng.sample(range(1, total), cut_count))
    masses = []
    previous = 0
    for position in positions + [total]:
        masses.append(position - previous)
        previous = position
    return masses


# --- the criteria ------------------------------------------------------------------

class TestAcceptance:
    def test_constrained_decoding_never_alters_content(self):
        """Decoder output passes the strictest fidelity level on every transcript."""
        rng = random.Random(501)
        started = time.perf_counter()
        runs = 500
        for i in range(runs):
            texts = [random_sentence(rng) for _ in range(rng.randint(1, 12))]
            transcript = Transcript.from_sentence_texts(f"doc{i}", texts)
            policy = random_policy(rng, len(texts) - 1)
            output, labels = insert_paragraphs(transcript, ScriptedLm(policy))
            report = check_fidelity(" ".join(texts), output)
            assert report.exact, f"content drifted on transcript {i}"
            assert len(labels) == len(texts) - 1
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0
        _pass(
            f"content fidelity: {runs} random transcripts, strictest level, "
            f"{elapsed:.2f}s"
        )

    def test_model_query_count_is_one_per_boundary(self):
        """Exactly sum(chapter sentences - 1) scoring calls per document."""

        class CountingLm:
            def __init__(self, inner):
                self.inner = inner
                self.calls = 0

            def score(self, messages, candidates):
                self.calls += 1
                return self.inner.score(messages, candidates)

            def generate(self, messages, max_tokens):
                return self.inner.generate(messages, max_tokens)

        rng = random.Random(502)
        for i in range(50):
            chapter_sizes = [rng.randint(1, 9) for _ in range(rng.randint(1, 4))]
            texts = [random_sentence(rng) for _ in range(sum(chapter_sizes))]
            transcript = Transcript.from_sentence_texts(f"doc{i}", texts)
            spans = []
            start = 0
            for size in chapter_sizes:
                spans.append(ChapterSpan(start=start, end=start + size))
                start += size
            doc = SegmentedDocument(transcript=transcript, gold=None, chapters=tuple(spans))
            lm = CountingLm(ScriptedLm(random_policy(rng, len(texts))))
            insert_paragraphs_sectionwise(doc, lm)
            expected = sum(size - 1 for size in chapter_sizes)
            assert lm.calls == expected, f"doc {i}: {lm.calls} calls != {expected}"
            flat = CountingLm(ScriptedLm(random_policy(rng, len(texts))))
            insert_paragraphs(transcript, flat)
            assert flat.calls == len(texts) - 1
        _pass("query count: one scoring call per sentence boundary, 50 documents")

    def test_metrics_match_brute_force_search(self):
        """P_k equals probe enumeration; BS equals exhaustive pairing search."""
        rng = random.Random(503)
        started = time.perf_counter()
        instances = 0
        while instances < 200:
            total = rng.randint(2, 12)
            ref = random_masses(rng, total)
            hyp = random_masses(rng, total)
            window = default_window_oracle(ref)
            if window < total:
                assert pk(ref, hyp) == pk_oracle(ref, hyp, window)
            explicit = rng.randint(1, total - 1)
            assert pk(ref, hyp, k=explicit) == pk_oracle(ref, hyp, explicit)
            assert boundary_similarity(ref, hyp) == pytest.approx(
                bs_oracle(ref, hyp), abs=1e-9
            )
            instances += 1
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0
        _pass(
            f"metric equivalence: 200 instances against brute force, {elapsed:.2f}s"
        )

    def test_random_baseline_scores_near_half(self):
        """Count-matched random segmentation lands at P_k about 0.5."""
        rng = random.Random(504)
        scores = []
        for i in range(100):
            masses = []
            while sum(masses) < 200:
                masses.append(rng.randint(2, 8))
            total = sum(masses)
            gold = masses_to_labels(f"doc{i}", masses)
            hyp = random_baseline(f"doc{i}", total, len(masses) - 1, seed=i)
            scores.append(
                pk(labels_to_masses(gold), labels_to_masses(hyp))
            )
        mean = statistics.fmean(scores)
        assert 0.45 <= mean <= 0.55, f"mean P_k {mean:.4f} outside [0.45, 0.55]"
        _pass(f"random baseline: mean P_k {mean:.4f} over 100 documents")

    def test_rule_baseline_is_perfect_on_periodic_text(self):
        """Period-5 rule nails period-5 paragraphs; corpus means round to 5."""
        from paraseg.ingest import ChapterRecord, DatasetRecord

        for m in (20, 35, 50):
            gold = masses_to_labels("doc", [5] * (m // 5))
            hyp = rule_baseline("doc", m, RulePeriod(5))
            report = evaluate_pair(gold, hyp)
            assert report.f1 == 1.0
            assert report.pk == 0.0

        def corpus(fives, fours):
            paragraphs = tuple(
                tuple(f"S{i}." for i in range(n))
                for n in [5] * fives + [4] * fours
            )
            return [DatasetRecord(id="c", chapters=(ChapterRecord(paragraphs=paragraphs),))]

        mean_57, period_57 = mean_paragraph_length(corpus(57, 43))
        mean_63, period_63 = mean_paragraph_length(corpus(63, 37))
        assert mean_57 == pytest.approx(4.57)
        assert mean_63 == pytest.approx(4.63)
        assert period_57.n == 5
        assert period_63.n == 5
        _pass("rule baseline: perfect on period 5; means 4.57 and 4.63 round to 5")

    def test_cue_sentences_end_up_isolated(self):
        """Every standalone cue is its own paragraph; the rule is idempotent and monotone."""
        rng = random.Random(506)
        cues = ["(Laughter)", "(Applause)", "(Music)"]
        for i in range(30):
            texts = [random_sentence(rng) for _ in range(rng.randint(2, 15))]
            for position in range(len(texts)):
                if rng.random() < 0.25:
                    texts[position] = rng.choice(cues)
            transcript = Transcript.from_sentence_texts(f"doc{i}", texts)
            before = random_baseline(f"doc{i}", len(texts), rng.randint(0, len(texts) - 1), seed=i)
            after = apply_pbr(before, transcript)
            for position, text in enumerate(texts):
                if text not in cues:
                    continue
                if position > 0 and texts[position - 1] not in cues:
                    assert after.labels[position - 1] != Label.NONE
                if position < len(texts) - 1 and texts[position + 1] not in cues:
                    assert after.labels[position] != Label.NONE
            assert apply_pbr(after, transcript) == after
            assert set(before.positive_positions()) <= set(after.positive_positions())
        _pass("cue isolation: isolated, idempotent, monotone on 30 documents")

    def test_threshold_tuning_matches_a_dense_grid(self):
        """tune_threshold finds the same best F1 as a 10^-3 grid sweep."""
        rng = random.Random(507)
        for trial in range(20):
            corpus = []
            for d in range(rng.randint(1, 4)):
                boundaries = rng.randint(1, 12)
                scores = tuple(rng.randint(0, 1000) / 1000 for _ in range(boundaries))
                entry = ScoreEntry(
                    doc_id=f"t{trial}d{d}", level=Level.PARAGRAPH, scores=scores
                )
                gold_bits = [rng.random() < 0.4 for _ in range(boundaries)]
                gold = BoundaryLabels(
                    doc_id=entry.doc_id,
                    level=Level.PARAGRAPH,
                    labels=tuple(Label.PARA if b else Label.NONE for b in gold_bits),
                )
                corpus.append((entry, gold))
            _, best = tune_threshold(corpus)
            grid_best = 0.0
            for step in range(1001):
                tau = step / 1000
                f1s = [
                    boundary_f1_oracle(
                        gold.positive_positions(),
                        [i for i, s in enumerate(entry.scores) if s >= tau],
                    )
                    for entry, gold in corpus
                ]
                grid_best = max(grid_best, statistics.fmean(f1s))
            assert best == pytest.approx(grid_best, abs=1e-9)
        _pass("threshold tuning: matches the dense-grid optimum on 20 corpora")

    def test_rating_updates_conserve_the_total(self):
        """Single win moves 16 points; rating sums stay put over 10^4 sequences."""
        won = compute_elo(
            [
                Judgment(
                    trial_id="t",
                    participant="p",
                    mode="ab",
                    doc_id="d",
                    systems=("x", "y"),
                    response="A",
                    timestamp=0.0,
                )
            ]
        )
        assert won.ratings == {"x": 1016.0, "y": 984.0}

        rng = random.Random(508)
        for sequence in range(10_000):
            systems = [f"s{j}" for j in range(rng.randint(2, 5))]
            judgments = []
            for i in range(rng.randint(1, 12)):
                pair = rng.sample(systems, 2)
                judgments.append(
                    Judgment(
                        trial_id=f"q{sequence}.{i}",
                        participant="p",
                        mode="ab",
                        doc_id="d",
                        systems=tuple(pair),
                        response=rng.choice(["A", "B", "TIE"]),
                        timestamp=float(i),
                    )
                )
            state = compute_elo(judgments)
            expected = 1000.0 * len(state.ratings)
            assert sum(state.ratings.values()) == pytest.approx(expected, abs=1e-6)
        _pass("rating aggregation: 1016/984 single win; sums conserved, 10000 sequences")

    def test_chapter_scores_survive_projection(self):
        """Three-class vectors and their chapter projections score identically."""
        rng = random.Random(509)
        for i in range(50):
            total = rng.randint(8, 40)
            seam_count = rng.randint(1, 3)
            positions = rng.sample(range(total - 1), min(total - 1, seam_count + 5))
            seams = sorted(positions[:seam_count])
            paras = positions[seam_count:]
            labels = [Label.NONE] * (total - 1)
            for seam in seams:
                labels[seam] = Label.CHAP
            for para in paras:
                labels[para] = Label.PARA
            gold = BoundaryLabels(
                doc_id=f"doc{i}", level=Level.HIERARCHICAL, labels=tuple(labels)
            )
            hyp = hierarchical_random(f"doc{i}", total, seam_count + 1, 0.0, seed=i)
            assert set(hyp.labels) <= {Label.NONE, Label.CHAP}
            direct = evaluate_pair(gold, hyp, level=Level.CHAPTER)
            projected = evaluate_pair(
                project_hierarchical(gold, Level.CHAPTER),
                project_hierarchical(hyp, Level.CHAPTER),
            )
            assert direct.f1 == projected.f1
            assert direct.pk == projected.pk
            assert direct.boundary_similarity == projected.boundary_similarity
            assert direct.precision == projected.precision
            assert direct.recall == projected.recall
        _pass("hierarchical projection: chapter scores identical both ways, 50 documents")

    def test_pipeline_reproduces_the_golden_report(self):
        """Decode + cue isolation + scoring on the fixture corpus is byte-stable."""

        def run_pipeline():
            records = read_jsonl_dataset(E2E_DIR / "dataset.jsonl")
            pairs = []
            rows = []
            for record in records:
                transcript = Transcript.from_sentence_texts(
                    record.id, record.sentence_texts()
                )
                policy = ScriptedPolicy.from_file(
                    E2E_DIR / "policies" / f"{record.id}.json"
                )
                output, labels = insert_paragraphs(
                    transcript, ScriptedLm(policy), PromptTemplate()
                )
                assert check_fidelity(" ".join(record.sentence_texts()), output).exact
                labels = apply_pbr(labels, transcript)
                gold = gold_labels(record)
                pairs.append((gold, labels))
                report = evaluate_pair(gold, labels, level=Level.PARAGRAPH)
                rows.append(
                    {
                        "doc": record.id,
                        "f1": report.f1,
                        "bs": report.boundary_similarity,
                        "pk": report.pk,
                        "k": report.k.k,
                    }
                )
            corpus = evaluate_corpus(pairs, level=Level.PARAGRAPH)
            payload = {
                "documents": rows,
                "macro": {
                    "f1": corpus.overall.f1,
                    "bs": corpus.overall.boundary_similarity,
                    "pk": corpus.overall.pk,
                },
            }
            return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode("utf-8")

        golden = (E2E_DIR / "golden_report.json").read_bytes()
        first = run_pipeline()
        second = run_pipeline()
        assert first == golden
        assert second == golden
        _pass("end to end: 10-document fixture reproduces the golden report byte for byte")
