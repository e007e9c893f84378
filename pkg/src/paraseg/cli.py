"""Command-line entry point.

Subcommands cover the whole pipeline: ingest, tokenize, segment, evaluate,
baseline, fidelity, tune-threshold, results, serve. Outputs are line
delimited or aligned tables (--format), optionally with rendered figures
(--figures). Exit codes: 0 success, 2 usage, 3 I/O, 4 data format,
5 model transport.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .baselines import (
    CueLexicon,
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
from .core import BoundaryLabels, Label, Level, Transcript
from .decode import (
    DecodeError,
    HttpLmClient,
    LmTransportError,
    PromptTemplate,
    ScriptedLm,
    ScriptedPolicy,
    insert_paragraphs,
    insert_paragraphs_sectionwise,
    naive_rewrite,
    render_labels,
)
from .fidelity import check_fidelity, fidelity_table
from .humaneval import JudgmentStore, compute_elo, compute_likert
from .ingest import (
    DatasetFormatError,
    DatasetRecord,
    gold_labels,
    parse_plain_text,
    read_jsonl_dataset,
    read_labels_file,
    read_score_file,
    to_segmented_document,
    write_jsonl_dataset,
    write_labels_file,
)
from .metrics import evaluate_corpus
from .senttok import AbbreviationList, DEFAULT_ABBREVIATION_LIST, tokenize_sentences

EXIT_OK = 0
EXIT_IO = 3
EXIT_DATA = 4
EXIT_TRANSPORT = 5

ENV_LM_URL = "PARASEG_LM_URL"
ENV_STORE = "PARASEG_STORE"


def _abbreviations(args: argparse.Namespace) -> AbbreviationList:
    if getattr(args, "abbreviations", None):
        return AbbreviationList.from_file(args.abbreviations)
    return DEFAULT_ABBREVIATION_LIST


def _load_reference_labels(path: str):
    """Gold labels from either a dataset file or a labels file."""
    with open(path, encoding="utf-8") as handle:
        first = ""
        for line in handle:
            if line.strip():
                first = line
                break
    if not first:
        raise DatasetFormatError(f"{path} is empty")
    if "chapters" in json.loads(first):
        return {r.id: gold_labels(r) for r in read_jsonl_dataset(path)}
    return read_labels_file(path)


def _emit(args: argparse.Namespace, rows: list[dict], headers: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(rows, ensure_ascii=False, indent=2))
        return
    sep = "\t" if args.format == "tsv" else None
    table = [[str(row.get(h, "")) for h in headers] for row in rows]
    if sep is not None:
        print(sep.join(headers))
        for cells in table:
            print(sep.join(cells))
        return
    widths = [
        max(len(h), *(len(cells[i]) for cells in table)) if table else len(h)
        for i, h in enumerate(headers)
    ]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    for cells in table:
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))


def _fmt(value: float) -> str:
    return f"{value:.4f}"


# --- subcommands ----------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> int:
    abbreviations = _abbreviations(args)
    records: list[DatasetRecord] = []
    for input_path in args.inputs:
        path = Path(input_path)
        if path.suffix == ".jsonl":
            records.extend(read_jsonl_dataset(path))
        else:
            text = path.read_text(encoding="utf-8")
            records.append(
                parse_plain_text(text, doc_id=path.stem, abbreviations=abbreviations)
            )
    write_jsonl_dataset(records, args.output)
    print(f"wrote {len(records)} records to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_tokenize(args: argparse.Namespace) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    sentences = tokenize_sentences(text, abbreviations=_abbreviations(args))
    if args.format == "json":
        print(json.dumps([s.text for s in sentences], ensure_ascii=False, indent=2))
    else:
        for sentence in sentences:
            print(sentence.text)
    return EXIT_OK


def _make_lm(args: argparse.Namespace):
    if args.mock:
        policy = ScriptedPolicy.from_file(args.mock)
        return lambda: ScriptedLm(policy)
    lm_url = args.lm or os.environ.get(ENV_LM_URL)
    if not lm_url:
        raise DatasetFormatError(f"no model endpoint: pass --lm or set {ENV_LM_URL}")
    return lambda: HttpLmClient(lm_url)


def cmd_segment(args: argparse.Namespace) -> int:
    template = (
        PromptTemplate.from_file(args.template) if args.template else PromptTemplate()
    )
    make_lm = _make_lm(args)
    if args.input:
        record = parse_plain_text(
            Path(args.input).read_text(encoding="utf-8"),
            doc_id=Path(args.input).stem,
            abbreviations=_abbreviations(args),
        )
        records = [record]
    else:
        records = read_jsonl_dataset(args.dataset)

    if args.decoding == "naive":
        for record in records:
            transcript = Transcript.from_sentence_texts(record.id, record.sentence_texts())
            text = naive_rewrite(transcript, make_lm(), template)
            _write_doc_text(args, record.id, text)
        return EXIT_OK

    def decode_one(record: DatasetRecord):
        transcript = Transcript.from_sentence_texts(record.id, record.sentence_texts())
        if args.sectionwise:
            labels = insert_paragraphs_sectionwise(
                to_segmented_document(record), make_lm(), template
            )
            text = render_labels(transcript, labels)
        else:
            text, labels = insert_paragraphs(transcript, make_lm(), template)
        return labels, text

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(decode_one, records))
    else:
        results = [decode_one(r) for r in records]

    if args.output:
        write_labels_file([labels for labels, _ in results], args.output)
        print(f"wrote {len(results)} label rows to {args.output}", file=sys.stderr)
    for record, (labels, text) in zip(records, results):
        _write_doc_text(args, record.id, text, to_stdout=not args.output and not args.text_dir)
    return EXIT_OK


def _write_doc_text(
    args: argparse.Namespace, doc_id: str, text: str, to_stdout: bool = False
) -> None:
    if getattr(args, "text_dir", None):
        out_dir = Path(args.text_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{doc_id}.txt").write_text(text + "\n", encoding="utf-8")
    elif to_stdout or not getattr(args, "output", None):
        print(text)


def cmd_evaluate(args: argparse.Namespace) -> int:
    level = Level(args.level) if args.level else None
    refs = _load_reference_labels(args.ref)
    hyps = read_labels_file(args.hyp)
    missing = sorted(set(refs) - set(hyps)) if args.strict else []
    if missing:
        raise DatasetFormatError(f"hypothesis missing documents: {missing}")
    doc_ids = [d for d in refs if d in hyps]
    if not doc_ids:
        raise DatasetFormatError("no documents shared between reference and hypothesis")
    report = evaluate_corpus(
        [(refs[d], hyps[d]) for d in doc_ids], level=level
    )
    rows = [
        {
            "doc": doc_id,
            "f1": _fmt(r.f1),
            "bs": _fmt(r.boundary_similarity),
            "pk": _fmt(r.pk),
            "precision": _fmt(r.precision),
            "recall": _fmt(r.recall),
            "k": r.k.k if r.k else "",
        }
        for doc_id, r in report.per_document
    ]
    overall = report.overall
    rows.append(
        {
            "doc": "MACRO",
            "f1": _fmt(overall.f1),
            "bs": _fmt(overall.boundary_similarity),
            "pk": _fmt(overall.pk),
            "precision": _fmt(overall.precision),
            "recall": _fmt(overall.recall),
            "k": "",
        }
    )
    _emit(args, rows, ["doc", "f1", "bs", "pk", "precision", "recall", "k"])
    if args.figures:
        from .figures import save_eval_figure

        save_eval_figure(report, args.figures)
        print(f"figure written to {args.figures}", file=sys.stderr)
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    records = read_jsonl_dataset(args.dataset)
    out = []
    if args.kind == "random":
        for record in records:
            gold = gold_labels(record)
            breaks = len(gold.positive_positions(Level.PARAGRAPH))
            out.append(
                random_baseline(record.id, record.num_sentences, breaks, args.seed)
            )
    elif args.kind == "rule":
        period = (
            RulePeriod(args.period)
            if args.period
            else mean_paragraph_length(records)[1]
        )
        print(f"period: {period.n}", file=sys.stderr)
        for record in records:
            out.append(rule_baseline(record.id, record.num_sentences, period))
    elif args.kind == "pbr":
        lexicon = CueLexicon.from_file(args.cues) if args.cues else CueLexicon()
        base = read_labels_file(args.labels) if args.labels else None
        for record in records:
            transcript = Transcript.from_sentence_texts(record.id, record.sentence_texts())
            if base is not None:
                if record.id not in base:
                    raise DatasetFormatError(f"no input labels for {record.id!r}")
                labels = base[record.id]
            else:
                labels = BoundaryLabels(
                    doc_id=record.id,
                    level=Level.PARAGRAPH,
                    labels=(Label.NONE,) * (record.num_sentences - 1),
                )
            out.append(apply_pbr(labels, transcript, lexicon))
    elif args.kind == "threshold":
        scores = read_score_file(args.scores)
        for record in records:
            if record.id not in scores:
                raise DatasetFormatError(f"no scores for {record.id!r}")
            out.append(apply_threshold(scores[record.id], Threshold(args.tau)))
    else:  # hierarchical
        for record in records:
            gold = gold_labels(record)
            chapters = len(record.chapters)
            positives = gold.positive_positions(Level.PARAGRAPH)
            seams = len(gold.positive_positions(Level.CHAPTER))
            inner = max(1, len(gold) - seams)
            rate = (len(positives) - seams) / inner
            out.append(
                hierarchical_random(
                    record.id, record.num_sentences, chapters, min(1.0, rate), args.seed
                )
            )
    write_labels_file(out, args.output)
    print(f"wrote {len(out)} label rows to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_fidelity(args: argparse.Namespace) -> int:
    pairs: list[tuple[str, str, str]] = []
    if args.batch:
        for line_no, line in enumerate(
            Path(args.batch).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DatasetFormatError(
                    "expected source<TAB>output per line", line=line_no
                )
            pairs.append((Path(parts[0]).stem, parts[0], parts[1]))
    else:
        pairs.append((Path(args.source).stem, args.source, args.output))
    reports = []
    rows = []
    for name, source_path, output_path in pairs:
        report = check_fidelity(
            Path(source_path).read_text(encoding="utf-8"),
            Path(output_path).read_text(encoding="utf-8"),
        )
        reports.append(report)
        rows.append(
            {
                "doc": name,
                "exact": report.exact,
                "whitespace": report.whitespace,
                "punct_case": report.punct_case,
                "length_5pct": report.length_5pct,
                "length_ratio": _fmt(report.length_ratio),
            }
        )
    table = fidelity_table(reports)
    rows.append(
        {
            "doc": "PROPORTION",
            "exact": _fmt(table.exact),
            "whitespace": _fmt(table.whitespace),
            "punct_case": _fmt(table.punct_case),
            "length_5pct": _fmt(table.length_5pct),
            "length_ratio": _fmt(table.mean_length_ratio),
        }
    )
    _emit(
        args,
        rows,
        ["doc", "exact", "whitespace", "punct_case", "length_5pct", "length_ratio"],
    )
    if args.figures:
        from .figures import save_fidelity_figure

        save_fidelity_figure(table, args.figures)
        print(f"figure written to {args.figures}", file=sys.stderr)
    return EXIT_OK


def cmd_tune_threshold(args: argparse.Namespace) -> int:
    refs = _load_reference_labels(args.ref)
    scores = read_score_file(args.scores)
    corpus = []
    for doc_id, entry in scores.items():
        if doc_id not in refs:
            raise DatasetFormatError(f"no reference for scored document {doc_id!r}")
        gold = refs[doc_id]
        corpus.append((entry, gold))
    threshold, best = tune_threshold(corpus)
    if args.format == "json":
        print(json.dumps({"tau": threshold.tau, "f1": best}))
    else:
        print(f"tau={threshold.tau:.6f} f1={best:.4f}")
    return EXIT_OK


def cmd_results(args: argparse.Namespace) -> int:
    store_path = args.store or os.environ.get(ENV_STORE)
    if not store_path:
        raise DatasetFormatError(f"no store: pass --store or set {ENV_STORE}")
    store = JudgmentStore(store_path)
    judgments = store.load()
    if args.table == "elo":
        state = compute_elo([j for j in judgments if j.mode == "ab"])
        rows = [
            {
                "system": system,
                "rating": f"{rating:.1f}",
                "n": state.counts.get(system, 0),
            }
            for system, rating in sorted(
                state.ratings.items(), key=lambda kv: -kv[1]
            )
        ]
        _emit(args, rows, ["system", "rating", "n"])
        if args.figures:
            from .figures import save_elo_figure

            save_elo_figure(state, args.figures)
    else:
        summaries = compute_likert([j for j in judgments if j.mode == "likert"])
        rows = [
            {
                "system": system,
                "mean": f"{s.mean:.2f}",
                "std": f"{s.std:.2f}",
                "n": s.n,
            }
            for system, s in summaries.items()
        ]
        _emit(args, rows, ["system", "mean", "std", "n"])
        if args.figures:
            from .figures import save_likert_figure

            save_likert_figure(summaries, args.figures)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import StudyConfig, create_app

    store_path = args.store or os.environ.get(ENV_STORE)
    if not store_path:
        raise DatasetFormatError(f"no store: pass --store or set {ENV_STORE}")
    app = create_app(
        store_path,
        StudyConfig.from_file(args.config),
        seed=args.seed,
        trial_timeout=args.timeout,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraseg",
        description="Paragraph and chapter segmentation of speech transcripts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse transcripts into the dataset format")
    p.add_argument("inputs", nargs="+", help="plain-text or .jsonl dataset files")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--abbreviations", help="abbreviation list file for tokenization")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("tokenize", help="split a text file into sentences")
    p.add_argument("input")
    p.add_argument("--abbreviations")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("segment", help="decode paragraph breaks with a model")
    p.add_argument("decoding", choices=["constrained", "naive"])
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="plain-text transcript")
    source.add_argument("--dataset", help="dataset .jsonl")
    p.add_argument("--lm", help=f"scoring endpoint (or ${ENV_LM_URL})")
    p.add_argument("--mock", help="scripted policy file standing in for the model")
    p.add_argument("--template", help="prompt template JSON file")
    p.add_argument("--sectionwise", action="store_true", help="decode per chapter")
    p.add_argument("-o", "--output", help="labels .jsonl destination")
    p.add_argument("--text-dir", help="directory for formatted text outputs")
    p.add_argument("--abbreviations")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="score hypothesis labels against gold")
    p.add_argument("--ref", required=True, help="dataset or labels .jsonl")
    p.add_argument("--hyp", required=True, help="labels .jsonl")
    p.add_argument("--level", choices=[l.value for l in Level], default=None)
    p.add_argument("--strict", action="store_true", help="require every gold doc")
    p.add_argument("--format", choices=["table", "json", "tsv"], default="table")
    p.add_argument("--figures", help="write a PNG summary figure here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="reference segmenters")
    p.add_argument(
        "--kind",
        required=True,
        choices=["random", "rule", "pbr", "threshold", "hierarchical"],
    )
    p.add_argument("--dataset", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--period", type=int, help="rule period (default: corpus mean)")
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--scores", help="score file for --kind threshold")
    p.add_argument("--cues", help="cue lexicon file for --kind pbr")
    p.add_argument("--labels", help="labels to post-process for --kind pbr")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("fidelity", help="check formatted output against source")
    p.add_argument("source", nargs="?", help="source transcript file")
    p.add_argument("output", nargs="?", help="formatted output file")
    p.add_argument("--batch", help="TSV of source/output path pairs")
    p.add_argument("--format", choices=["table", "json", "tsv"], default="table")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("tune-threshold", help="pick the F1-optimal score cutoff")
    p.add_argument("--scores", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_tune_threshold)

    p = sub.add_parser("results", help="aggregate stored human judgments")
    p.add_argument("table", choices=["elo", "likert"])
    p.add_argument("--store", help=f"judgment store path (or ${ENV_STORE})")
    p.add_argument("--format", choices=["table", "json", "tsv"], default="table")
    p.add_argument("--figures")
    p.set_defaults(func=cmd_results)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--config", required=True, help="study config JSON")
    p.add_argument("--store", help=f"judgment store path (or ${ENV_STORE})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--timeout", type=float, default=900.0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fidelity" and not args.batch and not (args.source and args.output):
        parser.error("fidelity needs SOURCE and OUTPUT files, or --batch")
    if args.command == "segment" and not args.mock and not (
        args.lm or os.environ.get(ENV_LM_URL)
    ):
        parser.error(f"segment needs --lm, --mock, or ${ENV_LM_URL}")
    try:
        return args.func(args)
    except (DecodeError, LmTransportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (DatasetFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
