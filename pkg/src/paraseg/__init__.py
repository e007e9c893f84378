"""Paragraph and chapter segmentation of speech transcripts.

The library splits transcripts into sentences, decides paragraph and
chapter breaks at sentence boundaries (via constrained model decoding or
reference baselines), scores segmentations, verifies that formatted output
preserves the source text, and runs a small human preference study.
"""

from .core import (
    PARAGRAPH_DELIMITER,
    BoundaryLabels,
    ChapterSpan,
    Label,
    Level,
    LevelMismatchError,
    SegmentedDocument,
    Sentence,
    Transcript,
    labels_to_masses,
    masses_to_labels,
    project_hierarchical,
)
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
from .fidelity import FidelityReport, FidelityTable, check_fidelity, fidelity_table
from .ingest import (
    ChapterRecord,
    DatasetFormatError,
    DatasetRecord,
    ScoreEntry,
    gold_labels,
    parse_plain_text,
    read_jsonl_dataset,
    render_plain_text,
    to_segmented_document,
    write_jsonl_dataset,
)
from .metrics import (
    CorpusReport,
    EvalReport,
    PkWindow,
    TranspositionWindow,
    boundary_f1,
    boundary_similarity,
    evaluate_corpus,
    evaluate_pair,
    pk,
)
from .senttok import AbbreviationList, PunctuationSet, tokenize_sentences

__version__ = "0.1.0"

__all__ = [
    "AbbreviationList",
    "BoundaryLabels",
    "ChapterRecord",
    "ChapterSpan",
    "CorpusReport",
    "DatasetFormatError",
    "DatasetRecord",
    "DecodeError",
    "EvalReport",
    "FidelityReport",
    "FidelityTable",
    "HttpLmClient",
    "Label",
    "Level",
    "LevelMismatchError",
    "LmTransportError",
    "PARAGRAPH_DELIMITER",
    "PkWindow",
    "PromptTemplate",
    "PunctuationSet",
    "ScoreEntry",
    "ScriptedLm",
    "ScriptedPolicy",
    "SegmentedDocument",
    "Sentence",
    "Transcript",
    "TranspositionWindow",
    "boundary_f1",
    "boundary_similarity",
    "check_fidelity",
    "evaluate_corpus",
    "evaluate_pair",
    "fidelity_table",
    "gold_labels",
    "insert_paragraphs",
    "insert_paragraphs_sectionwise",
    "labels_to_masses",
    "masses_to_labels",
    "naive_rewrite",
    "parse_plain_text",
    "pk",
    "project_hierarchical",
    "read_jsonl_dataset",
    "render_labels",
    "render_plain_text",
    "to_segmented_document",
    "tokenize_sentences",
    "write_jsonl_dataset",
]
