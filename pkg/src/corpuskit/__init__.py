"""Corpus curation toolkit: dedup, cleaning, BPE tokenization, metrics."""

from .bpe import (
    DEFAULT_SPECIALS,
    BpeVocab,
    TokenSequence,
    decode,
    decode_with_flag,
    encode,
    load_vocab,
    long_doc_share,
    save_vocab,
    train_bpe,
)
from .cleaning import (
    CleaningReport,
    FilterConfig,
    RejectReason,
    apply_filters,
    clean_corpus,
)
from .corpus import (
    CorpusError,
    CorpusManifest,
    Document,
    DuplicateIdError,
    IngestError,
    StageStats,
    format_stats_table,
    load_jsonl,
    normalize_for_dedup,
    stage_stats,
    word_count,
    write_jsonl,
)
from .dedup import (
    DedupReport,
    DuplicateCluster,
    Removal,
    VerifiedPair,
    dedup_across,
    dedup_corpus,
    exact_dedup,
)
from .metrics import (
    MetricReport,
    accuracy,
    binary_f1,
    extract_spans,
    mean_over_splits,
    normalize_answer,
    span_f1,
    squad_f1_em,
)
from .minhash import (
    MinHashParams,
    ShingleSet,
    Signature,
    estimate_jaccard,
    exact_jaccard,
    minhash_signature,
    read_signatures,
    shingle,
    write_signatures,
)
from .pipeline import PipelineConfig, RunReport, StageError, load_config, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SPECIALS",
    "BpeVocab",
    "TokenSequence",
    "decode",
    "decode_with_flag",
    "encode",
    "load_vocab",
    "long_doc_share",
    "save_vocab",
    "train_bpe",
    "CleaningReport",
    "FilterConfig",
    "RejectReason",
    "apply_filters",
    "clean_corpus",
    "CorpusError",
    "CorpusManifest",
    "Document",
    "DuplicateIdError",
    "IngestError",
    "StageStats",
    "format_stats_table",
    "load_jsonl",
    "normalize_for_dedup",
    "stage_stats",
    "word_count",
    "write_jsonl",
    "DedupReport",
    "DuplicateCluster",
    "Removal",
    "VerifiedPair",
    "dedup_across",
    "dedup_corpus",
    "exact_dedup",
    "MetricReport",
    "accuracy",
    "binary_f1",
    "extract_spans",
    "mean_over_splits",
    "normalize_answer",
    "span_f1",
    "squad_f1_em",
    "MinHashParams",
    "ShingleSet",
    "Signature",
    "estimate_jaccard",
    "exact_jaccard",
    "minhash_signature",
    "read_signatures",
    "shingle",
    "write_signatures",
    "PipelineConfig",
    "RunReport",
    "StageError",
    "load_config",
    "run_pipeline",
    "__version__",
]
