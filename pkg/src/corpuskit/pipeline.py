"""End-to-end corpus pipeline: ingest, dedup, clean, train, account.

Stage order is fixed: per-source ingest, per-source dedup, cross-source
dedup over the merged survivors, cleaning, then (optionally) tokenizer
training and the long-document share. Every randomized component draws from
the single run seed, so a run is a pure function of (inputs, config): the
surviving corpus, signature checkpoint, and reports are byte-identical on
replay at any worker count. Wall-clock timings are the one exception and
live in their own report section.

Artifacts written under the output directory:

* dedup_<label>.jsonl     per-source dedup survivors
* merged_dedup.jsonl      cross-source dedup survivors
* cleaned.jsonl           final surviving corpus
* signatures.bin          MinHash signatures of the final corpus
* evidence.jsonl          one (stage, kept, removed, jaccard, kind) line
                          per removal, auditable against the corpus files
* vocab.txt, merges.txt   tokenizer artifacts (when training is configured)
* report.json             the full RunReport
* config.json             the configuration actually used, for exact replay
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, TypeVar

from . import bpe
from .cleaning import CleaningReport, FilterConfig, clean_corpus
from .corpus import (
    CorpusManifest,
    Document,
    IngestError,
    StageStats,
    load_jsonl,
    stage_stats,
    write_jsonl,
)
from .dedup import DedupReport, compute_signatures, dedup_across, dedup_corpus
from .minhash import MinHashParams, write_signatures

T = TypeVar("T")

DEFAULT_LONG_DOC_LIMIT = 512

_CONFIG_KEYS = {
    "sources",
    "output_dir",
    "seed",
    "workers",
    "minhash",
    "filters",
    "tokenizer",
    "long_doc_limit",
}


class StageError(Exception):
    """A pipeline stage failed; carries the partial report of prior stages."""

    def __init__(self, stage: str, cause: Exception, partial: "RunReport"):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; one seed drives every randomized component."""

    manifest: CorpusManifest
    minhash: MinHashParams
    filters: FilterConfig
    vocab_size: int | None = None
    specials: tuple[str, ...] = bpe.DEFAULT_SPECIALS
    long_doc_limit: int = DEFAULT_LONG_DOC_LIMIT
    workers: int = 1

    def __post_init__(self):
        if self.minhash.seed != self.manifest.seed:
            raise ValueError(
                f"minhash seed {self.minhash.seed} disagrees with "
                f"run seed {self.manifest.seed}; the run seed governs"
            )
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.long_doc_limit < 1:
            raise ValueError(f"long_doc_limit must be >= 1, got {self.long_doc_limit}")

    def to_dict(self) -> dict:
        out: dict = {
            "sources": [{"label": l, "path": p} for l, p in self.manifest.sources],
            "output_dir": self.manifest.output_dir,
            "seed": self.manifest.seed,
            "workers": self.workers,
            "minhash": self.minhash.to_dict(),
            "filters": self.filters.to_dict(),
            "long_doc_limit": self.long_doc_limit,
        }
        del out["minhash"]["seed"]  # the top-level seed governs
        if self.vocab_size is not None:
            out["tokenizer"] = {
                "vocab_size": self.vocab_size,
                "specials": list(self.specials),
            }
        return out


def config_from_dict(data: dict) -> PipelineConfig:
    """Build a PipelineConfig from parsed JSON; unknown keys are errors."""
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "sources" not in data:
        raise ValueError("config needs a 'sources' list")

    sources = []
    for entry in data["sources"]:
        if isinstance(entry, dict):
            sources.append((str(entry["label"]), str(entry["path"])))
        else:
            label, path = entry
            sources.append((str(label), str(path)))
    seed = int(data.get("seed", 0))
    manifest = CorpusManifest(
        sources=tuple(sources),
        seed=seed,
        output_dir=str(data.get("output_dir", "out")),
    )

    minhash_opts = dict(data.get("minhash", {}))
    if "seed" in minhash_opts:
        raise ValueError("set the run seed at the top level, not under 'minhash'")
    minhash = MinHashParams.from_dict({**minhash_opts, "seed": seed})

    filters = FilterConfig.from_dict(data.get("filters", {}))

    vocab_size: int | None = None
    specials = bpe.DEFAULT_SPECIALS
    if "tokenizer" in data:
        tok = dict(data["tokenizer"])
        vocab_size = int(tok.pop("vocab_size"))
        if "specials" in tok:
            specials = tuple(str(s) for s in tok.pop("specials"))
        if tok:
            raise ValueError(f"unknown tokenizer config keys: {sorted(tok)}")

    return PipelineConfig(
        manifest=manifest,
        minhash=minhash,
        filters=filters,
        vocab_size=vocab_size,
        specials=specials,
        long_doc_limit=int(data.get("long_doc_limit", DEFAULT_LONG_DOC_LIMIT)),
        workers=int(data.get("workers", 1)),
    )


def load_config(path: str | Path) -> PipelineConfig:
    with Path(path).open("r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


@dataclass
class RunReport:
    """Stage accounting plus the per-stage sub-reports."""

    stages: list[StageStats] = field(default_factory=list)
    ingest_error_counts: dict[str, int] = field(default_factory=dict)
    within_dedup: dict[str, DedupReport] = field(default_factory=dict)
    cross_dedup: DedupReport | None = None
    cleaning: CleaningReport | None = None
    tokenizer_summary: dict | None = None
    long_docs: dict | None = None
    timings: list[tuple[str, float]] = field(default_factory=list)

    def to_dict(self, include_timings: bool = True) -> dict:
        out: dict = {
            "stages": [s.to_dict() for s in self.stages],
            "ingest_error_counts": dict(sorted(self.ingest_error_counts.items())),
            "dedup": {
                "within": {
                    label: rep.to_dict()
                    for label, rep in sorted(self.within_dedup.items())
                },
                "cross": self.cross_dedup.to_dict() if self.cross_dedup else None,
            },
            "cleaning": self.cleaning.to_dict() if self.cleaning else None,
            "tokenizer": self.tokenizer_summary,
            "long_docs": self.long_docs,
        }
        if include_timings:
            out["timings"] = [
                {"stage": name, "seconds": secs} for name, secs in self.timings
            ]
        return out


def _dump_json(path: Path, data: dict) -> None:
    with path.open("w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Execute the full pipeline, writing artifacts under the output dir."""
    out_dir = Path(cfg.manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport()
    evidence: list[dict] = []

    def run_stage(name: str, fn: Callable[[], T]) -> T:
        start = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            raise StageError(name, exc, report) from exc
        report.timings.append((name, time.perf_counter() - start))
        return result

    def record_removals(stage: str, dedup_report: DedupReport) -> None:
        for r in dedup_report.removals:
            evidence.append(
                {
                    "stage": stage,
                    "kept": r.kept,
                    "removed": r.removed,
                    "jaccard": r.jaccard,
                    "kind": r.kind,
                }
            )

    # ingest
    by_source: dict[str, list[Document]] = {}
    for label, path in cfg.manifest.sources:
        def ingest(label=label, path=path) -> list[Document]:
            errors: list[IngestError] = []
            docs = list(load_jsonl(path, label, errors=errors))
            report.ingest_error_counts[label] = len(errors)
            return docs

        by_source[label] = run_stage(f"ingest:{label}", ingest)
        report.stages.append(stage_stats(by_source[label], f"raw:{label}"))

    # within-source dedup
    deduped: list[tuple[str, list[Document]]] = []
    for label, docs in by_source.items():
        def dedup_one(docs=docs) -> tuple[list[Document], DedupReport]:
            return dedup_corpus(docs, cfg.minhash, workers=cfg.workers)

        survivors, dedup_report = run_stage(f"dedup:{label}", dedup_one)
        deduped.append((label, survivors))
        report.within_dedup[label] = dedup_report
        record_removals(f"dedup:{label}", dedup_report)
        report.stages.append(stage_stats(survivors, f"dedup:{label}"))
        write_jsonl(out_dir / f"dedup_{label}.jsonl", survivors)

    # cross-source dedup over the merged survivors
    if len(deduped) > 1:
        merged, cross_report = run_stage(
            "merged-dedup",
            lambda: dedup_across(deduped, cfg.minhash, workers=cfg.workers),
        )
        report.cross_dedup = cross_report
        record_removals("merged-dedup", cross_report)
    else:
        merged = deduped[0][1]
    report.stages.append(stage_stats(merged, "merged-dedup"))
    write_jsonl(out_dir / "merged_dedup.jsonl", merged)

    # clean
    cleaned, cleaning_report = run_stage(
        "clean", lambda: clean_corpus(merged, cfg.filters)
    )
    report.cleaning = cleaning_report
    report.stages.append(stage_stats(cleaned, "cleaned"))
    write_jsonl(out_dir / "cleaned.jsonl", cleaned)

    # tokenizer and long-document share
    if cfg.vocab_size is not None:
        vocab = run_stage(
            "train-bpe",
            lambda: bpe.train_bpe(cleaned, cfg.vocab_size, specials=cfg.specials),
        )
        bpe.save_vocab(vocab, out_dir / "vocab.txt", out_dir / "merges.txt")
        report.tokenizer_summary = {
            "vocab_size": vocab.vocab_size,
            "requested_vocab_size": cfg.vocab_size,
            "merge_count": len(vocab.merges),
            "specials": list(vocab.specials),
        }
        fraction, (long_count, total) = run_stage(
            "longshare",
            lambda: bpe.long_doc_share(cleaned, vocab, limit=cfg.long_doc_limit),
        )
        report.long_docs = {
            "limit": cfg.long_doc_limit,
            "fraction": fraction,
            "long_count": long_count,
            "total_count": total,
        }

    # signature checkpoint for the final corpus
    signatures = run_stage(
        "sign",
        lambda: compute_signatures(cleaned, cfg.minhash, workers=cfg.workers),
    )
    write_signatures(out_dir / "signatures.bin", signatures)

    with (out_dir / "evidence.jsonl").open("w", encoding="utf-8") as fh:
        for record in evidence:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    _dump_json(out_dir / "report.json", report.to_dict())
    _dump_json(out_dir / "config.json", cfg.to_dict())
    return report
