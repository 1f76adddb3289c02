"""Document model, streaming JSONL ingestion, normalization, and stage statistics.

A corpus is a stream of :class:`Document` records read from JSON Lines files
(one UTF-8 JSON object per line with string fields ``id`` and ``text``; a
``source`` field in the file is overridden by the label the reader is invoked
with).  Word counts follow the whitespace convention: a word is a maximal run
of non-whitespace characters, split on Unicode whitespace.  Counting happens
on the raw text, before any normalization.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(Exception):
    """Fatal corpus-level error (unreadable input, id collision)."""


class DuplicateIdError(CorpusError):
    """Two documents in one run share an id."""


@dataclass(frozen=True, slots=True)
class Document:
    """One corpus record. Immutable; safe to share across workers."""

    id: str
    source: str
    text: str
    byte_len: int
    word_count: int

    @classmethod
    def create(cls, id: str, source: str, text: str) -> "Document":
        """Build a Document with its size counters computed from ``text``."""
        if not id:
            raise ValueError("document id must be non-empty")
        return cls(
            id=id,
            source=source,
            text=text,
            byte_len=len(text.encode("utf-8")),
            word_count=word_count(text),
        )

    def to_json(self) -> str:
        return json.dumps(
            {"id": self.id, "source": self.source, "text": self.text},
            ensure_ascii=False,
        )


@dataclass(frozen=True, slots=True)
class StageStats:
    """Per-stage (documents, words, bytes) accounting triple."""

    stage_name: str
    doc_count: int
    word_count: int
    byte_count: int

    @classmethod
    def from_docs(cls, docs: Iterable[Document], stage_name: str) -> "StageStats":
        n = words = nbytes = 0
        for doc in docs:
            n += 1
            words += doc.word_count
            nbytes += doc.byte_len
        return cls(stage_name, n, words, nbytes)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage_name,
            "documents": self.doc_count,
            "words": self.word_count,
            "bytes": self.byte_count,
        }


@dataclass(frozen=True)
class CorpusManifest:
    """Ordered (source label, input path) pairs plus run seed and output dir."""

    sources: tuple[tuple[str, str], ...]
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if not self.sources:
            raise ValueError("manifest needs at least one source")
        labels = [label for label, _ in self.sources]
        if len(set(labels)) != len(labels):
            raise ValueError(f"source labels must be distinct, got {labels}")


@dataclass(frozen=True, slots=True)
class IngestError:
    """One malformed input line; ingestion continues past it."""

    path: str
    line_no: int
    message: str


def word_count(text: str) -> int:
    """Number of maximal runs of non-whitespace characters (Unicode whitespace)."""
    return len(text.split())


def normalize_for_dedup(text: str) -> str:
    """Canonical form feeding shingling and exact-duplicate detection.

    Unicode NFC, whitespace runs collapsed to single spaces, leading/trailing
    whitespace stripped. No case folding and no character removal, so distinct
    content never collapses. Idempotent.
    """
    return " ".join(unicodedata.normalize("NFC", text).split())


def load_jsonl(
    path: str | Path,
    source: str,
    errors: list[IngestError] | None = None,
) -> Iterator[Document]:
    """Stream Documents from a JSONL file in file order.

    Lines must be JSON objects with a string ``text`` field; ``id`` is taken
    from the object or synthesized as ``<source>:<line-number>`` when absent.
    Malformed lines are appended to ``errors`` (if given) and skipped; a
    duplicate id aborts the stream with both occurrences cited.
    """
    path = Path(path)
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                if errors is not None:
                    errors.append(IngestError(str(path), line_no, f"invalid JSON: {exc}"))
                continue
            if not isinstance(obj, dict):
                if errors is not None:
                    errors.append(IngestError(str(path), line_no, "line is not a JSON object"))
                continue
            text = obj.get("text")
            if not isinstance(text, str):
                if errors is not None:
                    errors.append(IngestError(str(path), line_no, "missing or non-string 'text'"))
                continue
            doc_id = obj.get("id")
            if doc_id is None:
                doc_id = f"{source}:{line_no}"
            elif not isinstance(doc_id, str) or not doc_id:
                if errors is not None:
                    errors.append(IngestError(str(path), line_no, "'id' must be a non-empty string"))
                continue
            if doc_id in seen:
                raise DuplicateIdError(
                    f"duplicate document id {doc_id!r} in {path}: "
                    f"lines {seen[doc_id]} and {line_no}"
                )
            seen[doc_id] = line_no
            yield Document.create(id=doc_id, source=source, text=text)


def write_jsonl(path: str | Path, docs: Iterable[Document]) -> int:
    """Write documents as JSONL (id, source, text). Returns the document count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(doc.to_json())
            fh.write("\n")
            n += 1
    return n


def stage_stats(docs: Iterable[Document], stage_name: str) -> StageStats:
    """Exact (documents, words, bytes) sums over ``docs``."""
    return StageStats.from_docs(docs, stage_name)


def format_stats_table(rows: Iterable[StageStats]) -> str:
    """Aligned plain-text table: stage, bytes, documents, words."""
    rows = list(rows)
    header = ("stage", "bytes", "documents", "words")
    cells = [header] + [
        (r.stage_name, f"{r.byte_count:,}", f"{r.doc_count:,}", f"{r.word_count:,}")
        for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(4)]
    lines = []
    for i, row in enumerate(cells):
        cols = [row[0].ljust(widths[0])]
        cols += [row[j].rjust(widths[j]) for j in range(1, 4)]
        lines.append("  ".join(cols))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
