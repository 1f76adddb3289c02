"""Token-based evaluation metrics for classification, tagging, and QA.

Conventions, chosen once and used everywhere:

* F1 is 2PR/(P+R), defined as 0.0 whenever P+R is zero, so scores are never
  NaN.
* BIO repair: an I-X tag with no live span of type X before it (sequence
  start, after O, or after a span of a different type) is treated as B-X.
* Spans are (type, start, end) with end exclusive.
* QA answer normalization is NFC, punctuation removal (Unicode P*
  categories), and whitespace collapse. There is no lowercasing and no
  article stripping; the metric targets Hebrew, where neither transfers.
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


@dataclass(frozen=True)
class MetricReport:
    """Scores for one metric run; fields that do not apply stay None."""

    task: str
    n_examples: int
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    accuracy: float | None = None
    exact_match: float | None = None
    per_split: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        out: dict = {"task": self.task, "n_examples": self.n_examples}
        for key in ("precision", "recall", "f1", "accuracy", "exact_match"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.per_split is not None:
            out["per_split"] = list(self.per_split)
        return out


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def accuracy(pairs: Sequence[tuple[object, object]]) -> MetricReport:
    """Fraction of (pred, gold) pairs that agree."""
    if not pairs:
        raise ValueError("accuracy needs at least one example")
    correct = sum(1 for pred, gold in pairs if pred == gold)
    return MetricReport(
        task="accuracy",
        n_examples=len(pairs),
        accuracy=correct / len(pairs),
    )


def extract_spans(tags: Sequence[str]) -> list[tuple[str, int, int]]:
    """(type, start, end) entity spans from BIO tags, end exclusive.

    Orphan I-X tags open a new span (the repair rule); any tag that is not
    "O", "B-<type>", or "I-<type>" raises.
    """
    spans: list[tuple[str, int, int]] = []
    start: int | None = None
    current = ""
    for i, tag in enumerate(tags):
        if tag == "O":
            if start is not None:
                spans.append((current, start, i))
                start = None
            continue
        if len(tag) < 3 or tag[1] != "-" or tag[0] not in "BI":
            raise ValueError(f"malformed BIO tag {tag!r} at position {i}")
        prefix, entity_type = tag[0], tag[2:]
        if prefix == "I" and start is not None and current == entity_type:
            continue  # span extends
        if start is not None:
            spans.append((current, start, i))
        start = i
        current = entity_type
    if start is not None:
        spans.append((current, start, len(tags)))
    return spans


def span_f1(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
) -> MetricReport:
    """Micro-averaged P/R/F1 over exact (type, start, end) span matches."""
    if not pairs:
        raise ValueError("span_f1 needs at least one example")
    matched = n_pred = n_gold = 0
    for idx, (pred_tags, gold_tags) in enumerate(pairs):
        if len(pred_tags) != len(gold_tags):
            raise ValueError(
                f"example {idx}: pred has {len(pred_tags)} tags, "
                f"gold has {len(gold_tags)}"
            )
        pred_spans = set(extract_spans(pred_tags))
        gold_spans = set(extract_spans(gold_tags))
        matched += len(pred_spans & gold_spans)
        n_pred += len(pred_spans)
        n_gold += len(gold_spans)
    precision = matched / n_pred if n_pred else 0.0
    recall = matched / n_gold if n_gold else 0.0
    return MetricReport(
        task="span_f1",
        n_examples=len(pairs),
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
    )


def normalize_answer(text: str) -> str:
    """NFC, strip punctuation, collapse whitespace."""
    text = unicodedata.normalize("NFC", text)
    kept = "".join(
        ch for ch in text if not unicodedata.category(ch).startswith("P")
    )
    return " ".join(kept.split())


def _qa_f1(pred_tokens: list[str], gold_tokens: list[str]) -> float:
    if not pred_tokens or not gold_tokens:
        return 1.0 if pred_tokens == gold_tokens else 0.0
    common = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if common == 0:
        return 0.0
    precision = common / len(pred_tokens)
    recall = common / len(gold_tokens)
    return _f1(precision, recall)


def squad_f1_em(
    examples: Sequence[tuple[str, Sequence[str]]],
) -> MetricReport:
    """Mean token-overlap F1 and exact match, each maximized over golds."""
    if not examples:
        raise ValueError("squad_f1_em needs at least one example")
    f1_total = em_total = 0.0
    for idx, (pred, golds) in enumerate(examples):
        if not golds:
            raise ValueError(f"example {idx} has no gold answers")
        pred_norm = normalize_answer(pred)
        pred_tokens = pred_norm.split()
        best_f1 = 0.0
        best_em = 0.0
        for gold in golds:
            gold_norm = normalize_answer(gold)
            best_f1 = max(best_f1, _qa_f1(pred_tokens, gold_norm.split()))
            if pred_norm == gold_norm:
                best_em = 1.0
        f1_total += best_f1
        em_total += best_em
    n = len(examples)
    return MetricReport(
        task="squad_f1_em",
        n_examples=n,
        f1=f1_total / n,
        exact_match=em_total / n,
    )


def binary_f1(
    pairs: Sequence[tuple[object, object]], positive: object
) -> MetricReport:
    """P/R/F1 for the positive class over (pred, gold) pairs."""
    if not pairs:
        raise ValueError("binary_f1 needs at least one example")
    tp = fp = fn = 0
    for pred, gold in pairs:
        if pred == positive and gold == positive:
            tp += 1
        elif pred == positive:
            fp += 1
        elif gold == positive:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return MetricReport(
        task="binary_f1",
        n_examples=len(pairs),
        precision=precision,
        recall=recall,
        f1=_f1(precision, recall),
    )


def mean_over_splits(scores: Sequence[float]) -> tuple[float, tuple[float, ...]]:
    """Arithmetic mean of per-split scores, keeping the per-split values."""
    if not scores:
        raise ValueError("mean_over_splits needs at least one score")
    values = tuple(float(s) for s in scores)
    return sum(values) / len(values), values


# --- example readers (JSONL, one example per line) ---------------------------


def _read_objects(path: str | Path) -> Iterable[tuple[int, dict]]:
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError(f"{path}:{line_no}: expected an object")
            yield line_no, obj


def _require(obj: dict, key: str, path: str | Path, line_no: int) -> object:
    if key not in obj:
        raise ValueError(f"{path}:{line_no}: missing key {key!r}")
    return obj[key]


def read_label_pairs(path: str | Path) -> list[tuple[object, object]]:
    """Lines of {"pred": label, "gold": label}."""
    pairs = []
    for line_no, obj in _read_objects(path):
        pairs.append(
            (_require(obj, "pred", path, line_no), _require(obj, "gold", path, line_no))
        )
    return pairs


def read_tag_pairs(path: str | Path) -> list[tuple[list[str], list[str]]]:
    """Lines of {"pred": [tags...], "gold": [tags...]}."""
    pairs = []
    for line_no, obj in _read_objects(path):
        pred = _require(obj, "pred", path, line_no)
        gold = _require(obj, "gold", path, line_no)
        if not isinstance(pred, list) or not isinstance(gold, list):
            raise ValueError(f"{path}:{line_no}: pred and gold must be tag lists")
        pairs.append(([str(t) for t in pred], [str(t) for t in gold]))
    return pairs


def read_qa_examples(path: str | Path) -> list[tuple[str, list[str]]]:
    """Lines of {"pred": str, "golds": [str, ...]} ("gold": str also accepted)."""
    examples = []
    for line_no, obj in _read_objects(path):
        pred = str(_require(obj, "pred", path, line_no))
        if "golds" in obj:
            golds = obj["golds"]
            if not isinstance(golds, list):
                raise ValueError(f"{path}:{line_no}: golds must be a list")
            golds = [str(g) for g in golds]
        else:
            golds = [str(_require(obj, "gold", path, line_no))]
        examples.append((pred, golds))
    return examples
