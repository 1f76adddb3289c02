"""Document-quality filters with structural long-document retention.

Every filter is length-neutral by construction: no filter rejects a document
for being long, and a kept document concatenated with itself any number of
times is still kept.  Concretely:

* there is no maximum-length or maximum-token threshold anywhere in
  :class:`FilterConfig`;
* character-repeat runs are measured over non-whitespace characters only, so
  runs cannot arise from joining documents at whitespace;
* the unique-word ratio is measured on the minimal repeating period of the
  word sequence (for non-periodic text this is the plain type/token ratio,
  while m-fold self-repetition leaves the measure unchanged);
* boilerplate markers are matched on the raw text.

Filters are evaluated in the order the :class:`RejectReason` members are
declared; the first failure is the rejection reason.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Iterable

from .corpus import Document, StageStats, stage_stats

# Unicode block ranges per supported target script (letters only are counted;
# membership is checked for characters that pass str.isalpha()).
SCRIPT_RANGES: dict[str, tuple[tuple[int, int], ...]] = {
    "hebrew": ((0x0590, 0x05FF), (0xFB1D, 0xFB4F)),
    "latin": ((0x0041, 0x005A), (0x0061, 0x007A), (0x00C0, 0x024F), (0x1E00, 0x1EFF)),
    "arabic": ((0x0600, 0x06FF), (0x0750, 0x077F), (0xFB50, 0xFDFF), (0xFE70, 0xFEFF)),
    "cyrillic": ((0x0400, 0x04FF), (0x0500, 0x052F)),
    "greek": ((0x0370, 0x03FF), (0x1F00, 0x1FFF)),
}


class RejectReason(str, Enum):
    """Why a document was rejected; declaration order is evaluation order."""

    TooFewWords = "TooFewWords"
    ScriptRatio = "ScriptRatio"
    MeanWordLen = "MeanWordLen"
    CharRepeat = "CharRepeat"
    LowLexicalDiversity = "LowLexicalDiversity"
    Boilerplate = "Boilerplate"


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds for the quality filters.

    Deliberately contains no maximum-length field of any kind. Defaults are
    tunable starting points, not a claim about any particular corpus.
    """

    min_words: int = 20
    target_script: str = "hebrew"
    min_target_script_ratio: float = 0.30
    max_mean_word_len: float = 20.0
    max_char_repeat_run: float = 60
    min_unique_word_ratio: float = 0.30
    boilerplate_markers: tuple[str, ...] = ()

    def __post_init__(self):
        if self.target_script not in SCRIPT_RANGES:
            raise ValueError(
                f"unknown target script {self.target_script!r}; "
                f"supported: {sorted(SCRIPT_RANGES)}"
            )
        if not (0.0 <= self.min_target_script_ratio <= 1.0):
            raise ValueError("min_target_script_ratio must be in [0, 1]")
        if not (0.0 <= self.min_unique_word_ratio <= 1.0):
            raise ValueError("min_unique_word_ratio must be in [0, 1]")
        if self.min_words < 0:
            raise ValueError("min_words must be non-negative")

    @classmethod
    def vacuous(cls) -> "FilterConfig":
        """Config with every threshold at its keep-everything extreme."""
        return cls(
            min_words=0,
            min_target_script_ratio=0.0,
            max_mean_word_len=math.inf,
            max_char_repeat_run=math.inf,
            min_unique_word_ratio=0.0,
            boilerplate_markers=(),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "FilterConfig":
        kwargs = dict(data)
        unknown = set(kwargs) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown filter config keys: {sorted(unknown)}")
        if "boilerplate_markers" in kwargs:
            kwargs["boilerplate_markers"] = tuple(kwargs["boilerplate_markers"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "min_words": self.min_words,
            "target_script": self.target_script,
            "min_target_script_ratio": self.min_target_script_ratio,
            "max_mean_word_len": self.max_mean_word_len,
            "max_char_repeat_run": self.max_char_repeat_run,
            "min_unique_word_ratio": self.min_unique_word_ratio,
            "boilerplate_markers": list(self.boilerplate_markers),
        }


@dataclass
class CleaningReport:
    stage_before: StageStats
    stage_after: StageStats
    reject_counts: dict[RejectReason, int] = field(default_factory=dict)

    @property
    def rejected_count(self) -> int:
        return sum(self.reject_counts.values())

    def to_dict(self) -> dict:
        return {
            "before": self.stage_before.to_dict(),
            "after": self.stage_after.to_dict(),
            "reject_counts": {r.value: n for r, n in sorted(self.reject_counts.items())},
        }


def script_letter_ratio(text: str, script: str) -> float:
    """Fraction of alphabetic characters lying in the script's Unicode blocks.

    A text with no alphabetic characters at all has ratio 0.0.
    """
    ranges = SCRIPT_RANGES[script]
    letters = in_script = 0
    for ch in text:
        if ch.isalpha():
            letters += 1
            cp = ord(ch)
            if any(lo <= cp <= hi for lo, hi in ranges):
                in_script += 1
    return in_script / letters if letters else 0.0


def max_repeat_run(text: str) -> int:
    """Longest run of one repeated non-whitespace character."""
    best = run = 0
    prev = None
    for ch in text:
        if ch.isspace():
            prev = None
            run = 0
            continue
        if ch == prev:
            run += 1
        else:
            prev = ch
            run = 1
        if run > best:
            best = run
    return best


def _minimal_period(items: list[str]) -> int:
    """Length of the shortest p with items == items[:p] * (len/p), via the
    KMP prefix function."""
    n = len(items)
    if n == 0:
        return 0
    pi = [0] * n
    for i in range(1, n):
        j = pi[i - 1]
        while j > 0 and items[i] != items[j]:
            j = pi[j - 1]
        if items[i] == items[j]:
            j += 1
        pi[i] = j
    p = n - pi[n - 1]
    return p if n % p == 0 else n


def unique_word_ratio(words: list[str]) -> float:
    """Type/token ratio of the minimal repeating unit of the word sequence.

    Equals the plain unique-words / total-words ratio whenever the sequence is
    not an exact repetition; an m-fold repetition scores the same as a single
    copy, which keeps the measure independent of document growth.
    """
    if not words:
        return 1.0
    unit = words[: _minimal_period(words)]
    return len(set(unit)) / len(unit)


def apply_filters(doc: Document, cfg: FilterConfig) -> RejectReason | None:
    """First failing filter in declared order, or None when the document is
    kept. Passing documents are kept regardless of length."""
    words = doc.text.split()

    if len(words) < cfg.min_words:
        return RejectReason.TooFewWords

    if script_letter_ratio(doc.text, cfg.target_script) < cfg.min_target_script_ratio:
        return RejectReason.ScriptRatio

    if words:
        mean_len = sum(len(w) for w in words) / len(words)
        if mean_len > cfg.max_mean_word_len:
            return RejectReason.MeanWordLen

    if max_repeat_run(doc.text) > cfg.max_char_repeat_run:
        return RejectReason.CharRepeat

    if unique_word_ratio(words) < cfg.min_unique_word_ratio:
        return RejectReason.LowLexicalDiversity

    for marker in cfg.boilerplate_markers:
        if marker and marker in doc.text:
            return RejectReason.Boilerplate

    return None


def clean_corpus(
    docs: Iterable[Document], cfg: FilterConfig
) -> tuple[list[Document], CleaningReport]:
    """Filter a corpus; survivors keep their input order."""
    docs = list(docs)
    survivors: list[Document] = []
    counts: dict[RejectReason, int] = {}
    for doc in docs:
        reason = apply_filters(doc, cfg)
        if reason is None:
            survivors.append(doc)
        else:
            counts[reason] = counts.get(reason, 0) + 1
    report = CleaningReport(
        stage_before=stage_stats(docs, "input"),
        stage_after=stage_stats(survivors, "cleaned"),
        reject_counts=counts,
    )
    return survivors, report
