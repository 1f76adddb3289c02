"""Byte-level BPE tokenizer: training, encoding, decoding, long-document stats.

The base alphabet is the 256 single bytes, so any UTF-8 text encodes without
unknown symbols. Training greedily merges the most frequent adjacent token
pair (pair occurrences counted per position, so "aaaa" contributes three
(a,a) occurrences) until the target vocabulary size is reached or no pair
occurs at least twice. Ties break to the lexicographically smallest
(left_id, right_id) tuple, which makes training fully deterministic.

Pre-tokenization splits text into maximal whitespace / non-whitespace runs
(the same Unicode whitespace definition as word counting). Merges are learned
and applied within non-whitespace runs only; whitespace bytes always encode
as base byte tokens. Applying the ordered merge list left-to-right per run is
the whole encoder, so encoding is deterministic everywhere.

Token ids: special tokens first (0..S-1), then the 256 byte tokens
(S..S+255), then one id per merge in training order.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Document

logger = logging.getLogger(__name__)

DEFAULT_SPECIALS = ("<pad>", "<unk>", "<s>", "</s>", "<mask>")


@dataclass(frozen=True)
class BpeVocab:
    """Trained vocabulary: specials, byte alphabet, ordered merges."""

    specials: tuple[str, ...]
    merges: tuple[tuple[int, int], ...]
    token_bytes: tuple[bytes, ...]

    @classmethod
    def build(
        cls, specials: Sequence[str], merges: Sequence[tuple[int, int]]
    ) -> "BpeVocab":
        specials = tuple(specials)
        if len(set(specials)) != len(specials):
            raise ValueError("special tokens must be distinct")
        tokens: list[bytes] = [s.encode("utf-8") for s in specials]
        tokens += [bytes([b]) for b in range(256)]
        for i, (left, right) in enumerate(merges):
            result_id = len(specials) + 256 + i
            if not (len(specials) <= left < result_id and len(specials) <= right < result_id):
                raise ValueError(
                    f"merge {i} refers to ids ({left}, {right}) that do not "
                    f"precede it in the vocabulary"
                )
            tokens.append(tokens[left] + tokens[right])
        return cls(
            specials=specials,
            merges=tuple((int(l), int(r)) for l, r in merges),
            token_bytes=tuple(tokens),
        )

    @property
    def num_specials(self) -> int:
        return len(self.specials)

    @property
    def byte_offset(self) -> int:
        return len(self.specials)

    @property
    def first_merge_id(self) -> int:
        return len(self.specials) + 256

    @property
    def vocab_size(self) -> int:
        return len(self.token_bytes)

    def is_special(self, token_id: int) -> bool:
        return 0 <= token_id < len(self.specials)


@dataclass(frozen=True)
class TokenSequence:
    doc_id: str
    ids: tuple[int, ...]
    length: int  # token count excluding special tokens


def _segments(text: str) -> Iterable[tuple[bool, str]]:
    """Maximal (is_whitespace, run) segments, concatenating back to text."""
    for is_ws, group in groupby(text, key=str.isspace):
        yield is_ws, "".join(group)


def _count_segments(docs: Iterable[Document]) -> tuple[Counter, int]:
    seg_counts: Counter = Counter()
    n_docs = 0
    for doc in docs:
        n_docs += 1
        for is_ws, seg in _segments(doc.text):
            if not is_ws:
                seg_counts[seg.encode("utf-8")] += 1
    return seg_counts, n_docs


def _merge_word(
    word: tuple[int, ...], pair: tuple[int, int], new_id: int
) -> tuple[int, ...]:
    """Replace occurrences of pair with new_id, greedy left-to-right."""
    out: list[int] = []
    i = 0
    n = len(word)
    while i < n:
        if i + 1 < n and word[i] == pair[0] and word[i + 1] == pair[1]:
            out.append(new_id)
            i += 2
        else:
            out.append(word[i])
            i += 1
    return tuple(out)


def train_bpe(
    docs: Iterable[Document],
    vocab_size: int,
    specials: Sequence[str] = DEFAULT_SPECIALS,
) -> BpeVocab:
    """Train a byte-level BPE vocabulary of exactly ``vocab_size`` tokens.

    Stops early (with a warning) when no adjacent pair occurs at least twice,
    in which case the vocabulary comes out smaller than requested.
    """
    specials = tuple(specials)
    floor = 256 + len(specials)
    if vocab_size < floor:
        raise ValueError(
            f"vocab_size must be at least {floor} "
            f"(256 bytes + {len(specials)} specials), got {vocab_size}"
        )
    seg_counts, n_docs = _count_segments(docs)
    if n_docs == 0:
        raise ValueError("cannot train on an empty corpus")

    target_merges = vocab_size - floor
    offset = len(specials)
    words: dict[tuple[int, ...], int] = {}
    for seg, cnt in seg_counts.items():
        key = tuple(offset + b for b in seg)
        words[key] = words.get(key, 0) + cnt

    merges: list[tuple[int, int]] = []
    while len(merges) < target_merges:
        pair_counts: Counter = Counter()
        for word, cnt in words.items():
            for a, b in zip(word, word[1:]):
                pair_counts[(a, b)] += cnt
        if not pair_counts:
            break
        best_count = max(pair_counts.values())
        if best_count < 2:
            break
        best_pair = min(p for p, c in pair_counts.items() if c == best_count)
        new_id = offset + 256 + len(merges)
        merges.append(best_pair)
        new_words: dict[tuple[int, ...], int] = {}
        for word, cnt in words.items():
            merged = _merge_word(word, best_pair, new_id)
            new_words[merged] = new_words.get(merged, 0) + cnt
        words = new_words

    if len(merges) < target_merges:
        logger.warning(
            "BPE training stopped after %d of %d merges: no pair occurs twice",
            len(merges),
            target_merges,
        )
    return BpeVocab.build(specials, merges)


def _encode_word(data: bytes, vocab: BpeVocab) -> tuple[int, ...]:
    ids = [vocab.byte_offset + b for b in data]
    if len(ids) < 2:
        return tuple(ids)
    present = set(ids)  # superset of ids in play; only ever grows
    result_id = vocab.first_merge_id
    for rank, (left, right) in enumerate(vocab.merges):
        if left in present and right in present:
            merged = _merge_word(tuple(ids), (left, right), result_id + rank)
            if len(merged) != len(ids):
                present.add(result_id + rank)
                ids = list(merged)
                if len(ids) == 1:
                    break
    return tuple(ids)


def encode(
    text: str,
    vocab: BpeVocab,
    doc_id: str = "",
    _cache: dict[bytes, tuple[int, ...]] | None = None,
) -> TokenSequence:
    """Tokenize text by applying the merge list in training order."""
    cache = _cache if _cache is not None else {}
    ids: list[int] = []
    for is_ws, seg in _segments(text):
        data = seg.encode("utf-8")
        if is_ws:
            ids.extend(vocab.byte_offset + b for b in data)
            continue
        word_ids = cache.get(data)
        if word_ids is None:
            word_ids = _encode_word(data, vocab)
            cache[data] = word_ids
        ids.extend(word_ids)
    length = sum(1 for t in ids if not vocab.is_special(t))
    return TokenSequence(doc_id=doc_id, ids=tuple(ids), length=length)


def decode_bytes(ids: Iterable[int], vocab: BpeVocab) -> bytes:
    """Concatenated byte strings of the tokens; raises on an invalid id."""
    parts = []
    for token_id in ids:
        if not (0 <= token_id < vocab.vocab_size):
            raise ValueError(
                f"token id {token_id} out of range for vocab of size {vocab.vocab_size}"
            )
        parts.append(vocab.token_bytes[token_id])
    return b"".join(parts)


def decode_with_flag(ids: Iterable[int], vocab: BpeVocab) -> tuple[str, bool]:
    """Decode to text. The flag is False when the byte concatenation was not
    valid UTF-8; the text is then a lossless surrogateescape rendering."""
    data = decode_bytes(ids, vocab)
    try:
        return data.decode("utf-8"), True
    except UnicodeDecodeError:
        return data.decode("utf-8", errors="surrogateescape"), False


def decode(ids: Iterable[int], vocab: BpeVocab) -> str:
    return decode_with_flag(ids, vocab)[0]


def token_length(ids: Iterable[int], vocab: BpeVocab) -> int:
    """Token count excluding special tokens."""
    return sum(1 for t in ids if not vocab.is_special(t))


def long_doc_share(
    docs: Iterable[Document],
    vocab: BpeVocab,
    limit: int = 512,
) -> tuple[float, tuple[int, int]]:
    """Fraction of documents whose encoded length exceeds ``limit`` tokens.

    Returns (fraction, (long_count, total_count)); an empty corpus has
    fraction 0.0.
    """
    cache: dict[bytes, tuple[int, ...]] = {}
    long_count = total = 0
    for doc in docs:
        total += 1
        if encode(doc.text, vocab, doc_id=doc.id, _cache=cache).length > limit:
            long_count += 1
    fraction = long_count / total if total else 0.0
    return fraction, (long_count, total)


# --- vocabulary serialization ------------------------------------------------
# Two diff-friendly text artifacts:
#   * token table: "<id>\t<escaped token>" lines, with header comments naming
#     the format and the special tokens;
#   * merges file: "<left> <right>" escaped byte strings, one merge per line
#     in training order.
# Escaping: printable ASCII except backslash stays literal; everything else
# (whitespace bytes included) becomes \xNN, so fields never contain raw
# separators.

_VOCAB_HEADER = "# corpuskit bpe vocabulary v1"
_MERGES_HEADER = "# corpuskit bpe merges v1"


def escape_token(data: bytes) -> str:
    out = []
    for b in data:
        if 0x21 <= b <= 0x7E and b != 0x5C:
            out.append(chr(b))
        else:
            out.append(f"\\x{b:02x}")
    return "".join(out)


def unescape_token(text: str) -> bytes:
    out = bytearray()
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if text[i : i + 2] == "\\x" and i + 4 <= len(text):
                out.append(int(text[i + 2 : i + 4], 16))
                i += 4
            else:
                raise ValueError(f"bad escape in token {text!r}")
        else:
            out.extend(ch.encode("utf-8"))
            i += 1
    return bytes(out)


def save_vocab(vocab: BpeVocab, vocab_path: str | Path, merges_path: str | Path) -> None:
    vocab_path, merges_path = Path(vocab_path), Path(merges_path)
    vocab_path.parent.mkdir(parents=True, exist_ok=True)
    merges_path.parent.mkdir(parents=True, exist_ok=True)
    with vocab_path.open("w", encoding="utf-8") as fh:
        fh.write(_VOCAB_HEADER + "\n")
        fh.write("# specials: " + " ".join(vocab.specials) + "\n")
        for token_id, data in enumerate(vocab.token_bytes):
            fh.write(f"{token_id}\t{escape_token(data)}\n")
    with merges_path.open("w", encoding="utf-8") as fh:
        fh.write(_MERGES_HEADER + "\n")
        for left, right in vocab.merges:
            fh.write(
                escape_token(vocab.token_bytes[left])
                + " "
                + escape_token(vocab.token_bytes[right])
                + "\n"
            )


def load_vocab(vocab_path: str | Path, merges_path: str | Path) -> BpeVocab:
    """Rebuild a vocabulary from its two text artifacts.

    Merge entries name tokens by their byte strings; they are resolved to ids
    by replaying vocabulary construction (earliest id wins when several
    tokens share a byte string) and the result is validated against the token
    table, so any resolution the files cannot pin down is reported rather
    than guessed.
    """
    vocab_path, merges_path = Path(vocab_path), Path(merges_path)

    specials: list[str] = []
    table: list[tuple[int, bytes]] = []
    with vocab_path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# specials:"):
                    specials = line[len("# specials:") :].split()
                continue
            id_text, _, token_text = line.partition("\t")
            table.append((int(id_text), unescape_token(token_text)))
    table.sort(key=lambda item: item[0])
    if [i for i, _ in table] != list(range(len(table))):
        raise ValueError(f"token table in {vocab_path} has gaps or duplicate ids")

    offset = len(specials)
    by_bytes: dict[bytes, int] = {}
    for token_id in range(offset, len(table)):
        data = table[token_id][1]
        by_bytes.setdefault(data, token_id)

    merges: list[tuple[int, int]] = []
    with merges_path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            left_text, _, right_text = line.partition(" ")
            try:
                left = by_bytes[unescape_token(left_text)]
                right = by_bytes[unescape_token(right_text)]
            except KeyError as exc:
                raise ValueError(f"merges file references unknown token {exc}") from exc
            merges.append((left, right))

    vocab = BpeVocab.build(specials, merges)
    if list(vocab.token_bytes) != [data for _, data in table]:
        raise ValueError(
            f"merges in {merges_path} do not reproduce the token table in {vocab_path}"
        )
    return vocab
