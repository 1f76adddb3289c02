"""Shingling, exact Jaccard similarity, and MinHash signatures.

A document becomes a set of 64-bit fingerprints of its word n-gram windows
(over the dedup-normalized text).  A MinHash signature is the vector of
per-hash-family-member minima over that set; the probability that two
signatures agree on a component equals the exact Jaccard similarity of the
underlying sets.  The hash family is the deterministic construction
documented in :mod:`corpuskit.hashing`, so identical inputs yield bit-identical
signatures everywhere.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .corpus import Document, normalize_for_dedup
from .hashing import apply_family, family_keys, fingerprint64


@dataclass(frozen=True)
class MinHashParams:
    """Signature and banding parameters. k must equal b * r."""

    k: int = 256
    b: int = 16
    r: int = 16
    seed: int = 0
    shingle_n: int = 5
    threshold: float = 0.8

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.k != self.b * self.r:
            raise ValueError(f"k must equal b*r, got k={self.k}, b={self.b}, r={self.r}")
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.shingle_n < 1:
            raise ValueError(f"shingle_n must be >= 1, got {self.shingle_n}")

    @classmethod
    def from_dict(cls, data: dict) -> "MinHashParams":
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "b": self.b,
            "r": self.r,
            "seed": self.seed,
            "shingle_n": self.shingle_n,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class ShingleSet:
    """64-bit shingle fingerprints of one document."""

    doc_id: str
    n: int
    hashes: frozenset[int]


@dataclass(frozen=True, eq=False)
class Signature:
    """Fixed-length vector of per-family-member minima for one document."""

    doc_id: str
    seed: int
    values: np.ndarray  # shape (k,), dtype uint64

    @property
    def k(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return (
            self.doc_id == other.doc_id
            and self.seed == other.seed
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.doc_id, self.seed, self.values.tobytes()))


def shingle(doc: Document, n: int) -> ShingleSet:
    """Fingerprints of every n-word window of the normalized text.

    Windows are word n-grams joined by single spaces. A document with fewer
    than n words contributes the single fingerprint of its whole normalized
    text, so short exact duplicates stay detectable. The result is never
    empty.
    """
    if n < 1:
        raise ValueError(f"shingle width must be >= 1, got {n}")
    normalized = normalize_for_dedup(doc.text)
    words = normalized.split()
    if len(words) < n:
        return ShingleSet(doc.id, n, frozenset([fingerprint64(normalized)]))
    hashes = frozenset(
        fingerprint64(" ".join(words[i : i + n])) for i in range(len(words) - n + 1)
    )
    return ShingleSet(doc.id, n, hashes)


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    """|A ∩ B| / |A ∪ B| over the fingerprint sets."""
    if not a.hashes or not b.hashes:
        raise ValueError("exact_jaccard requires non-empty shingle sets")
    inter = len(a.hashes & b.hashes)
    union = len(a.hashes) + len(b.hashes) - inter
    return inter / union


def minhash_signature(s: ShingleSet, params: MinHashParams) -> Signature:
    """Signature component i = min over fingerprints f of h_i(f).

    Deterministic in (s, params): same shingle set, seed and k give
    byte-identical signatures on every platform and worker count.
    """
    if not s.hashes:
        raise ValueError(f"cannot sign empty shingle set for doc {s.doc_id!r}")
    keys = family_keys(params.seed, params.k)
    fps = np.fromiter(s.hashes, dtype=np.uint64, count=len(s.hashes))
    values = apply_family(fps, keys).min(axis=0)
    return Signature(doc_id=s.doc_id, seed=params.seed, values=values)


def estimate_jaccard(a: Signature, b: Signature) -> float:
    """Fraction of component indices where the two signatures agree."""
    if a.k != b.k:
        raise ValueError(f"signature length mismatch: {a.k} vs {b.k}")
    if a.seed != b.seed:
        raise ValueError(f"signature seed mismatch: {a.seed} vs {b.seed}")
    return float(np.count_nonzero(a.values == b.values)) / a.k


# --- binary checkpoint format ------------------------------------------------
# Per record: u32 BE doc_id byte length, doc_id UTF-8 bytes, u32 BE k,
# u64 BE seed, then k big-endian u64 signature components.


def signature_to_bytes(sig: Signature) -> bytes:
    doc_id = sig.doc_id.encode("utf-8")
    head = struct.pack(">I", len(doc_id)) + doc_id + struct.pack(">IQ", sig.k, sig.seed)
    return head + sig.values.astype(">u8").tobytes()


def signature_from_stream(fh: io.BufferedIOBase) -> Signature | None:
    """Read one signature record; None at clean end-of-stream."""
    head = fh.read(4)
    if not head:
        return None
    if len(head) < 4:
        raise ValueError("truncated signature record")
    (id_len,) = struct.unpack(">I", head)
    doc_id = fh.read(id_len)
    rest = fh.read(12)
    if len(doc_id) < id_len or len(rest) < 12:
        raise ValueError("truncated signature record")
    k, seed = struct.unpack(">IQ", rest)
    payload = fh.read(8 * k)
    if len(payload) < 8 * k:
        raise ValueError("truncated signature record")
    values = np.frombuffer(payload, dtype=">u8").astype(np.uint64)
    return Signature(doc_id=doc_id.decode("utf-8"), seed=seed, values=values)


def write_signatures(path: str | Path, signatures: Iterable[Signature]) -> int:
    """Write signature records to a binary checkpoint file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with path.open("wb") as fh:
        for sig in signatures:
            fh.write(signature_to_bytes(sig))
            n += 1
    return n


def read_signatures(path: str | Path) -> Iterator[Signature]:
    """Stream signature records back from a checkpoint file."""
    with Path(path).open("rb") as fh:
        while True:
            sig = signature_from_stream(fh)
            if sig is None:
                return
            yield sig
