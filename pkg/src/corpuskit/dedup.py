"""Exact and approximate (MinHash/LSH) document deduplication.

The pipeline per corpus: exact dedup on normalized text, then shingle,
sign, band-index, candidate generation, exact-Jaccard verification,
union-find clustering, and removal of everything but one representative per
cluster.  Verification makes every positive exact: no document is removed on
the strength of an LSH collision alone.

Cross-corpus dedup (`dedup_across`) runs the same machinery over the union of
already internally deduplicated corpora and attributes removals per source
pair.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .corpus import Document, StageStats, normalize_for_dedup, stage_stats
from .hashing import fold_band_key
from .minhash import (
    MinHashParams,
    ShingleSet,
    Signature,
    exact_jaccard,
    minhash_signature,
    shingle,
)


@dataclass(frozen=True)
class VerifiedPair:
    """Candidate pair whose exact Jaccard met the threshold."""

    a: str
    b: str
    jaccard: float


@dataclass(frozen=True)
class DuplicateCluster:
    """Connected component of verified near-duplicates; one member survives."""

    members: frozenset[str]
    representative: str


@dataclass(frozen=True)
class Removal:
    """Evidence for one removed document: kept id, removed id, exact Jaccard."""

    kept: str
    removed: str
    jaccard: float
    kind: str  # "exact" or "near"


@dataclass
class DedupReport:
    """Accounting for one dedup run.

    ``removals`` lists one record per removed document.  Exact duplicates
    carry jaccard 1.0.  Near-duplicate records carry the exact Jaccard between
    the cluster representative and the removed member; for members that joined
    a cluster transitively this can fall below the threshold even though every
    cluster adjacency was verified at or above it.
    """

    stage_before: StageStats
    stage_after: StageStats
    cluster_count: int
    exact_removed_count: int
    removed_count: int
    removals: list[Removal] = field(default_factory=list)
    cross_source_removals: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "before": self.stage_before.to_dict(),
            "after": self.stage_after.to_dict(),
            "cluster_count": self.cluster_count,
            "exact_removed_count": self.exact_removed_count,
            "removed_count": self.removed_count,
            "removals": [
                {"kept": r.kept, "removed": r.removed, "jaccard": r.jaccard, "kind": r.kind}
                for r in self.removals
            ],
            "cross_source_removals": dict(sorted(self.cross_source_removals.items())),
        }


class UnionFind:
    """Disjoint sets with path compression; roots resolve to the smallest id."""

    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        if x not in self.parent:
            self.parent[x] = x
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: str, y: str) -> None:
        px, py = self.find(x), self.find(y)
        root = min(px, py)
        self.parent[px] = self.parent[py] = root

    def components(self) -> list[frozenset[str]]:
        groups: dict[str, set[str]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in groups.values()]


def _normalized_key(doc: Document) -> bytes:
    # 128-bit digest: no realistic collision risk, unlike a 64-bit fingerprint.
    return hashlib.blake2b(
        normalize_for_dedup(doc.text).encode("utf-8"), digest_size=16
    ).digest()


def exact_dedup(docs: Iterable[Document]) -> tuple[list[Document], list[tuple[str, str]]]:
    """Collapse documents with identical normalized text to one survivor.

    The survivor per group follows the representative policy (greatest word
    count, then smallest id), so the surviving-id set does not depend on input
    order. Returns (survivors in input order, list of (kept_id, removed_id)).
    """
    docs = list(docs)
    groups: dict[bytes, list[Document]] = {}
    for doc in docs:
        groups.setdefault(_normalized_key(doc), []).append(doc)
    kept_ids: dict[str, str] = {}  # removed id -> kept id
    survivors_set: set[str] = set()
    for members in groups.values():
        rep = select_representative([d.id for d in members], {d.id: d for d in members})
        survivors_set.add(rep)
        for d in members:
            if d.id != rep:
                kept_ids[d.id] = rep
    survivors = [d for d in docs if d.id in survivors_set]
    removed = sorted((kept, removed) for removed, kept in kept_ids.items())
    return survivors, removed


def band_keys(sig: Signature, params: MinHashParams) -> list[int]:
    """The b 64-bit band keys of a signature (band j covers rows j*r..(j+1)*r)."""
    if sig.k != params.k:
        raise ValueError(
            f"signature length {sig.k} does not match params k={params.k}"
        )
    values = sig.values
    return [
        fold_band_key(j, values[j * params.r : (j + 1) * params.r])
        for j in range(params.b)
    ]


@dataclass
class LshIndex:
    """Per-band hash tables mapping band key -> doc ids in that bucket."""

    params: MinHashParams
    tables: list[dict[int, list[str]]] = field(default_factory=list)

    def __post_init__(self):
        if not self.tables:
            self.tables = [{} for _ in range(self.params.b)]

    def insert(self, sig: Signature) -> None:
        for table, key in zip(self.tables, band_keys(sig, self.params)):
            table.setdefault(key, []).append(sig.doc_id)


def build_index(signatures: Iterable[Signature], params: MinHashParams) -> LshIndex:
    index = LshIndex(params)
    for sig in signatures:
        index.insert(sig)
    return index


def candidate_pairs(index: LshIndex) -> set[tuple[str, str]]:
    """All unordered id pairs co-occurring in at least one band bucket."""
    pairs: set[tuple[str, str]] = set()
    for table in index.tables:
        for bucket in table.values():
            if len(bucket) < 2:
                continue
            for a, b in combinations(sorted(set(bucket)), 2):
                pairs.add((a, b))
    return pairs


def verify_pairs(
    pairs: Iterable[tuple[str, str]],
    shingles: Mapping[str, ShingleSet],
    threshold: float,
) -> list[VerifiedPair]:
    """Keep exactly the pairs whose exact Jaccard meets the threshold."""
    verified = []
    for a, b in sorted(pairs):
        for doc_id in (a, b):
            if doc_id not in shingles:
                raise ValueError(f"no shingle set available for doc {doc_id!r}")
        j = exact_jaccard(shingles[a], shingles[b])
        if j >= threshold:
            verified.append(VerifiedPair(a, b, j))
    return verified


def cluster(
    verified: Iterable[VerifiedPair], docs_by_id: Mapping[str, Document]
) -> list[DuplicateCluster]:
    """Connected components of verified pairs; singletons are not clusters."""
    uf = UnionFind()
    for pair in verified:
        uf.union(pair.a, pair.b)
    clusters = [
        DuplicateCluster(members=c, representative=select_representative(c, docs_by_id))
        for c in uf.components()
        if len(c) >= 2
    ]
    clusters.sort(key=lambda c: min(c.members))
    return clusters


def select_representative(
    members: Iterable[str], docs_by_id: Mapping[str, Document]
) -> str:
    """Member with the greatest word count; ties break to the smallest id."""
    members = list(members)
    if not members:
        raise ValueError("cannot select a representative from an empty cluster")
    return min(members, key=lambda m: (-docs_by_id[m].word_count, m))


def _sign_batch(batch: Sequence[Document], params: MinHashParams) -> list[Signature]:
    return [minhash_signature(shingle(d, params.shingle_n), params) for d in batch]


def compute_signatures(
    docs: Sequence[Document], params: MinHashParams, workers: int = 1
) -> list[Signature]:
    """MinHash signatures for all docs, in input order.

    With workers > 1 the docs are signed in parallel chunks; results are
    identical to the single-worker path because signing is pure and chunk
    results are reassembled in order.
    """
    if workers <= 1 or len(docs) < 2 * workers:
        return _sign_batch(docs, params)
    chunk = max(1, (len(docs) + workers - 1) // workers)
    batches = [docs[i : i + chunk] for i in range(0, len(docs), chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = pool.map(_sign_batch, batches, [params] * len(batches))
        return [sig for batch in results for sig in batch]


def _dedup(
    docs: list[Document], params: MinHashParams, workers: int
) -> tuple[list[Document], DedupReport]:
    before = stage_stats(docs, "input")
    docs_by_id = {d.id: d for d in docs}
    if len(docs_by_id) != len(docs):
        raise ValueError("duplicate document ids in dedup input")

    survivors, exact_pairs = exact_dedup(docs)

    signatures = compute_signatures(survivors, params, workers=workers)
    index = build_index(signatures, params)
    pairs = candidate_pairs(index)

    # Shingle sets are recomputed for candidate members only, keeping memory
    # proportional to the candidate set rather than the corpus.
    candidate_ids = {doc_id for pair in pairs for doc_id in pair}
    shingles = {
        doc_id: shingle(docs_by_id[doc_id], params.shingle_n)
        for doc_id in sorted(candidate_ids)
    }
    verified = verify_pairs(pairs, shingles, params.threshold)
    clusters = cluster(verified, docs_by_id)

    removals = [Removal(kept, removed, 1.0, "exact") for kept, removed in exact_pairs]
    near_removed: set[str] = set()
    for c in clusters:
        rep_shingles = shingles[c.representative]
        for member in sorted(c.members - {c.representative}):
            near_removed.add(member)
            removals.append(
                Removal(
                    c.representative,
                    member,
                    exact_jaccard(rep_shingles, shingles[member]),
                    "near",
                )
            )
    removals.sort(key=lambda r: (r.kept, r.removed))

    final = [d for d in survivors if d.id not in near_removed]
    after = stage_stats(final, "deduplicated")

    cross: dict[str, int] = {}
    for r in removals:
        src_kept = docs_by_id[r.kept].source
        src_removed = docs_by_id[r.removed].source
        if src_kept != src_removed:
            key = "|".join(sorted((src_kept, src_removed)))
            cross[key] = cross.get(key, 0) + 1

    report = DedupReport(
        stage_before=before,
        stage_after=after,
        cluster_count=len(clusters),
        exact_removed_count=len(exact_pairs),
        removed_count=len(removals),
        removals=removals,
        cross_source_removals=cross,
    )
    return final, report


def dedup_corpus(
    docs: Iterable[Document], params: MinHashParams, workers: int = 1
) -> tuple[list[Document], DedupReport]:
    """Deduplicate one corpus: exact pass, then verified approximate matching."""
    return _dedup(list(docs), params, workers)


def dedup_across(
    corpora: Sequence[tuple[str, Sequence[Document]]],
    params: MinHashParams,
    workers: int = 1,
) -> tuple[list[Document], DedupReport]:
    """Deduplicate across several labeled corpora over one shared index.

    Each input corpus should already be internally deduplicated. Removals
    whose kept and removed documents come from different sources are counted
    in the report's ``cross_source_removals``, keyed "sourceA|sourceB".
    """
    if len(corpora) < 2:
        raise ValueError("dedup_across needs at least two corpora")
    merged: list[Document] = []
    for _, docs in corpora:
        merged.extend(docs)
    return _dedup(merged, params, workers)
