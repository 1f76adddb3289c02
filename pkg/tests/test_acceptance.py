"""Acceptance gate: one numbered end-to-end check per shipped guarantee.

Each test prints a single "[criterion N] name: PASS/FAIL" line with the
measured values, then asserts. The checks are oracle- and property-based at
desk scale: estimator error bounds, banding detection rates, brute-force
dedup equivalence, hand-predicted pipeline accounting, tokenizer training
against an independent reference, exact long-share arithmetic, exhaustive
metric enumeration, and byte-level determinism across worker counts.
"""

import itertools
import json
import math
import random
import time
from pathlib import Path

import pytest

from corpuskit import bpe
from corpuskit.corpus import Document, load_jsonl, stage_stats
from corpuskit.dedup import (
    build_index,
    candidate_pairs,
    compute_signatures,
    dedup_corpus,
    verify_pairs,
)
from corpuskit.metrics import (
    binary_f1,
    extract_spans,
    mean_over_splits,
    span_f1,
    squad_f1_em,
)
from corpuskit.minhash import (
    MinHashParams,
    ShingleSet,
    estimate_jaccard,
    exact_jaccard,
    minhash_signature,
    shingle,
)
from corpuskit.pipeline import config_from_dict, run_pipeline

from conftest import make_doc, word_doc, write_corpus
from test_bpe import oracle_train


def report_line(capsys, num, name, passed, detail):
    status = "PASS" if passed else "FAIL"
    with capsys.disabled():
        print(f"[criterion {num}] {name}: {status} ({detail})")


def words(prefix, n):
    return [f"{prefix}{i}" for i in range(n)]


def test_01_estimator_error_bound(capsys):
    # 200 set pairs spanning exact Jaccard [0, 1]; k=256 estimates must
    # track exact values with mean absolute error <= 0.04, in under 10 s.
    start = time.perf_counter()
    params = MinHashParams(seed=7)
    counter = itertools.count(1)
    errors = []
    exacts = []
    union_size = 500
    for t in range(200):
        shared_count = round(t / 199 * union_size)
        unique_total = union_size - shared_count
        shared = {next(counter) for _ in range(shared_count)}
        only_a = {next(counter) for _ in range(unique_total - unique_total // 2)}
        only_b = {next(counter) for _ in range(unique_total // 2)}
        a = ShingleSet("a", 5, frozenset(shared | only_a))
        b = ShingleSet("b", 5, frozenset(shared | only_b))
        exact = exact_jaccard(a, b)
        estimate = estimate_jaccard(
            minhash_signature(a, params), minhash_signature(b, params)
        )
        exacts.append(exact)
        errors.append(abs(estimate - exact))
    elapsed = time.perf_counter() - start
    mae = sum(errors) / len(errors)
    passed = mae <= 0.04 and min(exacts) == 0.0 and max(exacts) == 1.0 and elapsed < 10.0
    report_line(
        capsys,
        1,
        "estimator error bound",
        passed,
        f"mae={mae:.4f} <= 0.04 over 200 pairs, {elapsed:.1f}s < 10s",
    )
    assert min(exacts) == 0.0 and max(exacts) == 1.0
    assert mae <= 0.04
    assert elapsed < 10.0


def test_02_banding_detection_curve(capsys):
    # With k=256, b=16, r=16, threshold 0.8: a planted pair at exact
    # J=0.92 must be caught in >= 95 of 100 seeded runs (analytic 0.9925);
    # a pair at exact J=0.50 must never survive verification.
    base = words("אב", 100)
    near = words("גד", 4) + base[4:]
    doc_a = word_doc("A", base)
    doc_b = word_doc("B", near)
    assert exact_jaccard(shingle(doc_a, 5), shingle(doc_b, 5)) == 92 / 100

    tail = words("תם", 52)
    doc_c = word_doc("C", words("פא", 24) + tail)
    doc_d = word_doc("D", words("צב", 24) + tail)
    assert exact_jaccard(shingle(doc_c, 5), shingle(doc_d, 5)) == 48 / 96

    detected = 0
    false_removals = 0
    for seed in range(100):
        params = MinHashParams(seed=seed)
        high_survivors, _ = dedup_corpus([doc_a, doc_b], params)
        detected += len(high_survivors) == 1
        _, low_report = dedup_corpus([doc_c, doc_d], params)
        false_removals += low_report.removed_count

    passed = detected >= 95 and false_removals == 0
    report_line(
        capsys,
        2,
        "banding detection curve",
        passed,
        f"J=0.92 detected {detected}/100 (need >= 95, analytic 99.25), "
        f"J=0.50 removals {false_removals} (need exactly 0)",
    )
    assert detected >= 95
    assert false_removals == 0


def test_03_prefix_only_difference(capsys):
    # A 400-word document and the same document behind a 10-word opening
    # sentence must collapse to one survivor in >= 99 of 100 seeded runs.
    body = words("גוף", 400)
    base = word_doc("base", body)
    prefixed = word_doc("prefixed", words("פתיח", 10) + body)
    assert exact_jaccard(shingle(base, 5), shingle(prefixed, 5)) == 396 / 406

    merged_runs = 0
    for seed in range(100):
        survivors, run_report = dedup_corpus([base, prefixed], MinHashParams(seed=seed))
        if len(survivors) == 1 and run_report.removals[0].kind == "near":
            # representative policy: the longer document survives
            assert survivors[0].id == "prefixed"
            merged_runs += 1

    passed = merged_runs >= 99
    report_line(
        capsys,
        3,
        "prefix-only near duplicates",
        passed,
        f"merged in {merged_runs}/100 runs (need >= 99, J=396/406)",
    )
    assert merged_runs >= 99


def test_04_verified_pairs_match_brute_force(capsys):
    # On 50 random corpora the verified-pair set must equal brute-force
    # {exact J >= threshold} intersected with the banding candidates, with
    # no pair below threshold; under 60 s total.
    start = time.perf_counter()
    total_verified = 0
    total_candidates = 0
    for t in range(50):
        rng = random.Random(1000 + t)
        params = MinHashParams(seed=t)
        pool = words(f"ק{t}_", 300)
        docs = []
        for i in range(rng.randrange(30, 80)):
            length = rng.randrange(8, 60)
            docs.append(
                word_doc(f"d{i:03d}", [rng.choice(pool) for _ in range(length)])
            )
        # variants with 1-2 swapped words land on both sides of the
        # threshold depending on document length and swap position
        for v in range(rng.randrange(8, 18)):
            source = rng.choice(docs)
            mutated = source.text.split()
            for pos in rng.sample(range(len(mutated)), rng.randrange(1, 3)):
                mutated[pos] = f"חדש{t}_{v}_{pos}"
            docs.append(word_doc(f"v{v:03d}", mutated))

        shingles = {d.id: shingle(d, params.shingle_n) for d in docs}
        signatures = compute_signatures(docs, params)
        candidates = candidate_pairs(build_index(signatures, params))
        verified = verify_pairs(candidates, shingles, params.threshold)

        brute = set()
        ids = sorted(shingles)
        for a, b in itertools.combinations(ids, 2):
            if exact_jaccard(shingles[a], shingles[b]) >= params.threshold:
                brute.add((a, b))

        assert {(v.a, v.b) for v in verified} == brute & candidates, f"corpus {t}"
        assert all(v.jaccard >= params.threshold for v in verified)
        total_verified += len(verified)
        total_candidates += len(candidates)
    elapsed = time.perf_counter() - start

    passed = elapsed < 60.0 and total_verified > 0
    report_line(
        capsys,
        4,
        "verification equals brute force",
        passed,
        f"50 corpora, {total_candidates} candidates, {total_verified} verified, "
        f"{elapsed:.1f}s < 60s",
    )
    assert total_verified > 0  # the corpora must actually exercise the path
    assert elapsed < 60.0


def test_05_pipeline_accounting(capsys, tmp_path):
    # Two-source run with planted duplicates and dirty documents: the stage
    # report must match hand-predicted (documents, words) exactly, shrink
    # monotonically after the merge, and reconcile with the output files.
    base200 = words("אב", 200)
    write_corpus(
        tmp_path / "alpha.jsonl",
        [
            {"id": "a1", "text": " ".join(base200)},
            {"id": "a2", "text": "  " + "  ".join(base200) + "  "},
            {"id": "a3", "text": " ".join(words("יחיד", 60))},
            {"id": "a4", "text": "רק ארבע מלים כאן"},
        ],
    )
    write_corpus(
        tmp_path / "beta.jsonl",
        [
            {"id": "b1", "text": " ".join(words("גד", 2) + base200[2:])},
            {"id": "b2", "text": " ".join(words("שונה", 60))},
            {"id": "b3", "text": " ".join(["אלף"] * 39 + ["בית"])},
        ],
    )
    a1 = word_doc("a1", base200)
    b1 = word_doc("b1", words("גד", 2) + base200[2:])
    assert exact_jaccard(shingle(a1, 5), shingle(b1, 5)) == 194 / 198

    cfg = config_from_dict(
        {
            "sources": [
                {"label": "alpha", "path": str(tmp_path / "alpha.jsonl")},
                {"label": "beta", "path": str(tmp_path / "beta.jsonl")},
            ],
            "output_dir": str(tmp_path / "out"),
            "seed": 0,
        }
    )
    run_report = run_pipeline(cfg)

    predicted = {
        "raw:alpha": (4, 464),
        "raw:beta": (3, 300),
        "dedup:alpha": (3, 264),
        "dedup:beta": (3, 300),
        "merged-dedup": (5, 364),
        "cleaned": (3, 320),
    }
    actual = {s.stage_name: (s.doc_count, s.word_count) for s in run_report.stages}

    by_name = {s.stage_name: s for s in run_report.stages}
    monotone = (
        by_name["merged-dedup"].doc_count
        <= by_name["dedup:alpha"].doc_count + by_name["dedup:beta"].doc_count
        and by_name["cleaned"].doc_count <= by_name["merged-dedup"].doc_count
        and by_name["cleaned"].word_count <= by_name["merged-dedup"].word_count
    )

    reconciled = True
    for stage_name, file_name in [
        ("dedup:alpha", "dedup_alpha.jsonl"),
        ("dedup:beta", "dedup_beta.jsonl"),
        ("merged-dedup", "merged_dedup.jsonl"),
        ("cleaned", "cleaned.jsonl"),
    ]:
        docs = list(load_jsonl(tmp_path / "out" / file_name, "check"))
        recomputed = stage_stats(docs, stage_name)
        claimed = by_name[stage_name]
        reconciled = reconciled and (
            recomputed.doc_count,
            recomputed.word_count,
            recomputed.byte_count,
        ) == (claimed.doc_count, claimed.word_count, claimed.byte_count)

    passed = actual == predicted and monotone and reconciled
    report_line(
        capsys,
        5,
        "pipeline stage accounting",
        passed,
        f"6 stages hand-predicted exactly={actual == predicted}, "
        f"monotone={monotone}, files reconcile={reconciled}",
    )
    assert actual == predicted
    assert monotone
    assert reconciled
    assert run_report.cross_dedup.cross_source_removals == {"alpha|beta": 1}


def test_06_dedup_idempotent_and_order_free(capsys):
    # Re-running dedup on its own output removes nothing; shuffling the
    # input (10 permutations) never changes the surviving-id set.
    exact_base = words("קב", 30)
    n_words = words("נא", 150)
    m_words = words("מא", 120)
    docs = [
        word_doc("e1", exact_base),
        make_doc("e2", "  " + "  ".join(exact_base)),
        make_doc("e3", " ".join(exact_base) + " "),
        word_doc("n1", n_words),
        word_doc("n2", ["נב0"] + n_words[1:]),
        word_doc("m1", m_words),
        word_doc("m2", ["מב0"] + m_words[1:]),
    ]
    rng = random.Random(17)
    for i in range(30):
        docs.append(word_doc(f"u{i:02d}", words(f"ע{i}_", rng.randrange(15, 40))))

    params = MinHashParams(seed=0)
    survivors, first = dedup_corpus(docs, params)
    survivor_ids = {d.id for d in survivors}

    rerun_survivors, rerun = dedup_corpus(survivors, params)
    idempotent = rerun.removed_count == 0 and {
        d.id for d in rerun_survivors
    } == survivor_ids

    order_free = True
    shuffled = list(docs)
    for _ in range(10):
        rng.shuffle(shuffled)
        permuted_survivors, _ = dedup_corpus(shuffled, params)
        order_free = order_free and {d.id for d in permuted_survivors} == survivor_ids

    passed = first.removed_count == 4 and idempotent and order_free
    report_line(
        capsys,
        6,
        "dedup idempotence and order independence",
        passed,
        f"removed {first.removed_count}/37, rerun removed {rerun.removed_count} "
        f"(need 0), 10 permutations stable={order_free}",
    )
    assert first.removed_count == 4
    assert idempotent
    assert order_free


def test_07_bpe_against_reference(capsys):
    # (a) trained merges equal a recount-every-step reference on 25 random
    # corpora <= 10 KB; (b) 1,000 random Unicode strings round trip;
    # (c) vocabulary arithmetic is exact; (d) "aaab aaab" merges (a,a) first.
    syllables = [
        "אב", "גד", "הו", "זח", "טי", "כל", "מנ", "סע", "פצ", "קר",
        "שת", "בא", "דג", "וה", "חז", "ba", "de", "lo", "mi", "ta",
    ]
    oracle_matches = 0
    for t in range(25):
        rng = random.Random(3000 + t)
        texts = []
        for _ in range(rng.randrange(3, 8)):
            n = rng.randrange(20, 90)
            text_words = [
                "".join(rng.choice(syllables) for _ in range(rng.randrange(1, 4)))
                for _ in range(n)
            ]
            texts.append(" ".join(text_words))
        corpus = [make_doc(f"d{i}", text) for i, text in enumerate(texts)]
        assert sum(d.byte_len for d in corpus) <= 10_240
        n_merges = rng.randrange(10, 40)
        vocab = bpe.train_bpe(corpus, 256 + 5 + n_merges)
        oracle_matches += list(vocab.merges) == oracle_train(texts, n_merges, 5)

    rng = random.Random(90)
    ranges = [
        (0x0020, 0x007E),
        (0x05D0, 0x05EA),
        (0x00A0, 0x024F),
        (0x0590, 0x05FF),
        (0x2000, 0x203C),
        (0x1F300, 0x1F64F),
        (0x4E00, 0x4E80),
    ]
    samples = []
    for _ in range(400):
        n = rng.randrange(0, 60)
        samples.append(
            "".join(chr(rng.randrange(lo, hi + 1)) for lo, hi in [rng.choice(ranges)] * n)
        )
    hebrew_bank = words("שם", 40)
    for _ in range(300):
        samples.append(" ".join(rng.choice(hebrew_bank) for _ in range(rng.randrange(1, 25))))
    ws = " \t\n  abא"
    for _ in range(200):
        samples.append("".join(rng.choice(ws) for _ in range(rng.randrange(0, 40))))
    for _ in range(100):
        samples.append("🙂" * rng.randrange(0, 4) + " עם 🚀 טקסט " + "x" * rng.randrange(0, 9))
    assert len(samples) == 1000

    trainer_docs = [
        make_doc("h", " ".join(hebrew_bank * 4)),
        make_doc("l", "latin text with some repeated latin text aaab aaab"),
    ]
    round_vocab = bpe.train_bpe(trainer_docs, 340)
    round_trips = sum(
        bpe.decode(bpe.encode(s, round_vocab).ids, round_vocab) == s for s in samples
    )

    rich = bpe.train_bpe(trainer_docs, 300)
    boundary = bpe.train_bpe(trainer_docs, 261)
    starved = bpe.train_bpe([make_doc("s", "ab cd")], 270)
    arithmetic = (
        rich.vocab_size == 300
        and len(rich.merges) == 300 - 256 - 5
        and boundary.vocab_size == 261
        and boundary.merges == ()
        and starved.merges == ()
        and all(
            v.vocab_size == v.num_specials + 256 + len(v.merges)
            for v in (rich, boundary, starved)
        )
    )

    aaab = bpe.train_bpe([make_doc("d", "aaab aaab")], 262)
    a_id = aaab.byte_offset + ord("a")
    first_merge_is_aa = (
        aaab.merges[0] == (a_id, a_id)
        and aaab.token_bytes[aaab.first_merge_id] == b"aa"
    )

    passed = (
        oracle_matches == 25
        and round_trips == 1000
        and arithmetic
        and first_merge_is_aa
    )
    report_line(
        capsys,
        7,
        "bpe trainer and codec",
        passed,
        f"reference match {oracle_matches}/25 corpora, round trips "
        f"{round_trips}/1000, size arithmetic={arithmetic}, "
        f"first merge aa={first_merge_is_aa}",
    )
    assert oracle_matches == 25
    assert round_trips == 1000
    assert arithmetic
    assert first_merge_is_aa


def test_08_long_document_share_exact(capsys):
    # A corpus built so exactly 30 of 100 documents exceed 512 tokens under
    # the trained tokenizer must yield a share of 0.300 exactly. Long
    # documents have >= 600 words (>= 600 tokens however training merges);
    # short ones are <= 419 bytes (<= 419 tokens even with zero merges).
    rng = random.Random(8)
    docs = []
    for i in range(30):
        docs.append(
            word_doc(f"long{i:02d}", [f"מ{rng.randrange(400)}" for _ in range(600)])
        )
    for i in range(70):
        docs.append(
            word_doc(f"short{i:02d}", [f"אב{rng.randrange(100)}" for _ in range(60)])
        )

    vocab = bpe.train_bpe(docs, 330)
    lengths = {d.id: bpe.encode(d.text, vocab, doc_id=d.id).length for d in docs}
    assert all(lengths[d.id] > 512 for d in docs[:30])
    assert all(lengths[d.id] <= 512 for d in docs[30:])

    fraction, (long_count, total) = bpe.long_doc_share(docs, vocab, limit=512)
    passed = fraction == 0.3 and (long_count, total) == (30, 100)
    report_line(
        capsys,
        8,
        "long-document share",
        passed,
        f"share={fraction:.3f} (need 0.300 exactly), {long_count}/{total} docs",
    )
    assert fraction == 0.3
    assert (long_count, total) == (30, 100)


def reference_spans(tags):
    """Maximal-run span reading, structured unlike the library's scanner."""
    spans = []
    i = 0
    while i < len(tags):
        if tags[i] == "O":
            i += 1
            continue
        entity_type = tags[i][2:]
        j = i + 1
        while j < len(tags) and tags[j] == f"I-{entity_type}":
            j += 1
        spans.append((entity_type, i, j))
        i = j
    return spans


def reference_span_scores(pairs):
    matched = n_pred = n_gold = 0
    for pred, gold in pairs:
        pred_spans = set(reference_spans(pred))
        gold_spans = set(reference_spans(gold))
        matched += len(pred_spans & gold_spans)
        n_pred += len(pred_spans)
        n_gold += len(gold_spans)
    precision = matched / n_pred if n_pred else 0.0
    recall = matched / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


SQUAD_FIXTURES = [
    ("a", ["a"], 1.0, 1.0),
    ("a b", ["b c"], 1 / 2, 0.0),
    ("a b", ["a b c d"], 2 / 3, 0.0),
    ("a a b", ["a b b"], 2 / 3, 0.0),
    ("", [""], 1.0, 1.0),
    ("", ["x"], 0.0, 0.0),
    ("x", [""], 0.0, 0.0),
    ("...", ["!!!"], 1.0, 1.0),
    ("a b", ["z", "a b"], 1.0, 1.0),
    ("a b", ["a b c d", "a z"], 2 / 3, 0.0),
    ("שלום עולם", ["שלום, עולם "], 1.0, 1.0),
    ("שלום", ["עולם"], 0.0, 0.0),
    ("a b c", ["a b c"], 1.0, 1.0),
    ("a b c", ["c b a"], 1.0, 0.0),
    ("a", ["a a"], 2 / 3, 0.0),
    ("the cat", ["cat"], 2 / 3, 0.0),
    ("The cat", ["the cat"], 1 / 2, 0.0),
    ("a-b", ["ab"], 1.0, 1.0),
    ("ab", ["a b"], 0.0, 0.0),
    ("a b c d", ["b d"], 2 / 3, 0.0),
    ("é", ["é"], 1.0, 1.0),
    ("a b", ["b a", "q"], 1.0, 0.0),
]

BINARY_FIXTURES = [
    # (tp, fp, fn, tn, precision, recall, f1)
    (1, 0, 0, 0, 1.0, 1.0, 1.0),
    (0, 1, 0, 0, 0.0, 0.0, 0.0),
    (0, 0, 1, 0, 0.0, 0.0, 0.0),
    (0, 0, 0, 1, 0.0, 0.0, 0.0),
    (1, 1, 0, 0, 1 / 2, 1.0, 2 / 3),
    (1, 0, 1, 0, 1.0, 1 / 2, 2 / 3),
    (2, 1, 1, 0, 2 / 3, 2 / 3, 2 / 3),
    (1, 1, 1, 1, 1 / 2, 1 / 2, 1 / 2),
    (3, 1, 0, 2, 3 / 4, 1.0, 6 / 7),
    (3, 0, 1, 0, 1.0, 3 / 4, 6 / 7),
    (2, 2, 2, 2, 1 / 2, 1 / 2, 1 / 2),
    (4, 1, 1, 4, 4 / 5, 4 / 5, 4 / 5),
    (1, 2, 3, 4, 1 / 3, 1 / 4, 2 / 7),
    (2, 3, 1, 1, 2 / 5, 2 / 3, 1 / 2),
    (0, 0, 0, 5, 0.0, 0.0, 0.0),
    (5, 0, 0, 0, 1.0, 1.0, 1.0),
    (1, 4, 0, 0, 1 / 5, 1.0, 1 / 3),
    (1, 0, 4, 0, 1.0, 1 / 5, 1 / 3),
    (2, 1, 0, 3, 2 / 3, 1.0, 4 / 5),
    (2, 0, 1, 3, 1.0, 2 / 3, 4 / 5),
    (3, 2, 1, 0, 3 / 5, 3 / 4, 2 / 3),
]


def test_09_metric_oracles(capsys):
    # Span extraction must agree with an independent maximal-run reference
    # on every BIO sequence of length <= 6 over 2 entity types; QA and
    # binary F1 must match hand-computed fixtures; degenerate F1 is 0.0,
    # never NaN; split means are exact.
    alphabet = ["O", "B-A", "I-A", "B-B", "I-B"]
    sequences = 0
    enumeration_ok = True
    for length in range(7):
        for tags in itertools.product(alphabet, repeat=length):
            sequences += 1
            if extract_spans(list(tags)) != reference_spans(list(tags)):
                enumeration_ok = False

    rng = random.Random(11)
    scorer_ok = True
    for _ in range(300):
        n = rng.randrange(1, 7)
        pred = [rng.choice(alphabet) for _ in range(n)]
        gold = [rng.choice(alphabet) for _ in range(n)]
        got = span_f1([(pred, gold)])
        want = reference_span_scores([(pred, gold)])
        scorer_ok = scorer_ok and (got.precision, got.recall, got.f1) == want
    batch = []
    for _ in range(50):
        n = rng.randrange(1, 7)
        batch.append(
            (
                [rng.choice(alphabet) for _ in range(n)],
                [rng.choice(alphabet) for _ in range(n)],
            )
        )
    pooled = span_f1(batch)
    scorer_ok = scorer_ok and (
        pooled.precision,
        pooled.recall,
        pooled.f1,
    ) == reference_span_scores(batch)

    squad_ok = 0
    for pred, golds, want_f1, want_em in SQUAD_FIXTURES:
        got = squad_f1_em([(pred, golds)])
        squad_ok += got.f1 == pytest.approx(want_f1) and got.exact_match == want_em

    binary_ok = 0
    for tp, fp, fn, tn, want_p, want_r, want_f1 in BINARY_FIXTURES:
        pairs = (
            [("y", "y")] * tp + [("y", "n")] * fp + [("n", "y")] * fn + [("n", "n")] * tn
        )
        got = binary_f1(pairs, positive="y")
        binary_ok += (
            got.precision == pytest.approx(want_p)
            and got.recall == pytest.approx(want_r)
            and got.f1 == pytest.approx(want_f1)
        )

    degenerate = [
        span_f1([(["O"], ["O"])]).f1,
        binary_f1([("n", "n")], positive="y").f1,
        squad_f1_em([("", ["x"])]).f1,
    ]
    no_nan = all(v == 0.0 and not math.isnan(v) for v in degenerate)

    means_exact = all(
        mean_over_splits([a, b, c])[0] == (a + b + c) / 3
        for a, b, c in [(0.1, 0.2, 0.3), (0.55, 0.6, 0.65), (1 / 3, 1 / 7, 1 / 9)]
    )

    passed = (
        enumeration_ok
        and sequences == 19531
        and scorer_ok
        and squad_ok == len(SQUAD_FIXTURES)
        and binary_ok == len(BINARY_FIXTURES)
        and no_nan
        and means_exact
    )
    report_line(
        capsys,
        9,
        "metric oracles",
        passed,
        f"{sequences} BIO sequences enumerated, squad fixtures "
        f"{squad_ok}/{len(SQUAD_FIXTURES)}, binary fixtures "
        f"{binary_ok}/{len(BINARY_FIXTURES)}, nan-free={no_nan}, "
        f"exact means={means_exact}",
    )
    assert enumeration_ok and sequences == 19531
    assert scorer_ok
    assert squad_ok == len(SQUAD_FIXTURES)
    assert binary_ok == len(BINARY_FIXTURES)
    assert no_nan
    assert means_exact


def test_10_determinism_across_worker_counts(capsys, tmp_path):
    # Identical config and inputs at workers=1 and workers=8 must produce
    # byte-identical corpora, signatures, evidence, and tokenizer files;
    # reports may differ only in wall-clock timings.
    def doc_words(i, length):
        return [f"ח{i}ב{j}" for j in range(length)]

    rng = random.Random(42)
    alpha_rows = []
    for i in range(25):
        alpha_rows.append(
            {"id": f"a{i:02d}", "text": " ".join(doc_words(i, rng.randrange(60, 120)))}
        )
    for i in range(5):  # exact duplicates of a00..a04
        alpha_rows.append({"id": f"x{i:02d}", "text": alpha_rows[i]["text"] + "  "})
    for i in range(5, 10):  # near duplicates of a05..a09
        shifted = alpha_rows[i]["text"].split()
        alpha_rows.append(
            {"id": f"y{i:02d}", "text": " ".join([f"ראש{i}"] + shifted[1:])}
        )
    beta_rows = []
    for i in range(20):
        beta_rows.append(
            {
                "id": f"b{i:02d}",
                "text": " ".join(doc_words(100 + i, rng.randrange(60, 120))),
            }
        )
    for i in range(10, 15):  # near duplicates of alpha's a10..a14
        shifted = alpha_rows[i]["text"].split()
        beta_rows.append(
            {"id": f"c{i:02d}", "text": " ".join([f"חוצה{i}"] + shifted[1:])}
        )
    write_corpus(tmp_path / "alpha.jsonl", alpha_rows)
    write_corpus(tmp_path / "beta.jsonl", beta_rows)

    def run_with(workers: int) -> Path:
        out = tmp_path / f"w{workers}"
        cfg = config_from_dict(
            {
                "sources": [
                    {"label": "alpha", "path": str(tmp_path / "alpha.jsonl")},
                    {"label": "beta", "path": str(tmp_path / "beta.jsonl")},
                ],
                "output_dir": str(out),
                "seed": 3,
                "workers": workers,
                "tokenizer": {"vocab_size": 300},
            }
        )
        run_pipeline(cfg)
        return out

    out_serial = run_with(1)
    out_parallel = run_with(8)

    byte_files = [
        "dedup_alpha.jsonl",
        "dedup_beta.jsonl",
        "merged_dedup.jsonl",
        "cleaned.jsonl",
        "signatures.bin",
        "evidence.jsonl",
        "vocab.txt",
        "merges.txt",
    ]
    identical = [
        name
        for name in byte_files
        if (out_serial / name).read_bytes() == (out_parallel / name).read_bytes()
    ]

    reports = []
    for out in (out_serial, out_parallel):
        data = json.loads((out / "report.json").read_text())
        del data["timings"]
        reports.append(data)
    configs = []
    for out in (out_serial, out_parallel):
        data = json.loads((out / "config.json").read_text())
        del data["workers"]
        del data["output_dir"]
        configs.append(data)

    survivors = len((out_serial / "cleaned.jsonl").read_text().splitlines())
    passed = (
        identical == byte_files and reports[0] == reports[1] and configs[0] == configs[1]
    )
    report_line(
        capsys,
        10,
        "worker-count determinism",
        passed,
        f"{len(identical)}/{len(byte_files)} artifacts byte-identical, "
        f"reports equal={reports[0] == reports[1]} (timings excluded), "
        f"{survivors} survivors from 60 inputs",
    )
    assert identical == byte_files
    assert reports[0] == reports[1]
    assert configs[0] == configs[1]
