"""Command-line interface.

Subcommands map one-to-one onto the library's top operations:

    stats      per-source document/word/byte accounting
    dedup      exact + approximate dedup, within and across sources
    clean      quality filtering
    train-bpe  byte-level BPE training
    tokenize   encode documents with a trained vocabulary
    longshare  fraction of documents longer than a token limit
    eval       token-based metrics (sa | ner | qa | cls)
    pipeline   the full ingest -> dedup -> clean -> train run

Inputs are JSONL files given as repeatable --input flags, either
"label=path" or a bare path (the file stem becomes the label). --seed and
--workers fall back to the CORPUSKIT_SEED and CORPUSKIT_WORKERS environment
variables before their defaults. Exit codes: 0 success, 2 usage error,
3 input error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bpe, metrics
from .cleaning import FilterConfig, clean_corpus
from .corpus import (
    CorpusError,
    Document,
    IngestError,
    format_stats_table,
    load_jsonl,
    stage_stats,
    write_jsonl,
)
from .dedup import DedupReport, dedup_across, dedup_corpus
from .minhash import MinHashParams
from .pipeline import StageError, config_from_dict, run_pipeline

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_STAGE = 4

SEED_ENV = "CORPUSKIT_SEED"
WORKERS_ENV = "CORPUSKIT_WORKERS"


class UsageError(Exception):
    pass


def _parse_inputs(values: list[str] | None) -> list[tuple[str, str]]:
    if not values:
        raise UsageError("at least one --input is required")
    pairs: list[tuple[str, str]] = []
    for value in values:
        label, sep, path = value.partition("=")
        if not sep:
            label, path = Path(value).stem, value
        if not label or not path:
            raise UsageError(f"bad --input {value!r}, expected label=path")
        pairs.append((label, path))
    labels = [label for label, _ in pairs]
    if len(set(labels)) != len(labels):
        raise UsageError(f"input labels must be distinct, got {labels}")
    return pairs


def _load_corpora(pairs: list[tuple[str, str]]) -> list[tuple[str, list[Document]]]:
    corpora = []
    for label, path in pairs:
        errors: list[IngestError] = []
        docs = list(load_jsonl(path, label, errors=errors))
        if errors:
            print(
                f"warning: skipped {len(errors)} malformed line(s) in {path}",
                file=sys.stderr,
            )
        corpora.append((label, docs))
    return corpora


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _resolve_seed(args, default: int | None = 0) -> int | None:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = _env_int(SEED_ENV)
    return env if env is not None else default


def _resolve_workers(args, default: int | None = 1) -> int | None:
    if getattr(args, "workers", None) is not None:
        return args.workers
    env = _env_int(WORKERS_ENV)
    return env if env is not None else default


def _load_json_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def _write_report(path: str | None, data: dict) -> None:
    if path is None:
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def _pct(value: float) -> str:
    return f"{value * 100:.2f}"


# --- subcommands -------------------------------------------------------------


def cmd_stats(args) -> int:
    corpora = _load_corpora(_parse_inputs(args.input))
    rows = [stage_stats(docs, label) for label, docs in corpora]
    if len(corpora) > 1:
        total = [doc for _, docs in corpora for doc in docs]
        rows.append(stage_stats(total, "total"))
    print(format_stats_table(rows))
    _write_report(args.report, {"stages": [r.to_dict() for r in rows]})
    return EXIT_OK


def _removal_records(stage: str, report: DedupReport) -> list[dict]:
    return [
        {
            "stage": stage,
            "kept": r.kept,
            "removed": r.removed,
            "jaccard": r.jaccard,
            "kind": r.kind,
        }
        for r in report.removals
    ]


def cmd_dedup(args) -> int:
    corpora = _load_corpora(_parse_inputs(args.input))
    opts = _load_json_config(args.config)
    if "seed" in opts:
        raise UsageError("set the seed with --seed, not in the dedup config")
    params = MinHashParams.from_dict({**opts, "seed": _resolve_seed(args)})
    workers = _resolve_workers(args)

    rows = [stage_stats(docs, f"raw:{label}") for label, docs in corpora]
    within: dict[str, DedupReport] = {}
    evidence: list[dict] = []
    deduped: list[tuple[str, list[Document]]] = []
    for label, docs in corpora:
        survivors, report = dedup_corpus(docs, params, workers=workers)
        within[label] = report
        evidence.extend(_removal_records(f"dedup:{label}", report))
        deduped.append((label, survivors))
        rows.append(stage_stats(survivors, f"dedup:{label}"))

    cross: DedupReport | None = None
    if len(deduped) > 1:
        merged, cross = dedup_across(deduped, params, workers=workers)
        evidence.extend(_removal_records("merged-dedup", cross))
        rows.append(stage_stats(merged, "merged-dedup"))
    else:
        merged = deduped[0][1]

    print(format_stats_table(rows))
    removed = sum(r.removed_count for r in within.values())
    if cross is not None:
        removed += cross.removed_count
    print(f"removed {removed} duplicate document(s)")

    if args.output:
        write_jsonl(args.output, merged)
    if args.evidence:
        with open(args.evidence, "w", encoding="utf-8") as fh:
            for record in evidence:
                fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    _write_report(
        args.report,
        {
            "params": params.to_dict(),
            "within": {label: rep.to_dict() for label, rep in within.items()},
            "cross": cross.to_dict() if cross else None,
        },
    )
    return EXIT_OK


def cmd_clean(args) -> int:
    corpora = _load_corpora(_parse_inputs(args.input))
    docs = [doc for _, corpus in corpora for doc in corpus]
    cfg = FilterConfig.from_dict(_load_json_config(args.config))
    survivors, report = clean_corpus(docs, cfg)
    print(format_stats_table([report.stage_before, report.stage_after]))
    if report.reject_counts:
        print(f"rejected {report.rejected_count} document(s):")
        for reason, count in sorted(report.reject_counts.items()):
            print(f"  {reason.value}  {count}")
    if args.output:
        write_jsonl(args.output, survivors)
    _write_report(args.report, report.to_dict())
    return EXIT_OK


def cmd_train_bpe(args) -> int:
    corpora = _load_corpora(_parse_inputs(args.input))
    docs = [doc for _, corpus in corpora for doc in corpus]
    specials = tuple(args.special) if args.special else bpe.DEFAULT_SPECIALS
    vocab = bpe.train_bpe(docs, args.vocab_size, specials=specials)
    out_dir = Path(args.output or ".")
    vocab_path = out_dir / "vocab.txt"
    merges_path = out_dir / "merges.txt"
    bpe.save_vocab(vocab, vocab_path, merges_path)
    print(
        f"trained vocabulary of {vocab.vocab_size} tokens "
        f"({len(vocab.merges)} merges, {vocab.num_specials} specials)"
    )
    print(f"wrote {vocab_path} and {merges_path}")
    _write_report(
        args.report,
        {
            "vocab_size": vocab.vocab_size,
            "requested_vocab_size": args.vocab_size,
            "merge_count": len(vocab.merges),
            "specials": list(vocab.specials),
            "vocab_file": str(vocab_path),
            "merges_file": str(merges_path),
        },
    )
    return EXIT_OK


def cmd_tokenize(args) -> int:
    vocab = bpe.load_vocab(args.vocab, args.merges)
    if args.text is not None:
        seq = bpe.encode(args.text, vocab)
        print(" ".join(str(i) for i in seq.ids))
        return EXIT_OK
    corpora = _load_corpora(_parse_inputs(args.input))
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        cache: dict[bytes, tuple[int, ...]] = {}
        for _, docs in corpora:
            for doc in docs:
                seq = bpe.encode(doc.text, vocab, doc_id=doc.id, _cache=cache)
                record = {"id": seq.doc_id, "ids": list(seq.ids), "length": seq.length}
                out.write(json.dumps(record, ensure_ascii=False) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_longshare(args) -> int:
    vocab = bpe.load_vocab(args.vocab, args.merges)
    corpora = _load_corpora(_parse_inputs(args.input))
    docs = [doc for _, corpus in corpora for doc in corpus]
    fraction, (long_count, total) = bpe.long_doc_share(docs, vocab, limit=args.limit)
    print(
        f"{long_count} of {total} document(s) exceed {args.limit} tokens "
        f"(share {fraction:.3f})"
    )
    _write_report(
        args.report,
        {
            "limit": args.limit,
            "fraction": fraction,
            "long_count": long_count,
            "total_count": total,
        },
    )
    return EXIT_OK


_EVAL_PRIMARY = {"sa": "accuracy", "ner": "f1", "qa": "f1", "cls": "f1"}


def _eval_one(task: str, path: str, positive: str) -> metrics.MetricReport:
    if task == "sa":
        return metrics.accuracy(metrics.read_label_pairs(path))
    if task == "ner":
        return metrics.span_f1(metrics.read_tag_pairs(path))
    if task == "qa":
        return metrics.squad_f1_em(metrics.read_qa_examples(path))
    if task == "cls":
        return metrics.binary_f1(metrics.read_label_pairs(path), positive)
    raise UsageError(f"unknown task {task!r}")


def cmd_eval(args) -> int:
    pairs = _parse_inputs(args.input)
    primary = _EVAL_PRIMARY[args.task]
    split_reports: dict[str, metrics.MetricReport] = {}
    for label, path in pairs:
        report = _eval_one(args.task, path, args.positive)
        split_reports[label] = report
        fields = [f"{label}", f"n={report.n_examples}"]
        for key in ("accuracy", "precision", "recall", "f1", "exact_match"):
            value = getattr(report, key)
            if value is not None:
                fields.append(f"{key}={_pct(value)}")
        print("  ".join(fields))

    payload: dict = {
        "task": args.task,
        "splits": {label: rep.to_dict() for label, rep in split_reports.items()},
    }
    if len(split_reports) > 1:
        mean, values = metrics.mean_over_splits(
            [getattr(rep, primary) for rep in split_reports.values()]
        )
        print(f"mean  {primary}={_pct(mean)}  over {len(values)} split(s)")
        payload["mean"] = {
            "metric": primary,
            "value": mean,
            "per_split": list(values),
        }
    _write_report(args.report, payload)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError(f"config {args.config} must hold a JSON object")
    seed = _resolve_seed(args, default=None)
    if seed is not None:
        data["seed"] = seed
    workers = _resolve_workers(args, default=None)
    if workers is not None:
        data["workers"] = workers
    if args.output:
        data["output_dir"] = args.output
    cfg = config_from_dict(data)

    try:
        report = run_pipeline(cfg)
    except StageError as exc:
        print(format_stats_table(exc.partial.stages), file=sys.stderr)
        _write_report(args.report, exc.partial.to_dict())
        raise

    print(format_stats_table(report.stages))
    if report.cross_dedup is not None:
        print(f"cross-source removals: {report.cross_dedup.removed_count}")
    if report.cleaning is not None:
        print(f"cleaning rejected: {report.cleaning.rejected_count}")
    if report.tokenizer_summary is not None:
        print(
            f"tokenizer: {report.tokenizer_summary['vocab_size']} tokens, "
            f"{report.tokenizer_summary['merge_count']} merges"
        )
    if report.long_docs is not None:
        print(
            f"long documents (> {report.long_docs['limit']} tokens): "
            f"{report.long_docs['long_count']} of {report.long_docs['total_count']} "
            f"(share {report.long_docs['fraction']:.3f})"
        )
    print(f"artifacts written to {cfg.manifest.output_dir}")
    _write_report(args.report, report.to_dict())
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _add_input_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--input",
        action="append",
        metavar="LABEL=PATH",
        help="input JSONL file; repeatable; bare PATH uses the file stem as label",
    )


def _add_common(parser: argparse.ArgumentParser, *, seed=False, workers=False) -> None:
    parser.add_argument("--report", metavar="PATH", help="write a JSON report here")
    if seed:
        parser.add_argument(
            "--seed", type=int, help=f"run seed (default ${SEED_ENV} or 0)"
        )
    if workers:
        parser.add_argument(
            "--workers", type=int, help=f"worker count (default ${WORKERS_ENV} or 1)"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corpuskit",
        description="Corpus dedup, cleaning, tokenization, and evaluation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="count documents, words, and bytes")
    _add_input_flag(p)
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dedup", help="remove exact and near duplicates")
    _add_input_flag(p)
    p.add_argument("--config", metavar="PATH", help="JSON MinHash/LSH parameters")
    p.add_argument("--output", metavar="PATH", help="write surviving corpus here")
    p.add_argument("--evidence", metavar="PATH", help="write removal records here")
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("clean", help="apply quality filters")
    _add_input_flag(p)
    p.add_argument("--config", metavar="PATH", help="JSON filter thresholds")
    p.add_argument("--output", metavar="PATH", help="write surviving corpus here")
    _add_common(p)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("train-bpe", help="train a byte-level BPE vocabulary")
    _add_input_flag(p)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument(
        "--special",
        action="append",
        metavar="TOKEN",
        help="special token; repeatable; default <pad> <unk> <s> </s> <mask>",
    )
    p.add_argument(
        "--output", metavar="DIR", help="directory for vocab.txt and merges.txt"
    )
    _add_common(p)
    p.set_defaults(func=cmd_train_bpe)

    p = sub.add_parser("tokenize", help="encode documents with a trained vocabulary")
    _add_input_flag(p)
    p.add_argument("--vocab", required=True, metavar="PATH")
    p.add_argument("--merges", required=True, metavar="PATH")
    p.add_argument("--text", help="encode this string instead of --input files")
    p.add_argument("--output", metavar="PATH", help="write token JSONL here")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("longshare", help="share of documents over a token limit")
    _add_input_flag(p)
    p.add_argument("--vocab", required=True, metavar="PATH")
    p.add_argument("--merges", required=True, metavar="PATH")
    p.add_argument("--limit", type=int, default=512)
    _add_common(p)
    p.set_defaults(func=cmd_longshare)

    p = sub.add_parser("eval", help="score predictions against gold answers")
    _add_input_flag(p)
    p.add_argument("--task", required=True, choices=sorted(_EVAL_PRIMARY))
    p.add_argument(
        "--positive", default="1", help="positive class label for --task cls"
    )
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--output", metavar="DIR", help="override the config output_dir")
    _add_common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (CorpusError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
