"""Operator command line.

Subcommands: index, query, ask, eval, sweep, tune-mu, serve.
Exit codes: 0 success, 2 usage, 3 I/O, 4 reader transport.
All subcommands accept --json for machine-parseable output.
"""

from __future__ import annotations

import argparse
import json
import sys

from odqa.corpus import (
    CorpusFormatError,
    Granularity,
    collection_stats,
    ingest_collection,
    segment_article,
)
from odqa.index import IndexFormatError, InvertedIndex, build_index
from odqa.reader import ReaderTransportError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_READER = 4


def _mu_arg(value: str) -> float:
    mu = float(value)
    if not 0.0 <= mu <= 1.0:
        raise argparse.ArgumentTypeError(f"mu must be in [0, 1], got {value}")
    return mu


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _granularity_arg(value: str) -> Granularity:
    try:
        return Granularity(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"granularity must be one of article/paragraph/sentence, got {value!r}"
        )


def _nonempty_str(value: str) -> str:
    if not value.strip():
        raise argparse.ArgumentTypeError("must be nonempty")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist an index")
    p.add_argument("--input", required=True, help="corpus JSONL file")
    p.add_argument("--granularity", type=_granularity_arg, required=True)
    p.add_argument("--out", required=True, help="index output directory")
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("query", help="BM25 retrieval only")
    p.add_argument("--index", required=True)
    p.add_argument("--question", type=_nonempty_str, required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("ask", help="one-shot end-to-end answer")
    p.add_argument("--index", required=True)
    p.add_argument("--question", type=_nonempty_str, required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--mu", type=_mu_arg, default=0.5)
    p.add_argument("--reader", choices=["lexical", "sidecar"], default="lexical")
    p.add_argument("--sidecar", help="sidecar host:port or 'cmd: ...'")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("eval", help="evaluate a SQuAD-format dataset")
    p.add_argument("--index", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--mu", type=_mu_arg, default=0.5)
    p.add_argument("--reader", choices=["lexical", "sidecar"], default="lexical")
    p.add_argument("--sidecar")
    p.add_argument("--sweep-to", type=_positive_int, help="also sweep k=1..K")
    p.add_argument("--csv", help="curve point CSV path (with --sweep-to)")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("sweep", help="k-sweep curves only")
    p.add_argument("--index", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--mu", type=_mu_arg, default=0.5)
    p.add_argument("--k-max", type=_positive_int, required=True)
    p.add_argument("--csv")
    p.add_argument("--reader", choices=["lexical", "sidecar"], default="lexical")
    p.add_argument("--sidecar")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("tune-mu", help="grid-search the interpolation weight")
    p.add_argument("--index", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--sample-n", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--reader", choices=["lexical", "sidecar"], default="lexical")
    p.add_argument("--sidecar")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="JSON or TOML config file")
    p.add_argument("--index")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--reader", choices=["lexical", "sidecar"], default="lexical")
    p.add_argument("--sidecar")
    p.add_argument("--ui-dir")
    p.add_argument("--request-log")

    return parser


def _load_index(path) -> InvertedIndex:
    return InvertedIndex.load(path)


def _make_reader(args, index):
    from odqa.service import make_reader

    return make_reader(args.reader, index, getattr(args, "sidecar", None))


def _emit(args, machine: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(machine, ensure_ascii=False))
    else:
        print(human)


def cmd_index(args) -> int:
    articles = list(ingest_collection(args.input))
    stats = collection_stats(articles)
    segments = []
    for article in articles:
        segments.extend(segment_article(article, args.granularity))
    index = build_index(iter(segments), k1=args.k1, b=args.b)
    index.save(args.out)
    meta = index.meta
    machine = {
        "stats": vars(stats),
        "meta": {
            "granularity": meta.granularity.value,
            "n_segments": meta.n_segments,
            "avgdl": meta.avgdl,
            "k1": meta.k1,
            "b": meta.b,
            "analyzer_version": meta.analyzer_version,
        },
        "out": args.out,
    }
    human = (
        f"indexed {stats.n_articles} articles "
        f"({stats.n_paragraphs} paragraphs, {stats.n_sentences} sentences)\n"
        f"granularity={meta.granularity.value} n_segments={meta.n_segments} "
        f"avgdl={meta.avgdl:.3f} k1={meta.k1} b={meta.b}\n"
        f"avg_paragraphs_per_article={stats.avg_paragraphs_per_article:.3f} "
        f"avg_sentences_per_paragraph={stats.avg_sentences_per_paragraph:.3f}\n"
        f"written to {args.out}"
    )
    _emit(args, machine, human)
    return EXIT_OK


def cmd_query(args) -> int:
    index = _load_index(args.index)
    result = index.retrieve(args.question, args.k)
    machine = {
        "status": result.status.value,
        "hits": [
            {
                "rank": h.rank,
                "score": h.score,
                "segment_id": h.segment.segment_id,
                "text": h.segment.text,
            }
            for h in result.hits
        ],
    }
    lines = [f"status: {result.status.value}"]
    for h in result.hits:
        lines.append(f"{h.rank:3d}  {h.score:10.4f}  {h.segment.segment_id}")
        lines.append(f"     {h.segment.text[:120]}")
    _emit(args, machine, "\n".join(lines))
    return EXIT_OK


def cmd_ask(args) -> int:
    from odqa.pipeline import PipelineConfig, answer
    from odqa.service import _find_answer_segment, _sentence_of_span

    index = _load_index(args.index)
    reader = _make_reader(args, index)
    cfg = PipelineConfig(granularity=index.granularity, k=args.k, mu=args.mu)
    result = answer(args.question, index, reader, cfg)
    top = result.top
    if top is None:
        _emit(
            args,
            {"answer": None, "status": result.status.value},
            f"no answer ({result.status.value})",
        )
        return EXIT_OK
    segment = _find_answer_segment(result, top)
    sentence, hl_start, hl_end = _sentence_of_span(segment, top)
    machine = {
        "answer": top.span.text,
        "sentence": sentence,
        "highlight": {"start": hl_start, "end": hl_end},
        "fused_score": top.fused_score,
        "segment_id": top.span.segment_id,
        "retrieve_ms": result.retrieve_ms,
        "read_ms": result.read_ms,
    }
    human = (
        f"answer: {top.span.text}\n"
        f"sentence: {sentence}\n"
        f"fused_score={top.fused_score:.4f} segment={top.span.segment_id}\n"
        f"retrieve {result.retrieve_ms:.1f} ms, read {result.read_ms:.1f} ms"
    )
    _emit(args, machine, human)
    return EXIT_OK


def cmd_eval(args) -> int:
    from odqa.evaluation import evaluate, load_squad, sweep_k, write_curve_csv
    from odqa.pipeline import PipelineConfig

    index = _load_index(args.index)
    reader = _make_reader(args, index)
    dataset = load_squad(args.dataset)
    cfg = PipelineConfig(granularity=index.granularity, k=args.k, mu=args.mu)
    report = evaluate(dataset, index, reader, cfg, workers=args.workers)
    machine = report.to_dict()
    human = (
        f"n={len(dataset)} k={report.k} mu={report.mu}\n"
        f"EM={report.em:.4f} F1={report.f1:.4f} "
        f"R={report.recall:.4f} top-k EM={report.top_k_em:.4f}\n"
        f"latency: retrieve {report.latency['retrieve_ms_avg']:.1f} ms, "
        f"read {report.latency['read_ms_avg']:.1f} ms (means per question)"
    )
    if args.sweep_to:
        points = sweep_k(
            dataset, index, reader, args.mu, args.sweep_to, workers=args.workers
        )
        machine["curve"] = [vars(p) for p in points]
        if args.csv:
            write_curve_csv(points, args.csv)
            human += f"\ncurve CSV written to {args.csv}"
    _emit(args, machine, human)
    return EXIT_OK


def cmd_sweep(args) -> int:
    from odqa.evaluation import gap_analysis, load_squad, sweep_k, write_curve_csv

    index = _load_index(args.index)
    reader = _make_reader(args, index)
    dataset = load_squad(args.dataset)
    points = sweep_k(dataset, index, reader, args.mu, args.k_max, workers=args.workers)
    gaps = gap_analysis(points)
    if args.csv:
        write_curve_csv(points, args.csv)
    machine = {"curve": [vars(p) for p in points], "gaps": gaps}
    lines = ["  k   recall  top_k_em  top_1_em"]
    for p in points:
        lines.append(f"{p.k:3d}  {p.recall:7.4f}  {p.top_k_em:8.4f}  {p.top_1_em:8.4f}")
    if args.csv:
        lines.append(f"curve CSV written to {args.csv}")
    _emit(args, machine, "\n".join(lines))
    return EXIT_OK


def cmd_tune_mu(args) -> int:
    from odqa.evaluation import load_squad
    from odqa.pipeline import sample_qa_pairs, tune_mu

    index = _load_index(args.index)
    reader = _make_reader(args, index)
    dataset = load_squad(args.dataset)
    pairs = [(ex.question, ex.gold_answers) for ex in dataset]
    sample = sample_qa_pairs(pairs, args.sample_n, seed=args.seed)
    mu = tune_mu(sample, index, reader, args.k)
    _emit(
        args,
        {"mu": mu, "sample_n": len(sample), "k": args.k},
        f"best mu = {mu} (sample of {len(sample)}, k={args.k})",
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    from odqa.service import ServiceConfig, run

    if args.config:
        config = ServiceConfig.from_file(args.config)
    else:
        if not args.index:
            raise argparse.ArgumentTypeError("serve requires --config or --index")
        config = ServiceConfig(
            index_dir=args.index,
            reader=args.reader,
            sidecar_target=args.sidecar,
            port=args.port,
            ui_dir=args.ui_dir,
            request_log=args.request_log,
        ).with_env_overrides()
    run(config)
    return EXIT_OK


_COMMANDS = {
    "index": cmd_index,
    "query": cmd_query,
    "ask": cmd_ask,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "tune-mu": cmd_tune_mu,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ReaderTransportError as e:
        print(f"reader transport error: {e}", file=sys.stderr)
        return EXIT_READER
    except (CorpusFormatError, IndexFormatError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except argparse.ArgumentTypeError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
