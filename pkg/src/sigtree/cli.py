"""Command-line pipeline: index -> cluster -> assign -> evaluate, plus bench.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
invariant violation. All randomness flows from explicit --seed flags so
repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback

import numpy as np

from . import sigfile, treefile
from .clustering import read_clustering, write_clustering
from .errors import DataError, SigtreeError, UsageError
from .evaluation import (
    curve_summary,
    oracle_recall_curve,
    parse_qrels,
    parse_spam,
    spam_oracle_curve,
    spam_purity_curve,
    structure_matched_baseline,
    write_curve_csv,
)
from .signatures import SignatureSpec, project_and_quantize
from .streaming import (
    FileSource,
    RunStats,
    StreamingTree,
    assign_pass,
    collect_rows,
    measure_insertion_throughput,
    streaming_emtree,
)
from .text import load_stopwords, term_weights, tokenize
from .tree import Accumulator, TreeConfig, reservoir_indices, sample_size, seed_tree

logger = logging.getLogger("sigtree")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _usage(build):
    try:
        return build()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_index(args) -> int:
    spec = _usage(lambda: SignatureSpec(args.dim, args.sparsity, args.seed))
    stopwords = load_stopwords(args.stopwords) if args.stopwords else frozenset()
    skipped = 0
    with open(args.corpus, encoding="utf-8") as corpus, \
            sigfile.SignatureWriter(args.out, spec.dimension) as writer:
        for line_no, line in enumerate(corpus, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                logger.warning("line %d: no tab separator; document skipped", line_no)
                skipped += 1
                continue
            doc_id, text = line.split("\t", 1)
            if not doc_id:
                logger.warning("line %d: empty doc_id; document skipped", line_no)
                skipped += 1
                continue
            tokens = tokenize(text, stopwords, args.stem)
            sig = project_and_quantize(term_weights(tokens, doc_id), spec)
            writer.write(doc_id, sig.words)
    print(f"signatures {writer.count}")
    print(f"dimension {spec.dimension}")
    print(f"skipped {skipped}")
    return 0


def render_run_report(stats: RunStats, bytes_per_pass: int) -> str:
    lines = [
        f"iterations {stats.iterations_run}",
        f"converged {str(stats.converged).lower()}",
        f"workers {stats.worker_count}",
        f"bytes_per_pass {bytes_per_pass}",
    ]
    for i, dist in enumerate(stats.distortion_per_pass, 1):
        lines.append(f"distortion_pass_{i} {dist:.6f}")
    for i, phases in enumerate(stats.phase_seconds, 1):
        for phase in ("insert", "update", "prune"):
            lines.append(f"seconds_{phase}_pass_{i} {phases[phase]:.3f}")
    return "\n".join(lines) + "\n"


def cmd_cluster(args) -> int:
    config = _usage(lambda: TreeConfig(
        order=args.order,
        depth=args.depth,
        max_iterations=args.iters,
        rng_seed=args.seed,
        seed_sample_fraction=args.sample_fraction,
    ))
    if args.workers < 1:
        raise UsageError(f"workers must be >= 1, got {args.workers}")
    source = FileSource(args.sigs)
    tree, stats = streaming_emtree(config, source, workers=args.workers)
    treefile.write_tree(tree.root, args.out, tree.dim)
    report = render_run_report(stats, tree.bytes_per_pass)
    with open(args.out + ".report", "w", encoding="utf-8") as fh:
        fh.write(report)
    print(report, end="")
    return 0


def cmd_assign(args) -> int:
    root, dim, depth = treefile.read_tree(args.tree)
    if not 1 <= args.level <= depth:
        raise UsageError(f"level {args.level} out of range 1..{depth}")
    tree = StreamingTree(config=None, dim=dim, root=root)
    source = FileSource(args.sigs)
    with open(args.out, "w", encoding="utf-8") as sink:
        written = assign_pass(tree, source, sink, args.level)
    print(f"documents {written}")
    print(f"level {args.level}")
    return 0


def cmd_eval_recall(args) -> int:
    with open(args.clusters, encoding="utf-8") as fh:
        clustering = read_clustering(fh)
    with open(args.qrels, encoding="utf-8") as fh:
        qrels = parse_qrels(fh)
    stats: dict = {}
    curve = oracle_recall_curve(clustering, qrels, args.collection_size, stats_out=stats)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_curve_csv(curve, fh)
    summary = curve_summary(curve)
    print(f"label {curve.label}")
    print(f"auc {summary.auc:.6f}")
    frac = summary.total_recall_fraction
    print(f"total_recall_fraction {'none' if frac is None else f'{frac:.6f}'}")
    print(f"queries_used {stats['queries_used']}")
    print(f"queries_skipped {stats['queries_skipped']}")
    print(f"judged_missing {stats['judged_missing']}")
    return 0


def cmd_eval_spam(args) -> int:
    with open(args.clusters, encoding="utf-8") as fh:
        clustering = read_clustering(fh)
    with open(args.spam, encoding="utf-8") as fh:
        spam = parse_spam(fh)
    stats: dict = {}
    curve = spam_purity_curve(clustering, spam, stats_out=stats)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_curve_csv(curve, fh)
    if args.oracle_out:
        with open(args.oracle_out, "w", encoding="utf-8") as fh:
            write_curve_csv(spam_oracle_curve(spam), fh)
    summary = curve_summary(curve)
    print(f"label {curve.label}")
    print(f"auc {summary.auc:.6f}")
    print(f"mean_score {stats['mean_score']:.6f}")
    print(f"docs_scored {stats['docs_scored']}")
    print(f"docs_dropped {stats['docs_dropped']}")
    return 0


def cmd_baseline(args) -> int:
    with open(args.clusters, encoding="utf-8") as fh:
        clustering = read_clustering(fh)
    baseline = structure_matched_baseline(clustering, clustering.doc_ids(), args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        write_clustering(baseline, fh)
    print(f"clusters {len(baseline.clusters)}")
    print(f"documents {baseline.total_docs}")
    return 0


def _parse_worker_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"workers list {text!r} must be comma-separated integers") from None
    if not values or any(v < 1 for v in values):
        raise UsageError(f"workers list {text!r} must hold integers >= 1")
    return values


def cmd_bench(args) -> int:
    worker_list = _parse_worker_list(args.workers)
    config = _usage(lambda: TreeConfig(order=args.order, depth=args.depth, rng_seed=args.seed))
    source = FileSource(args.sigs)
    if source.count < config.order:
        raise DataError(f"insufficient data for order {config.order}: only {source.count} signatures")
    k = sample_size(source.count, config)
    s_sample, s_build = np.random.SeedSequence(config.rng_seed).spawn(2)
    sample = collect_rows(source, reservoir_indices(source.count, k, s_sample))
    root = seed_tree(config, sample, np.random.default_rng(s_build), Accumulator)
    tree = StreamingTree(config=config, dim=source.dim, root=root)
    rows = ["workers,docs_per_second"]
    for workers in worker_list:
        throughput = measure_insertion_throughput(tree, source, workers)
        rows.append(f"{workers},{throughput:.1f}")
    csv_text = "\n".join(rows) + "\n"
    print(csv_text, end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sigtree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="encode a `doc_id TAB text` corpus as packed signatures")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=4096)
    p.add_argument("--sparsity", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stem", action="store_true")
    p.add_argument("--stopwords", metavar="FILE", default=None)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("cluster", help="cluster a signature file into a key tree")
    p.add_argument("--sigs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-fraction", type=float, default=0.1)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("assign", help="write doc -> cluster path at a tree level")
    p.add_argument("--tree", required=True)
    p.add_argument("--sigs", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("eval-recall", help="oracle collection-selection recall curve")
    p.add_argument("--clusters", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--collection-size", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_recall)

    p = sub.add_parser("eval-spam", help="spam purity curve over clusters")
    p.add_argument("--clusters", required=True)
    p.add_argument("--spam", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--oracle-out", default=None,
                   help="also write the per-document upper-envelope curve")
    p.set_defaults(func=cmd_eval_spam)

    p = sub.add_parser("baseline", help="random clustering with the same size multiset")
    p.add_argument("--clusters", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("bench", help="insertion-phase throughput per worker count")
    p.add_argument("--sigs", required=True)
    p.add_argument("--workers", required=True, metavar="LIST",
                   help="comma-separated worker counts, e.g. 1,2,4,8")
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args) or 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except SigtreeError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 3
        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
