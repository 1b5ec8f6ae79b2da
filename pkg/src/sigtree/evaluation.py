"""External cluster-validity evaluation.

Two protocols, both emitting (cumulative document fraction, score)
curves: oracle collection selection walks each query's clusters in
best-possible order and reports recall, and spam purity walks clusters
by descending mean spam score. Random baselines share the evaluated
clustering's exact size multiset so structure never explains the gap.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .clustering import Clustering
from .errors import CoverageError, DataError, ParseError

logger = logging.getLogger(__name__)


@dataclass
class Qrels:
    """(query-id, doc-id) -> integer relevance grade; grade > 0 means relevant."""

    judgments: dict[tuple[str, str], int]

    def __post_init__(self):
        for (qid, doc), grade in self.judgments.items():
            if grade < 0:
                raise DataError(f"negative relevance grade for ({qid}, {doc})")

    def query_ids(self) -> list[str]:
        return sorted({qid for qid, _ in self.judgments})

    def judged_docs(self) -> set[str]:
        return {doc for _, doc in self.judgments}

    def relevant_docs(self, qid: str) -> set[str]:
        return {doc for (q, doc), grade in self.judgments.items() if q == qid and grade > 0}


@dataclass
class SpamScores:
    """doc-id -> percentile spam score in [0, 99]; 99 is the least spammy."""

    scores: dict[str, int]

    def __post_init__(self):
        for doc, score in self.scores.items():
            if not 0 <= score <= 99:
                raise DataError(f"spam score {score} for {doc!r} outside [0, 99]")


@dataclass
class Curve:
    """Points of (cumulative document fraction, score), x strictly increasing."""

    points: list[tuple[float, float]]
    label: str

    def __post_init__(self):
        if not self.points:
            raise DataError("curve has no points")
        if "," in self.label or "\n" in self.label or not self.label:
            raise DataError(f"curve label {self.label!r} must be nonempty without commas or newlines")
        prev = -1.0
        for x, y in self.points:
            if not (np.isfinite(x) and np.isfinite(y)):
                raise DataError("curve contains a non-finite value")
            if not -1e-9 <= x <= 1 + 1e-9:
                raise DataError(f"curve x {x} outside [0, 1]")
            if x <= prev:
                raise DataError("curve x values must be strictly increasing")
            prev = x


@dataclass
class CurveSummary:
    auc: float
    total_recall_fraction: float | None


def parse_qrels(lines: Iterable[str]) -> Qrels:
    """Parse `query-id 0 doc-id grade` lines (whitespace-separated).

    Repeated identical judgments are tolerated; conflicting grades for
    the same (query, doc) are an error.
    """
    judgments: dict[tuple[str, str], int] = {}
    for line_no, line in enumerate(lines, 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields `query-id 0 doc-id grade`, got {len(fields)}", line_no)
        qid, _, doc, grade_s = fields
        try:
            grade = int(grade_s)
        except ValueError:
            raise ParseError(f"relevance grade {grade_s!r} is not an integer", line_no) from None
        if grade < 0:
            raise ParseError(f"negative relevance grade {grade}", line_no)
        key = (qid, doc)
        if key in judgments and judgments[key] != grade:
            raise ParseError(f"conflicting grades for query {qid} doc {doc}", line_no)
        judgments[key] = grade
    if not judgments:
        raise DataError("qrels input holds no judgments")
    return Qrels(judgments)


def parse_spam(lines: Iterable[str]) -> SpamScores:
    """Parse `score doc-id` lines; scores must lie in [0, 99]."""
    scores: dict[str, int] = {}
    for line_no, line in enumerate(lines, 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 2 fields `score doc-id`, got {len(fields)}", line_no)
        score_s, doc = fields
        try:
            score = int(score_s)
        except ValueError:
            raise ParseError(f"spam score {score_s!r} is not an integer", line_no) from None
        if not 0 <= score <= 99:
            raise ParseError(f"spam score {score} outside [0, 99]", line_no)
        if doc in scores and scores[doc] != score:
            raise ParseError(f"conflicting spam scores for doc {doc}", line_no)
        scores[doc] = score
    if not scores:
        raise DataError("spam input holds no scores")
    return SpamScores(scores)


def oracle_recall_curve(c: Clustering, q: Qrels, collection_size: int,
                        label: str = "oracle_recall",
                        stats_out: dict | None = None) -> Curve:
    """Best-possible collection-selection recall curve, averaged over queries.

    Per query, clusters are ranked by descending relevant-document
    count (ties: smaller cluster first, then id); walking that ranking
    gives (docs visited / collection_size, recall) prefixes. Queries are
    averaged rank by rank, padding exhausted queries at full recall and
    their final x. Queries with no relevant clustered documents are
    skipped with a warning; more than 1% of judged documents missing
    from the clustering is an error.
    """
    if collection_size <= 0:
        raise DataError(f"collection size must be positive, got {collection_size}")
    if collection_size < c.total_docs:
        raise DataError(
            f"collection size {collection_size} is smaller than the {c.total_docs} clustered documents"
        )
    doc2c = c.doc_to_cluster()
    judged = q.judged_docs()
    missing = sum(1 for doc in judged if doc not in doc2c)
    if missing > 0.01 * len(judged):
        raise CoverageError(f"{missing} of {len(judged)} judged documents are not in the clustering")
    sizes = {cid: len(docs) for cid, docs in c.clusters.items()}
    per_query: list[tuple[list[float], list[float]]] = []
    skipped = 0
    for qid in q.query_ids():
        rel = [doc for doc in q.relevant_docs(qid) if doc in doc2c]
        if not rel:
            logger.warning("query %s has no relevant documents in the clustering; skipped", qid)
            skipped += 1
            continue
        counts = Counter(doc2c[doc] for doc in rel)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], sizes[kv[0]], kv[0]))
        xs: list[float] = []
        ys: list[float] = []
        cum_docs = 0
        cum_rel = 0
        for cid, rel_count in ranked:
            cum_docs += sizes[cid]
            cum_rel += rel_count
            xs.append(cum_docs / collection_size)
            ys.append(cum_rel / len(rel))
        per_query.append((xs, ys))
    if not per_query:
        raise DataError("no usable queries: none has relevant documents in the clustering")
    n_queries = len(per_query)
    max_rank = max(len(xs) for xs, _ in per_query)
    points: list[tuple[float, float]] = [(0.0, 0.0)]
    for k in range(max_rank):
        x = sum(xs[k] if k < len(xs) else xs[-1] for xs, _ in per_query) / n_queries
        y = sum(ys[k] if k < len(ys) else 1.0 for _, ys in per_query) / n_queries
        points.append((x, y))
    if stats_out is not None:
        stats_out.update(
            queries_used=n_queries,
            queries_skipped=skipped,
            judged_total=len(judged),
            judged_missing=missing,
        )
    return Curve(points, label)


def structure_matched_baseline(c: Clustering, universe: set[str], seed: int) -> Clustering:
    """Random clustering with exactly c's cluster ids and sizes.

    Documents are permuted by the seeded generator over the sorted
    universe, so the baseline is reproducible.
    """
    docs = sorted(universe)
    if len(docs) != c.total_docs:
        raise DataError(f"universe holds {len(docs)} documents, clustering holds {c.total_docs}")
    perm = np.random.default_rng(seed).permutation(len(docs))
    shuffled = [docs[i] for i in perm]
    out: dict[str, set[str]] = {}
    pos = 0
    for cid in sorted(c.clusters):
        size = len(c.clusters[cid])
        out[cid] = set(shuffled[pos : pos + size])
        pos += size
    return Clustering(out)


def spam_purity_curve(c: Clustering, s: SpamScores,
                      label: str = "spam_purity",
                      stats_out: dict | None = None) -> Curve:
    """Clusters by descending mean spam score (ties: larger cluster, then id).

    Documents without a score are dropped with a logged count; x is the
    cumulative fraction of scored documents, y the cluster mean, so the
    y-sequence is non-increasing by construction.
    """
    per_cluster: list[tuple[str, int, float]] = []
    dropped = 0
    for cid, docs in c.clusters.items():
        vals = [s.scores[doc] for doc in docs if doc in s.scores]
        dropped += len(docs) - len(vals)
        if vals:
            per_cluster.append((cid, len(vals), sum(vals) / len(vals)))
    if not per_cluster:
        raise DataError("no clustered documents have spam scores")
    if dropped:
        logger.warning("%d clustered documents lack spam scores and were dropped", dropped)
    ranked = sorted(per_cluster, key=lambda t: (-t[2], -t[1], t[0]))
    total = sum(n for _, n, _ in ranked)
    points: list[tuple[float, float]] = []
    cum = 0
    for _, n, mean in ranked:
        cum += n
        points.append((cum / total, mean))
    if stats_out is not None:
        scored = sum(n for _, n, _ in ranked)
        overall = sum(n * mean for _, n, mean in ranked) / scored
        stats_out.update(docs_scored=scored, docs_dropped=dropped,
                         clusters_scored=len(ranked), mean_score=overall)
    return Curve(points, label)


def spam_oracle_curve(s: SpamScores, label: str = "spam_oracle") -> Curve:
    """Per-document upper envelope: documents in descending score order."""
    if not s.scores:
        raise DataError("no spam scores")
    counts = Counter(s.scores.values())
    total = sum(counts.values())
    points: list[tuple[float, float]] = []
    cum = 0
    for score in sorted(counts, reverse=True):
        cum += counts[score]
        points.append((cum / total, float(score)))
    return Curve(points, label)


def curve_summary(curve: Curve, target: float = 1.0) -> CurveSummary:
    """Trapezoidal AUC over x in [0, 1] plus the first x reaching the target y.

    The curve is extended flat to x=0 and x=1 when it does not span
    them, so AUCs of partial traversals are comparable.
    """
    xs = [p[0] for p in curve.points]
    ys = [p[1] for p in curve.points]
    if xs[0] > 0.0:
        xs = [0.0] + xs
        ys = [ys[0]] + ys
    if xs[-1] < 1.0:
        xs = xs + [1.0]
        ys = ys + [ys[-1]]
    auc = float(np.trapezoid(ys, xs))
    frac = next((x for x, y in curve.points if y >= target - 1e-12), None)
    return CurveSummary(auc=auc, total_recall_fraction=frac)


def write_curve_csv(curve: Curve, sink) -> None:
    """CSV with header `x,<label>`; floats use shortest round-trip form."""
    sink.write(f"x,{curve.label}\n")
    for x, y in curve.points:
        sink.write(f"{x!r},{y!r}\n")


def read_curve_csv(lines: Iterable[str]) -> Curve:
    it = iter(lines)
    try:
        header = next(it).rstrip("\n")
    except StopIteration:
        raise DataError("curve CSV is empty") from None
    if not header.startswith("x,"):
        raise ParseError("curve CSV header must be `x,<label>`", 1)
    label = header[2:]
    points: list[tuple[float, float]] = []
    for line_no, line in enumerate(it, 2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 comma-separated values, got {len(parts)}", line_no)
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ParseError(f"non-numeric curve values {line!r}", line_no) from None
    return Curve(points, label)
