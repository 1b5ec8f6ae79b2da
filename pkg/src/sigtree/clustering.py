"""Clustering exchange format: cluster-id -> set of document ids.

The text file form is one line per document, `doc_id TAB cluster_path`,
the handoff between the clustering commands and evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError, ParseError


@dataclass
class Clustering:
    clusters: dict[str, set[str]]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for cid, docs in self.clusters.items():
            if not docs:
                raise DataError(f"cluster {cid!r} is empty")
            for doc in docs:
                if doc in seen:
                    raise DataError(f"document {doc!r} appears in clusters {seen[doc]!r} and {cid!r}")
                seen[doc] = cid

    @property
    def total_docs(self) -> int:
        return sum(len(d) for d in self.clusters.values())

    def doc_ids(self) -> set[str]:
        out: set[str] = set()
        for docs in self.clusters.values():
            out |= docs
        return out

    def doc_to_cluster(self) -> dict[str, str]:
        return {doc: cid for cid, docs in self.clusters.items() for doc in docs}

    def size_multiset(self) -> list[int]:
        return sorted(len(d) for d in self.clusters.values())


def read_clustering(lines) -> Clustering:
    """Parse `doc_id TAB cluster_path` lines.

    Repeated identical lines are tolerated; a document mapped to two
    different clusters is an error.
    """
    assignments: dict[str, str] = {}
    for line_no, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line:
            continue
        if "\t" not in line:
            raise ParseError("expected `doc_id TAB cluster_path`", line_no)
        doc_id, cid = line.split("\t", 1)
        if not doc_id or not cid:
            raise ParseError("empty doc_id or cluster id", line_no)
        prior = assignments.get(doc_id)
        if prior is not None and prior != cid:
            raise DataError(f"line {line_no}: document {doc_id!r} assigned to both {prior!r} and {cid!r}")
        assignments[doc_id] = cid
    if not assignments:
        raise DataError("clustering file holds no assignments")
    clusters: dict[str, set[str]] = {}
    for doc_id, cid in assignments.items():
        clusters.setdefault(cid, set()).add(doc_id)
    return Clustering(clusters)


def write_clustering(c: Clustering, sink) -> None:
    """Write assignments sorted by (cluster, doc) so output is deterministic."""
    for cid in sorted(c.clusters):
        for doc_id in sorted(c.clusters[cid]):
            sink.write(f"{doc_id}\t{cid}\n")
