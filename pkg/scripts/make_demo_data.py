#!/usr/bin/env python3
"""Generate a small demo dataset under an output directory.

Produces two independent inputs for the command-line walkthrough:

  corpus.tsv        500 synthetic topic-mixture documents, one
                    `doc_id TAB text` line each, for the index command
  planted.bin       2000 packed 512-bit signatures drawn around 8
                    planted cluster centers
  qrels.txt         20 synthetic queries whose relevant documents
                    concentrate in 3 of the planted clusters
  spam.txt          per-document spam percentiles correlated with the
                    planted cluster identity

The planted trio exercises the evaluation commands: a clustering that
recovers the planted structure should beat its size-matched random
baseline on both curves.
"""

import argparse
from pathlib import Path

from sigtree import write_signatures
from sigtree.synth import (
    mixture_documents,
    planted_collection,
    qrels_for_labels,
    spam_for_labels,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    docs = mixture_documents(500, seed=args.seed)
    with open(out / "corpus.tsv", "w", encoding="utf-8") as fh:
        for doc_id, tokens in docs:
            fh.write(f"{doc_id}\t{' '.join(tokens)}\n")

    coll, labels = planted_collection(2000, dim=512, n_clusters=8, radius=40,
                                      seed=args.seed + 1)
    write_signatures(coll, out / "planted.bin")

    qrels = qrels_for_labels(coll.doc_ids, labels, n_queries=20, rel_per_query=25,
                             seed=args.seed + 2)
    with open(out / "qrels.txt", "w", encoding="utf-8") as fh:
        for (qid, doc), grade in sorted(qrels.judgments.items()):
            fh.write(f"{qid} 0 {doc} {grade}\n")

    spam = spam_for_labels(coll.doc_ids, labels, seed=args.seed + 3)
    with open(out / "spam.txt", "w", encoding="utf-8") as fh:
        for doc, score in sorted(spam.scores.items()):
            fh.write(f"{score} {doc}\n")

    print(f"wrote corpus.tsv ({len(docs)} docs), planted.bin ({len(coll)} signatures), "
          f"qrels.txt ({len(qrels.judgments)} judgments), spam.txt ({len(spam.scores)} scores) "
          f"under {out}")


if __name__ == "__main__":
    main()
