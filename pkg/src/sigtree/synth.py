"""Synthetic data generators for tests, benchmarks, and demos.

Everything is seeded and deterministic: random signature collections,
planted Hamming-ball clusters with ground-truth labels, topic-skewed
token documents, and qrels/spam scores correlated with the planted
structure.
"""

from __future__ import annotations

import numpy as np

from .evaluation import Qrels, SpamScores
from .signatures import SignatureCollection, SignatureSpec

_U64_HIGH = np.iinfo(np.uint64).max


def _random_words(rng: np.random.Generator, n: int, words: int) -> np.ndarray:
    return rng.integers(0, _U64_HIGH, size=(n, words), dtype=np.uint64, endpoint=True)


def _doc_ids(n: int, prefix: str) -> list[str]:
    width = max(6, len(str(n - 1)) if n else 1)
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def random_collection(n: int, dim: int, seed: int, prefix: str = "doc") -> SignatureCollection:
    """n uniform random signatures of the given dimension."""
    spec = SignatureSpec(dimension=dim)
    rng = np.random.default_rng(seed)
    return SignatureCollection(spec, _doc_ids(n, prefix), _random_words(rng, n, dim // 64))


def planted_collection(n: int, dim: int, n_clusters: int, radius: int, seed: int,
                       prefix: str = "doc") -> tuple[SignatureCollection, np.ndarray]:
    """Points scattered in Hamming balls around random centers.

    Each point copies its cluster's center and flips a uniform number
    of distinct bits in [0, radius]. Returns (collection, labels).
    """
    if not 0 <= radius <= dim:
        raise ValueError(f"radius {radius} out of range for dimension {dim}")
    rng = np.random.default_rng(seed)
    centers = _random_words(rng, n_clusters, dim // 64)
    labels = rng.integers(0, n_clusters, size=n)
    flips = rng.integers(0, radius + 1, size=n)
    words = centers[labels].copy()
    for i in range(n):
        if flips[i] == 0:
            continue
        pos = rng.choice(dim, size=flips[i], replace=False)
        word_idx = pos // 64
        masks = np.uint64(1) << (pos % 64).astype(np.uint64)
        np.bitwise_xor.at(words[i], word_idx, masks)
    spec = SignatureSpec(dimension=dim)
    return SignatureCollection(spec, _doc_ids(n, prefix), words), labels


def topic_documents(n_docs: int, vocab_size: int, n_topics: int, seed: int,
                    length_range: tuple[int, int] = (60, 160),
                    topic_fraction: float = 0.8,
                    prefix: str = "doc") -> tuple[list[tuple[str, list[str]]], np.ndarray]:
    """Token documents with topical vocabulary skew.

    Each document belongs to one topic and draws topic_fraction of its
    tokens from that topic's vocabulary slice, the rest from the full
    vocabulary. Returns ((doc_id, tokens) pairs, topic labels).
    """
    rng = np.random.default_rng(seed)
    vocab = [f"t{i:05d}" for i in range(vocab_size)]
    slice_size = max(1, vocab_size // n_topics)
    labels = rng.integers(0, n_topics, size=n_docs)
    ids = _doc_ids(n_docs, prefix)
    docs: list[tuple[str, list[str]]] = []
    for i in range(n_docs):
        length = int(rng.integers(length_range[0], length_range[1] + 1))
        start = (int(labels[i]) * slice_size) % vocab_size
        topic_idx = rng.integers(start, min(start + slice_size, vocab_size), size=length)
        background_idx = rng.integers(0, vocab_size, size=length)
        from_topic = rng.random(length) < topic_fraction
        tokens = [vocab[topic_idx[j]] if from_topic[j] else vocab[background_idx[j]] for j in range(length)]
        docs.append((ids[i], tokens))
    return docs, labels


def mixture_documents(n_docs: int, seed: int, vocab_size: int = 4000,
                      n_topics: int = 12, doc_len: int = 1000,
                      background_fraction: float = 0.2,
                      concentration: float = 0.25,
                      prefix: str = "doc") -> list[tuple[str, list[str]]]:
    """Token documents with a smooth pairwise-similarity spectrum.

    Every document mixes a shared Zipf-weighted background vocabulary
    with a per-document Dirichlet blend of topic sub-vocabularies, so
    pairwise cosine distances vary continuously instead of clumping at
    "same topic" and "different topic". Useful when a test needs rank
    structure in the distance matrix.
    """
    rng = np.random.default_rng(seed)
    vocab = np.array([f"t{i:05d}" for i in range(vocab_size)])
    background_p = 1.0 / np.arange(1, vocab_size + 1, dtype=np.float64)
    background_p /= background_p.sum()
    slice_size = vocab_size // n_topics
    local_p = 1.0 / np.arange(1, slice_size + 1, dtype=np.float64)
    local_p /= local_p.sum()
    ids = _doc_ids(n_docs, prefix)
    docs: list[tuple[str, list[str]]] = []
    for i in range(n_docs):
        theta = rng.dirichlet(np.full(n_topics, concentration))
        n_background = int(rng.binomial(doc_len, background_fraction))
        background = rng.choice(vocab_size, size=n_background, p=background_p)
        topics = rng.choice(n_topics, size=doc_len - n_background, p=theta)
        within = rng.choice(slice_size, size=doc_len - n_background, p=local_p)
        tokens = vocab[np.concatenate([background, topics * slice_size + within])]
        docs.append((ids[i], tokens.tolist()))
    return docs


def qrels_for_labels(doc_ids: list[str], labels: np.ndarray, n_queries: int,
                     rel_per_query: int, seed: int,
                     focus_clusters: int = 3,
                     focus_fraction: float = 0.8) -> Qrels:
    """Queries whose relevant documents concentrate in few planted clusters.

    Each query picks up to focus_clusters labels and draws
    focus_fraction of its relevant documents from them, the rest from
    anywhere else. All judgments carry grade 1.
    """
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    n_labels = int(labels.max()) + 1
    by_label = [np.flatnonzero(labels == c) for c in range(n_labels)]
    judgments: dict[tuple[str, str], int] = {}
    for qi in range(n_queries):
        qid = f"q{qi:03d}"
        chosen = rng.choice(n_labels, size=min(focus_clusters, n_labels), replace=False)
        pool = np.concatenate([by_label[c] for c in chosen])
        n_focus = min(len(pool), round(rel_per_query * focus_fraction))
        picks = set(rng.choice(pool, size=n_focus, replace=False).tolist())
        while len(picks) < rel_per_query:
            picks.add(int(rng.integers(0, len(doc_ids))))
        for row in picks:
            judgments[(qid, doc_ids[row])] = 1
    return Qrels(judgments)


def spam_for_labels(doc_ids: list[str], labels: np.ndarray, seed: int,
                    noise: int = 5) -> SpamScores:
    """Spam scores correlated with planted clusters.

    Cluster base scores are spread evenly over [5, 95]; each document
    gets its cluster base plus uniform noise, clipped to [0, 99].
    """
    rng = np.random.default_rng(seed)
    labels = np.asarray(labels)
    n_labels = int(labels.max()) + 1
    bases = np.linspace(5, 95, n_labels).round().astype(int)
    offsets = rng.integers(-noise, noise + 1, size=len(doc_ids))
    scores = np.clip(bases[labels] + offsets, 0, 99)
    return SpamScores({doc_ids[i]: int(scores[i]) for i in range(len(doc_ids))})


def write_qrels(q: Qrels, sink) -> None:
    for (qid, doc), grade in sorted(q.judgments.items()):
        sink.write(f"{qid} 0 {doc} {grade}\n")


def write_spam(s: SpamScores, sink) -> None:
    for doc, score in sorted(s.scores.items()):
        sink.write(f"{score} {doc}\n")
