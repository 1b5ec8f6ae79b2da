"""Clustering over signature streams without retaining points.

Each pass routes every signature to a leaf, folds its bits into that
leaf's signed counters, and discards it; keys are then re-quantized
from the counters and empty branches pruned. Memory is proportional to
the tree, not the collection.

Insertion parallelism: one reader hands fixed-size batches to worker
threads; every worker owns a private full-width counter matrix and the
matrices are summed after the pass. Integer addition is associative
and commutative, so the result is bit-identical for any worker count
and any batch interleaving. The heavy work (XOR, popcount, reduceat)
runs inside numpy, which releases the GIL, so threads scale on
multi-core hosts.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from . import sigfile
from .errors import DataError, InsufficientDataError
from .routing import TreeRouter
from .signatures import SignatureCollection, unpack_bits
from .tree import (
    Accumulator,
    Node,
    TreeConfig,
    copy_tree,
    prune,
    reservoir_indices,
    sample_size,
    seed_tree,
    tree_depth,
    trees_equal,
    update_keys,
)

DEFAULT_BATCH_SIZE = 1024


class FileSource:
    """Re-readable signature stream backed by a file path."""

    def __init__(self, path: str):
        self.path = path
        self.dim, self.count = sigfile.read_header(path)
        self.bytes_read = 0

    def iter_batches(self, batch_size: int = DEFAULT_BATCH_SIZE):
        self.bytes_read = 0
        with open(self.path, "rb") as fh:
            yield from sigfile.iter_signatures(fh, batch_size)
            self.bytes_read = fh.tell()


class CollectionSource:
    """Adapter presenting an in-memory collection as a re-readable stream."""

    def __init__(self, coll: SignatureCollection):
        self.coll = coll
        self.dim = coll.spec.dimension
        self.count = len(coll)
        self.bytes_read = 0

    def iter_batches(self, batch_size: int = DEFAULT_BATCH_SIZE):
        self.bytes_read = self.coll.words.nbytes
        for s in range(0, self.count, batch_size):
            e = min(self.count, s + batch_size)
            yield self.coll.doc_ids[s:e], self.coll.words[s:e]


@dataclass
class StreamingTree:
    """Tree whose leaves are accumulators; points are never stored."""

    config: TreeConfig | None
    dim: int
    root: Node
    bytes_per_pass: int = 0

    def reset_accumulators(self) -> None:
        for leaf in _iter_leaves(self.root):
            leaf.reset()

    def state_nbytes(self) -> int:
        """Bytes held by keys and leaf counters; independent of stream length."""
        total = 0

        def visit(node: Node) -> None:
            nonlocal total
            total += node.keys.nbytes
            for child in node.children:
                if isinstance(child, Node):
                    visit(child)
                else:
                    total += self.dim * 4 + 16

        visit(self.root)
        return total


@dataclass
class RunStats:
    iterations_run: int = 0
    converged: bool = False
    distortion_per_pass: list[float] = field(default_factory=list)
    phase_seconds: list[dict[str, float]] = field(default_factory=list)
    worker_count: int = 1


def _iter_leaves(node: Node):
    for child in node.children:
        if isinstance(child, Node):
            yield from _iter_leaves(child)
        else:
            yield child


def _accumulate_batch(acc: np.ndarray, n_added: np.ndarray,
                      words: np.ndarray, slots: np.ndarray) -> None:
    """Fold a routed batch into (leaf, dimension) counters.

    Groups rows by slot with a stable sort so each leaf gets one
    reduceat segment; +-1 contributions come from 2*sum(bits) - size.
    """
    if slots.size == 0:
        return
    order = np.argsort(slots, kind="stable")
    sorted_slots = slots[order]
    starts = np.flatnonzero(np.r_[True, sorted_slots[1:] != sorted_slots[:-1]])
    uniq = sorted_slots[starts]
    sizes = np.diff(np.r_[starts, sorted_slots.size]).astype(np.int32)
    # int32 before reduceat: uint8 bit sums overflow past 255 rows
    bits = unpack_bits(words[order]).astype(np.int32)
    sums = np.add.reduceat(bits, starts, axis=0)
    acc[uniq] += 2 * sums - sizes[:, None]
    n_added[uniq] += sizes


def _insertion_phase(router: TreeRouter, source, workers: int,
                     batch_size: int) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Route the whole stream into per-leaf counters.

    Returns (counts (L, d) int32, n_added (L,) int64, distance sum, points).
    The merge order over worker-private counters is fixed, and integer
    sums are exact, so results do not depend on the worker count.
    """
    n_leaves = len(router.leaves)
    d = router.words_per_sig * 64

    if workers <= 1:
        acc = np.zeros((n_leaves, d), dtype=np.int32)
        n_added = np.zeros(n_leaves, dtype=np.int64)
        dist_total = 0
        points = 0
        for _, words in source.iter_batches(batch_size):
            res = router.route(words)
            _accumulate_batch(acc, n_added, words, res.slots)
            dist_total += int(res.dists.sum(dtype=np.int64))
            points += words.shape[0]
        return acc, n_added, dist_total, points

    accs = [np.zeros((n_leaves, d), dtype=np.int32) for _ in range(workers)]
    n_addeds = [np.zeros(n_leaves, dtype=np.int64) for _ in range(workers)]
    dist_parts = [0] * workers
    errors: list[BaseException] = []
    work: queue.Queue = queue.Queue(maxsize=workers * 4)

    def consume(w: int) -> None:
        try:
            while True:
                words = work.get()
                if words is None:
                    return
                res = router.route(words)
                _accumulate_batch(accs[w], n_addeds[w], words, res.slots)
                dist_parts[w] += int(res.dists.sum(dtype=np.int64))
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            errors.append(exc)
            while work.get() is not None:
                pass

    threads = [threading.Thread(target=consume, args=(w,), daemon=True) for w in range(workers)]
    for t in threads:
        t.start()
    points = 0
    try:
        for _, words in source.iter_batches(batch_size):
            work.put(words)
            points += words.shape[0]
    finally:
        # always deliver sentinels, or workers block forever on a bad stream
        for _ in range(workers):
            work.put(None)
        for t in threads:
            t.join()
    if errors:
        raise errors[0]

    acc = accs[0]
    n_added = n_addeds[0]
    for w in range(1, workers):
        acc += accs[w]
        n_added += n_addeds[w]
    return acc, n_added, sum(dist_parts), points


def streaming_iteration(tree: StreamingTree, source, workers: int = 1,
                        stats: RunStats | None = None,
                        batch_size: int = DEFAULT_BATCH_SIZE) -> StreamingTree:
    """One full pass: accumulate, update keys, prune, reset.

    Produces exactly the tree the in-memory insert/prune/update cycle
    would: records that received no points keep untouched keys and
    contribute zero to parent sums, so pruning them after the update
    leaves identical survivors.
    """
    if source.dim != tree.dim:
        raise DataError(f"stream dimension {source.dim} does not match tree dimension {tree.dim}")
    t0 = time.perf_counter()
    router = TreeRouter(tree.root)
    counts, n_added, dist_total, points = _insertion_phase(router, source, workers, batch_size)
    for slot, leaf in enumerate(router.leaves):
        leaf.counts = counts[slot]
        leaf.n_added = int(n_added[slot])
    t1 = time.perf_counter()
    update_keys(tree.root)
    t2 = time.perf_counter()
    prune(tree.root)
    t3 = time.perf_counter()
    tree.reset_accumulators()
    tree.bytes_per_pass = getattr(source, "bytes_read", 0)
    if stats is not None:
        stats.distortion_per_pass.append(dist_total / points if points else 0.0)
        stats.phase_seconds.append(
            {"insert": t1 - t0, "update": t2 - t1, "prune": t3 - t2}
        )
    return tree


def collect_rows(source, indices: np.ndarray) -> np.ndarray:
    """Gather the given sorted row indices in one sequential pass."""
    want = np.asarray(indices, dtype=np.int64)
    out = np.empty((want.size, source.dim // 64), dtype=np.uint64)
    pos = 0
    filled = 0
    for _, words in source.iter_batches(DEFAULT_BATCH_SIZE):
        b = words.shape[0]
        lo = np.searchsorted(want, pos)
        hi = np.searchsorted(want, pos + b)
        if hi > lo:
            out[lo:hi] = words[want[lo:hi] - pos]
            filled = hi
        pos += b
    if filled != want.size:
        raise DataError(f"stream ended at {pos} rows, sample wanted index {int(want[filled])}")
    return out


def streaming_emtree(config: TreeConfig, source, workers: int = 1,
                     batch_size: int = DEFAULT_BATCH_SIZE) -> tuple[StreamingTree, RunStats]:
    """Seed from a reservoir sample, then iterate to a fixed point or the cap."""
    n = source.count
    if n < config.order:
        raise InsufficientDataError(f"insufficient data for order {config.order}: only {n} signatures")
    k = sample_size(n, config)
    s_sample, s_build = np.random.SeedSequence(config.rng_seed).spawn(2)
    idx = reservoir_indices(n, k, s_sample)
    sample = collect_rows(source, idx)
    root = seed_tree(config, sample, np.random.default_rng(s_build), Accumulator)
    tree = StreamingTree(config=config, dim=source.dim, root=root)
    stats = RunStats(worker_count=workers)
    for it in range(1, config.max_iterations + 1):
        before = copy_tree(tree.root, Accumulator)
        streaming_iteration(tree, source, workers, stats=stats, batch_size=batch_size)
        stats.iterations_run = it
        if trees_equal(before, tree.root):
            stats.converged = True
            break
    return tree, stats


def assign_pass(tree: StreamingTree, source, sink, level: int,
                batch_size: int = DEFAULT_BATCH_SIZE) -> int:
    """Stream once more, writing `doc_id TAB cluster_path` at the given level.

    The tree is not modified. Returns the number of lines written.
    """
    depth = tree_depth(tree.root)
    if not 1 <= level <= depth:
        raise ValueError(f"level {level} out of range 1..{depth}")
    if source.dim != tree.dim:
        raise DataError(f"stream dimension {source.dim} does not match tree dimension {tree.dim}")
    router = TreeRouter(tree.root)
    written = 0
    for ids, words in source.iter_batches(batch_size):
        res = router.route(words, with_paths=True)
        prefixes = res.paths[:, :level]
        for i, doc_id in enumerate(ids):
            sink.write(f"{doc_id}\t{'.'.join(map(str, prefixes[i]))}\n")
            written += 1
    return written


def measure_insertion_throughput(tree: StreamingTree, source, workers: int,
                                 batch_size: int = DEFAULT_BATCH_SIZE) -> float:
    """Docs/second for the insertion phase alone; the tree is untouched."""
    router = TreeRouter(tree.root)
    t0 = time.perf_counter()
    _, _, _, points = _insertion_phase(router, source, workers, batch_size)
    elapsed = time.perf_counter() - t0
    return points / elapsed if elapsed > 0 else float("inf")
